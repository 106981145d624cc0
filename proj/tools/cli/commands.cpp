#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "amf/error.hpp"
#include "amf/io.hpp"
#include "amf/model_tests.hpp"
#include "amf/parallel.hpp"
#include "amf/synth.hpp"
#include "amf/vol_anomaly.hpp"
#include "cli/manifest.hpp"

namespace amf::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Inputs {
  ReturnsPanel securities;
  BasisUniverse universe;
  RiskFreeSeries rf;
  std::map<std::string, std::string> classes;
};

Inputs load_inputs(const RunConfig& c) {
  Inputs in;
  in.securities = load_panel(*c.securities, c.layout);
  in.universe.panel = load_panel(*c.basis, c.layout);
  in.universe.categories = load_labels(*c.categories);
  in.universe.market_index = c.market;
  in.universe.validate();
  if (in.securities.timestamps != in.universe.panel.timestamps) {
    throw Error(ErrorCode::kLengthMismatch, "securities and basis files list different periods");
  }
  in.rf = align_risk_free(load_risk_free(*c.rf), in.securities.timestamps);
  if (c.classes) {
    in.classes = load_labels(*c.classes);
  } else {
    for (const auto& id : in.securities.assets) in.classes[id] = "all";
  }
  return in;
}

GibsConfig gibs_config(const RunConfig& c) {
  GibsConfig g = c.gibs;
  g.seed = *c.seed;
  return g;
}

/// Rows whose label lies in [start, end]; empty bounds mean the data edges.
std::pair<Index, Index> row_range(const std::vector<std::string>& labels, const std::string& start,
                                  const std::string& end, const char* what) {
  Index begin = 0;
  while (begin < static_cast<Index>(labels.size()) && !start.empty() && labels[static_cast<std::size_t>(begin)] < start) {
    ++begin;
  }
  Index stop = static_cast<Index>(labels.size());
  while (stop > begin && !end.empty() && labels[static_cast<std::size_t>(stop - 1)] > end) --stop;
  if (stop <= begin) throw Error(ErrorCode::kConfig, std::string(what) + " selects no periods");
  return {begin, stop};
}

std::string csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

std::string na_or(double value) { return std::isfinite(value) ? io::format_double(value) : std::string("NA"); }

double finite_mean(const Eigen::VectorXd& v) {
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      sum += v(i);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : kNaN;
}

std::optional<InvarianceTest> invariance_test(std::string_view name) {
  for (auto test : {InvarianceTest::kIntercept, InvarianceTest::kLinear, InvarianceTest::kResidualExpansion,
                    InvarianceTest::kVaryingCoefficient}) {
    if (to_string(test) == name) return test;
  }
  return std::nullopt;
}

struct VolSetup {
  VolPortfolios portfolios;
  ReturnsPanel panel;
  BasisUniverse universe;
  RiskFreeSeries rf;
};

VolSetup vol_setup(const RunConfig& c, const Inputs& in) {
  VolOptions options;
  options.lookback = c.lookback;
  options.min_obs = c.min_obs;
  options.quantile = c.vol_quantile;
  options.min_eligible = c.min_eligible;
  if (c.eligibility) {
    std::set<std::string> eligible;
    for (const auto& [asset, rank] : load_labels(*c.eligibility)) eligible.insert(asset);
    options.eligible = std::move(eligible);
  }
  VolSetup setup;
  setup.portfolios = form_vol_portfolios(in.securities, in.rf, options);
  setup.panel = setup.portfolios.as_panel();
  const Index T = in.securities.periods();
  setup.universe = in.universe;
  setup.universe.panel = in.universe.panel.slice_rows(c.lookback, T);
  setup.rf = in.rf.slice_rows(c.lookback, T);
  return setup;
}

void run_invariance(const RunConfig& c, InvarianceTest test, ArtifactWriter& out) {
  const Inputs in = load_inputs(c);
  const DifferenceData data = make_difference_data(in.securities, in.universe, in.rf);
  InvarianceOptions options;
  options.gibs = gibs_config(c);
  options.residual_universe = c.residual_universe;
  options.basis_size = c.basis_size;
  options.penalty = c.penalty;
  options.fixed_model = c.fixed_model;
  const std::string name = to_string(test);
  const auto& labels = data.securities.timestamps;

  if (c.grid) {
    const int first = c.first_year ? c.first_year : label_year(labels.front());
    const int last = c.last_year ? c.last_year : label_year(labels.back());
    const PeriodGrid grid = period_grid_run(labels, first, last, c.min_len, [&](Index begin, Index end) {
      return invariance_report(data, test, begin, end, options).reject_frac(0.05, true);
    });
    out.write("grid_" + name + ".csv", csv([&](std::ostream& s) { write_period_grid(s, grid); }));
    out.write("cells_" + name + ".csv", csv([&](std::ostream& s) {
                s << "start_year,end_year,reject_pct,failed\n";
                for (const auto& cell : grid.cells()) {
                  s << cell.start_year << ',' << cell.end_year << ',' << io::format_fixed(100.0 * cell.value, 2) << ','
                    << (cell.failed ? 1 : 0) << '\n';
                }
              }));
    return;
  }
  const auto [begin, end] = row_range(labels, c.window_start, c.window_end, "test window");
  const TestReport report = invariance_report(data, test, begin, end, options);
  out.write("report_" + name + ".csv", csv([&](std::ostream& s) { write_report(s, report); }));
  Index tested = 0;
  for (Index i = 0; i < report.p_values.size(); ++i) tested += std::isnan(report.p_values(i)) ? 0 : 1;
  out.write("test_summary_" + name + ".csv", csv([&](std::ostream& s) {
              s << "test,entities,tested,reject_pct_bh,reject_pct_bhy\n";
              s << name << ',' << report.entities.size() << ',' << tested << ','
                << io::format_fixed(100.0 * report.reject_frac(0.05, false), 2) << ','
                << io::format_fixed(100.0 * report.reject_frac(0.05, true), 2) << '\n';
            }));
}

void run_anomaly(const RunConfig& c, ArtifactWriter& out) {
  const Inputs in = load_inputs(c);
  const VolSetup setup = vol_setup(c, in);
  const auto& labels = setup.panel.timestamps;
  auto [begin, end] = row_range(labels, c.horizon_start, c.horizon_end, "anomaly horizon");
  begin = std::max<Index>(begin, c.rolling_window);
  if (begin >= end) throw Error(ErrorCode::kConfig, "anomaly horizon leaves no weeks after the rolling window");
  RollingOptions options;
  options.window = c.rolling_window;
  options.horizon_begin = begin;
  options.horizon_end = end;
  options.gibs = gibs_config(c);
  options.run_fixed = !options.gibs.fixed_factors.empty();
  const RollingStudy study = rolling_study(setup.panel, setup.universe, setup.rf, options);

  out.write("memberships.csv", csv([&](std::ostream& s) { write_memberships(s, setup.portfolios); }));
  out.write("portfolio_returns.csv", csv([&](std::ostream& s) { write_portfolio_returns(s, setup.portfolios); }));
  out.write("rolling_diagnostics.csv", csv([&](std::ostream& s) { write_rolling_diagnostics(s, study); }));
  out.write("rolling_heatmap.csv",
            csv([&](std::ostream& s) { write_rolling_heatmap(s, study, setup.universe.categories); }));
  std::vector<AnomalyMode> modes{AnomalyMode::kExcess};
  if (options.run_fixed) modes.push_back(AnomalyMode::kResidualFixed);
  modes.push_back(AnomalyMode::kResidualGibs);
  out.write("anomaly.csv", csv([&](std::ostream& s) {
              s << "mode,t_stat,df,p_value\n";
              for (auto mode : modes) {
                const WelchResult r = anomaly_test(study, mode);
                s << to_string(mode) << ',' << io::format_double(r.t_stat) << ',' << io::format_double(r.df) << ','
                  << io::format_double(r.p_value) << '\n';
              }
            }));
  out.write("rolling_summary.csv", csv([&](std::ostream& s) {
              s << "portfolio,model,oos_r2,avg_adj_r2,avg_selected,alpha_reject_pct\n";
              for (std::size_t p = 0; p < study.portfolios.size(); ++p) {
                for (auto model : {FactorModel::kGibs, FactorModel::kFixed}) {
                  if (model == FactorModel::kFixed && !options.run_fixed) continue;
                  double adj = 0.0, selected = 0.0, rejected = 0.0, weeks = 0.0;
                  for (const auto& week : study.weeks) {
                    if (!week.ok()) continue;
                    const auto& fit = (model == FactorModel::kGibs ? week.gibs : week.fixed)[p].selection;
                    adj += fit.adj_r2;
                    selected += static_cast<double>(fit.selected.size());
                    rejected += fit.alpha_p < options.gibs.sig_level ? 1.0 : 0.0;
                    weeks += 1.0;
                  }
                  s << io::csv_field(study.portfolios[p]) << ',' << to_string(model) << ','
                    << na_or(study.oos_r2(static_cast<Index>(p), model)) << ','
                    << na_or(weeks > 0 ? adj / weeks : kNaN) << ',' << na_or(weeks > 0 ? selected / weeks : kNaN)
                    << ',' << (weeks > 0 ? io::format_fixed(100.0 * rejected / weeks, 2) : std::string("NA")) << '\n';
                }
              }
            }));
}

void run_loading_diff(const RunConfig& c, ArtifactWriter& out) {
  const Inputs in = load_inputs(c);
  const VolSetup setup = vol_setup(c, in);
  const auto [begin, end] = row_range(setup.panel.timestamps, c.window_start, c.window_end, "loading-diff window");
  const GibsConfig g = gibs_config(c);
  const PreparedUniverse prep = prepare_universe(excess_window(setup.universe, setup.rf, begin, end), g);
  const ReturnsPanel excess = excess_returns(setup.panel, setup.rf).slice_rows(begin, end);
  std::vector<Index> rows;
  for (Index t = 0; t < excess.periods(); ++t) {
    if (excess.mask(t, 0) && excess.mask(t, 1)) rows.push_back(t);
  }
  const Eigen::VectorXd y_low = excess.values.col(0)(rows);
  const Eigen::VectorXd y_high = excess.values.col(1)(rows);
  const Eigen::MatrixXd X = prep.window.X(rows, Eigen::all);

  std::ostringstream s;
  s << "model,selected_low,selected_high,f_stat,df1,df2,p_value\n";
  auto emit = [&](const std::string& model, const std::vector<Index>& low, const std::vector<Index>& high) {
    auto names = [&](const std::vector<Index>& cols) {
      std::vector<std::string> out_names;
      for (Index col : cols) out_names.push_back(prep.window.assets[static_cast<std::size_t>(col)]);
      return io::join(out_names, ";");
    };
    const FTestResult r = loading_difference_test(y_low, y_high, X, low, high);
    s << model << ',' << io::csv_field(names(low)) << ',' << io::csv_field(names(high)) << ','
      << io::format_double(r.f_stat) << ',' << io::format_double(r.df1) << ',' << io::format_double(r.df2) << ','
      << io::format_double(r.p_value) << '\n';
  };
  // Selection runs on the rows where both portfolios are observed.
  PreparedUniverse aligned = prep;
  aligned.window.X = X;
  aligned.orth.X_tilde = prep.orth.X_tilde(rows, Eigen::all);
  aligned.window.timestamps.clear();
  for (Index t : rows) aligned.window.timestamps.push_back(prep.window.timestamps[static_cast<std::size_t>(t)]);
  emit("gibs", gibs_select(y_low, aligned, g, "low").selected_columns,
       gibs_select(y_high, aligned, g, "high").selected_columns);
  if (!prep.fixed.empty()) emit("fixed", prep.fixed, prep.fixed);
  out.write("loading_diff.csv", s.str());
}

// Minimal CSV table reader for the report step.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name, const std::string& origin) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::kMalformedCsv, origin + ": missing column " + std::string(name));
  }
};

Table read_table(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedCsv, path.string() + ": empty file");
  table.header = io::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::kMalformedCsv, path.string() + ": row width differs from header");
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::vector<std::string> artifacts_with_prefix(const std::filesystem::path& dir, std::string_view prefix) {
  std::vector<std::string> names;
  if (!std::filesystem::is_directory(dir)) return names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with(prefix) && name.ends_with(".csv")) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string stem_after(const std::string& name, std::string_view prefix) {
  return name.substr(prefix.size(), name.size() - prefix.size() - 4);
}

}  // namespace

const std::vector<std::string>& test_names() {
  static const std::vector<std::string> names{"intercept", "invariance", "residual-expansion",
                                              "varying-coef", "anomaly",   "loading-diff"};
  return names;
}

void cmd_fit(const RunConfig& c) {
  const Inputs in = load_inputs(c);
  const GibsConfig g = gibs_config(c);
  const auto& labels = in.securities.timestamps;
  const auto [begin, end] = row_range(labels, c.window_start, c.window_end, "fit window");
  const ReturnsPanel sec_excess = excess_returns(in.securities, in.rf);
  const PreparedUniverse prep = prepare_universe(excess_window(in.universe, in.rf, begin, end), g);
  std::vector<SelectionResult> results = gibs_run(sec_excess.slice_rows(begin, end), prep, g);

  Index holdout = 0;
  if (!c.holdout_end.empty()) {
    Index stop = end;
    while (stop < static_cast<Index>(labels.size()) && labels[static_cast<std::size_t>(stop)] <= c.holdout_end) ++stop;
    holdout = stop - end;
    if (holdout > 0) {
      const ReturnsPanel basis_excess = excess_returns(in.universe.panel, in.rf);
      std::vector<Index> cols;
      for (const auto& asset : prep.window.assets) cols.push_back(*basis_excess.asset_index(asset));
      const Eigen::MatrixXd X_hold = basis_excess.values.middleRows(end, holdout)(Eigen::all, cols);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const Eigen::VectorXd y = sec_excess.values.col(static_cast<Index>(i));
        results[i].oos_r2 = holdout_r2(results[i], X_hold, y.segment(end, holdout), finite_mean(y.segment(begin, end - begin)));
      }
    }
  }

  ArtifactWriter out(c.out);
  out.write("selection.csv", csv([&](std::ostream& s) { write_selection_table(s, results); }));
  const SelectionSummary summary = summarize_selection(results, in.classes, in.universe.categories);
  out.write("summary_counts.csv", csv([&](std::ostream& s) { write_summary_matrix(s, summary, false); }));
  out.write("summary_proportions.csv", csv([&](std::ostream& s) { write_summary_matrix(s, summary, true); }));
  Index failed = 0;
  std::vector<std::string> warnings = prep.warnings;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      warnings.push_back(r.security + ": " + r.error);
    }
  }
  double oos_sum = 0.0;
  Index oos_count = 0;
  for (const auto& r : results) {
    if (std::isfinite(r.oos_r2)) {
      oos_sum += r.oos_r2;
      ++oos_count;
    }
  }
  out.write("fit_summary.csv", csv([&](std::ostream& s) {
              s << "key,value\n";
              s << "window_start," << labels[static_cast<std::size_t>(begin)] << '\n';
              s << "window_end," << labels[static_cast<std::size_t>(end - 1)] << '\n';
              s << "holdout_periods," << holdout << '\n';
              s << "securities," << results.size() << '\n';
              s << "failed," << failed << '\n';
              s << "dimension," << prep.dimension() << '\n';
              s << "avg_selected," << io::format_double(summary.avg_selected) << '\n';
              s << "avg_significant," << io::format_double(summary.avg_significant) << '\n';
              s << "union_selected," << summary.union_selected << '\n';
              s << "avg_oos_r2," << na_or(oos_count ? oos_sum / static_cast<double>(oos_count) : kNaN) << '\n';
            }));
  std::string warning_text;
  for (const auto& w : warnings) warning_text += w + "\n";
  out.write("warnings.txt", warning_text);
  write_manifest(c, "fit", out);
}

void cmd_test(const RunConfig& c, std::string_view test_name) {
  ArtifactWriter out(c.out);
  if (auto test = invariance_test(test_name)) {
    run_invariance(c, *test, out);
  } else if (test_name == "anomaly") {
    run_anomaly(c, out);
  } else if (test_name == "loading-diff") {
    run_loading_diff(c, out);
  } else {
    throw Error(ErrorCode::kConfig, "unknown test '" + std::string(test_name) + "'; valid tests: " + io::join(test_names(), ", "));
  }
  write_manifest(c, "test_" + std::string(test_name), out);
}

void cmd_report(const RunConfig& c) {
  ArtifactWriter out(c.out);
  std::vector<std::string> consumed;
  const std::filesystem::path dir = c.out;

  if (std::filesystem::exists(dir / "selection.csv")) {
    consumed.push_back("selection.csv");
    if (!c.categories) throw Error(ErrorCode::kConfig, "report needs 'categories' to build the selection heat map");
    const auto categories = load_labels(*c.categories);
    std::map<std::string, std::string> classes;
    if (c.classes) classes = load_labels(*c.classes);
    const Table table = read_table(dir / "selection.csv");
    const auto sec = table.column("security", "selection.csv");
    const auto sel = table.column("selected", "selection.csv");
    const auto sig = table.column("significant", "selection.csv");
    const auto adj = table.column("adj_r2", "selection.csv");
    std::vector<SelectionResult> results;
    std::map<std::string, std::string> run_classes;
    for (const auto& row : table.rows) {
      SelectionResult r;
      r.security = row[sec];
      r.selected = io::split_list(row[sel], ';');
      r.significant = io::split_list(row[sig], ';');
      if (row[adj] == "NA" && r.selected.empty()) r.error = "failed";
      auto it = classes.find(r.security);
      run_classes[r.security] = it == classes.end() ? "all" : it->second;
      results.push_back(std::move(r));
    }
    const SelectionSummary summary = summarize_selection(results, run_classes, categories);
    out.write("plot_heatmap.csv", csv([&](std::ostream& s) {
                s << "category,class,percent\n";
                for (std::size_t b = 0; b < summary.categories.size(); ++b) {
                  for (std::size_t d = 0; d < summary.classes.size(); ++d) {
                    s << io::csv_field(summary.categories[b]) << ',' << io::csv_field(summary.classes[d]) << ','
                      << io::format_fixed(100.0 * summary.proportions(static_cast<Index>(b), static_cast<Index>(d)), 2)
                      << '\n';
                  }
                }
              }));
    out.write("plot_selection_counts.csv", csv([&](std::ostream& s) {
                s << "security,selected,significant\n";
                for (const auto& r : results) {
                  s << io::csv_field(r.security) << ',' << r.selected.size() << ',' << r.significant.size() << '\n';
                }
              }));
  }

  for (const auto& name : artifacts_with_prefix(dir, "report_")) {
    consumed.push_back(name);
    const Table table = read_table(dir / name);
    const auto p_col = table.column("p", name);
    std::vector<Index> bins(20, 0);
    for (const auto& row : table.rows) {
      const auto p = io::parse_double(row[p_col]);
      if (!p || !std::isfinite(*p)) continue;
      bins[static_cast<std::size_t>(std::min(19, static_cast<int>(*p * 20.0)))] += 1;
    }
    out.write("plot_pvalue_hist_" + stem_after(name, "report_") + ".csv", csv([&](std::ostream& s) {
                s << "bin_lower,bin_upper,count\n";
                for (std::size_t b = 0; b < bins.size(); ++b) {
                  s << io::format_fixed(0.05 * static_cast<double>(b), 2) << ','
                    << io::format_fixed(0.05 * static_cast<double>(b + 1), 2) << ',' << bins[b] << '\n';
                }
              }));
  }

  for (const auto& name : artifacts_with_prefix(dir, "grid_")) {
    consumed.push_back(name);
    const Table table = read_table(dir / name);
    out.write("plot_grid_" + stem_after(name, "grid_") + ".csv", csv([&](std::ostream& s) {
                s << "start_year,end_year,percent\n";
                for (const auto& row : table.rows) {
                  for (std::size_t k = 1; k < row.size(); ++k) {
                    if (!row[k].empty()) s << row[0] << ',' << table.header[k] << ',' << row[k] << '\n';
                  }
                }
              }));
  }

  if (std::filesystem::exists(dir / "portfolio_returns.csv")) {
    consumed.push_back("portfolio_returns.csv");
    const Table table = read_table(dir / "portfolio_returns.csv");
    const auto week = table.column("week", "portfolio_returns.csv");
    const auto low = table.column("low_capital", "portfolio_returns.csv");
    const auto high = table.column("high_capital", "portfolio_returns.csv");
    out.write("plot_capital.csv", csv([&](std::ostream& s) {
                s << "week,portfolio,capital\n";
                for (const auto& row : table.rows) {
                  s << row[week] << ",low," << row[low] << '\n';
                  s << row[week] << ",high," << row[high] << '\n';
                }
              }));
  }

  if (std::filesystem::exists(dir / "rolling_diagnostics.csv")) {
    consumed.push_back("rolling_diagnostics.csv");
    const Table table = read_table(dir / "rolling_diagnostics.csv");
    const auto week = table.column("week", "rolling_diagnostics.csv");
    const auto gdim = table.column("gibs_dim", "rolling_diagnostics.csv");
    const auto pdim = table.column("pca_dim", "rolling_diagnostics.csv");
    out.write("plot_dimension.csv", csv([&](std::ostream& s) {
                s << "week,measure,value\n";
                std::string last;
                for (const auto& row : table.rows) {
                  if (row[week] == last) continue;
                  last = row[week];
                  s << row[week] << ",gibs," << row[gdim] << '\n';
                  s << row[week] << ",pca," << row[pdim] << '\n';
                }
              }));
  }

  if (consumed.empty()) throw Error(ErrorCode::kIo, "no run artifacts to report in " + dir.string());
  write_manifest(c, "report", out, consumed);
}

void cmd_synth(const RunConfig& c) {
  SyntheticSpec spec = c.synth;
  spec.seed = *c.seed;
  const SyntheticData data = synthesize(spec);
  ArtifactWriter out(c.out);
  out.write("securities.csv", csv([&](std::ostream& s) { write_panel(s, data.securities); }));
  out.write("basis.csv", csv([&](std::ostream& s) { write_panel(s, data.basis.panel); }));
  out.write("rf.csv", csv([&](std::ostream& s) { write_risk_free(s, data.rf); }));
  out.write("categories.csv",
            csv([&](std::ostream& s) { write_labels(s, data.basis.categories, "asset", "category"); }));
  out.write("classes.csv", csv([&](std::ostream& s) { write_labels(s, data.classes, "asset", "class"); }));
  out.write("truth.csv", csv([&](std::ostream& s) {
              s << "security,support,betas\n";
              for (std::size_t i = 0; i < data.supports.size(); ++i) {
                std::vector<std::string> names, betas;
                for (Index j : data.supports[i]) {
                  names.push_back(data.basis.panel.assets[static_cast<std::size_t>(j)]);
                  betas.push_back(io::format_double(data.betas(static_cast<Index>(i), j)));
                }
                s << io::csv_field(data.securities.assets[i]) << ',' << io::csv_field(io::join(names, ";")) << ','
                  << io::csv_field(io::join(betas, ";")) << '\n';
              }
            }));
  std::vector<std::string> fixed;
  for (const auto& asset : data.basis.panel.assets) {
    const auto& category = data.basis.categories.at(asset);
    if (category == "market" || category == "factor") fixed.push_back(asset);
  }
  io::KeyValueFile config;
  config.set("securities", "securities.csv");
  config.set("basis", "basis.csv");
  config.set("rf", "rf.csv");
  config.set("categories", "categories.csv");
  config.set("classes", "classes.csv");
  config.set("market", data.basis.market_index);
  config.set("fixed_factors", io::join(fixed, ","));
  config.set("seed", std::to_string(spec.seed));
  out.write("config.txt", config.to_string());
  write_manifest(c, "synth", out);
}

void cmd_compare(const RunConfig& c) {
  const Inputs in = load_inputs(c);
  const auto& labels = in.securities.timestamps;
  const auto [begin, end] = row_range(labels, c.window_start, c.window_end, "training window");
  CompareSpec spec;
  spec.train_begin = begin;
  spec.train_end = end;
  spec.holdout_end = end;
  while (spec.holdout_end < static_cast<Index>(labels.size()) &&
         (c.holdout_end.empty() || labels[static_cast<std::size_t>(spec.holdout_end)] <= c.holdout_end)) {
    ++spec.holdout_end;
  }
  if (spec.holdout_end == end) throw Error(ErrorCode::kConfig, "compare needs holdout periods after window_end");
  if (c.gibs.fixed_factors.empty()) {
    spec.methods.erase(std::remove_if(spec.methods.begin(), spec.methods.end(),
                                      [](Method m) { return m == Method::kFixed || m == Method::kGibsFixed; }),
                       spec.methods.end());
  }
  const ComparisonTable table = compare_methods(in.securities, in.universe, in.rf, gibs_config(c), spec);
  ArtifactWriter out(c.out);
  out.write("comparison.csv", csv([&](std::ostream& s) { write_comparison_table(s, table); }));
  out.write("comparison_oos.csv", csv([&](std::ostream& s) {
              s << "security,model,oos_r2\n";
              for (std::size_t i = 0; i < table.securities.size(); ++i) {
                for (const auto& row : table.rows) {
                  s << io::csv_field(table.securities[i]) << ',' << io::csv_field(row.label) << ','
                    << na_or(row.oos_r2(static_cast<Index>(i))) << '\n';
                }
              }
            }));
  write_manifest(c, "compare", out);
}

int run(int argc, char** argv) {
  CLI::App app{"amf: adaptive multi-factor model estimation and tests"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--seed", seed, "random seed for cross-validation and synthesis");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--out", out_dir, "output directory");
  auto* fit = app.add_subcommand("fit", "select basis assets for every security and write selection tables");
  auto* test = app.add_subcommand("test", "run a named hypothesis test");
  std::string test_name;
  test->add_option("name", test_name, "one of: " + io::join(test_names(), ", "))->required();
  auto* report = app.add_subcommand("report", "turn earlier run artifacts into long-format plot tables");
  auto* synth = app.add_subcommand("synth", "generate a synthetic fixture with known loadings");
  auto* compare = app.add_subcommand("compare", "compare selection methods on a holdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty() ? parse_config(io::KeyValueFile{}, std::filesystem::current_path())
                                           : load_config(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (out_dir) config.out = *out_dir;
    set_thread_count(config.threads);

    if (fit->parsed()) {
      config.subcommand = "fit";
      validate_for(config, "fit");
      cmd_fit(config);
    } else if (test->parsed()) {
      config.subcommand = "test";
      const auto& names = test_names();
      if (std::find(names.begin(), names.end(), test_name) == names.end()) {
        throw Error(ErrorCode::kConfig, "unknown test '" + test_name + "'; valid tests: " + io::join(names, ", "));
      }
      validate_for(config, "test");
      cmd_test(config, test_name);
    } else if (report->parsed()) {
      config.subcommand = "report";
      validate_for(config, "report");
      cmd_report(config);
    } else if (synth->parsed()) {
      config.subcommand = "synth";
      validate_for(config, "synth");
      cmd_synth(config);
    } else if (compare->parsed()) {
      config.subcommand = "compare";
      validate_for(config, "compare");
      cmd_compare(config);
    }
  } catch (const Error& e) {
    std::cerr << "amf: " << e.what() << '\n';
    switch (category(e.code())) {
      case ErrorCategory::kConfig: return 2;
      case ErrorCategory::kData: return 3;
      case ErrorCategory::kNumerical: return 4;
    }
  } catch (const std::exception& e) {
    std::cerr << "amf: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace amf::cli
