#include "amf/vol_anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "amf/error.hpp"
#include "amf/io.hpp"
#include "amf/parallel.hpp"

namespace amf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string na_or(double value) { return std::isfinite(value) ? io::format_double(value) : std::string("NA"); }

double member_mean(const Eigen::MatrixXd& values, Index row, const std::vector<Index>& members) {
  double sum = 0.0;
  Index count = 0;
  for (Index c : members) {
    if (std::isfinite(values(row, c))) {
      sum += values(row, c);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : kNaN;
}

std::string half_year(std::string_view label) {
  int month = 1;
  if (label.size() >= 7 && label[4] == '-') month = (label[5] - '0') * 10 + (label[6] - '0');
  return std::to_string(label_year(label)) + (month >= 7 ? "H2" : "H1");
}

}  // namespace

ReturnsPanel VolPortfolios::as_panel() const {
  ReturnsPanel panel;
  panel.timestamps = timestamps;
  panel.assets = {"low", "high"};
  panel.values.resize(low_returns.size(), 2);
  panel.values << low_returns, high_returns;
  panel.mask = panel.values.array().isFinite();
  return panel;
}

VolPortfolios form_vol_portfolios(const ReturnsPanel& panel, const RiskFreeSeries& rf, const VolOptions& options) {
  if (options.lookback < 2 || options.min_obs < 2 || options.min_obs > options.lookback) {
    throw Error(ErrorCode::kInvalidArgument, "need 2 <= min_obs <= lookback");
  }
  if (!(options.quantile > 0.0 && options.quantile <= 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "volatility quantile must lie in (0, 0.5]");
  }
  if (panel.periods() <= options.lookback) {
    throw Error(ErrorCode::kTooFewObservations, "panel shorter than the volatility lookback");
  }
  const ReturnsPanel excess = excess_returns(panel, align_risk_free(rf, panel.timestamps));
  const Index N = panel.num_assets();
  const Index W = panel.periods() - options.lookback;

  VolPortfolios out;
  out.assets = panel.assets;
  out.timestamps.assign(panel.timestamps.begin() + options.lookback, panel.timestamps.end());
  out.low.resize(static_cast<std::size_t>(W));
  out.high.resize(static_cast<std::size_t>(W));
  out.low_returns = Eigen::VectorXd::Constant(W, kNaN);
  out.high_returns = out.low_returns;
  out.volatility = Eigen::MatrixXd::Constant(W, N, kNaN);

  std::vector<bool> allowed(static_cast<std::size_t>(N), true);
  if (options.eligible) {
    for (Index j = 0; j < N; ++j) allowed[static_cast<std::size_t>(j)] = options.eligible->contains(panel.assets[j]);
  }

  for (Index w = 0; w < W; ++w) {
    const Index begin = w;
    const Index hold = w + options.lookback;
    std::vector<Index> eligible;
    for (Index j = 0; j < N; ++j) {
      if (!allowed[static_cast<std::size_t>(j)]) continue;
      double sum = 0.0, sq = 0.0;
      Index count = 0;
      for (Index t = begin; t < hold; ++t) {
        if (excess.mask(t, j)) {
          sum += excess.values(t, j);
          ++count;
        }
      }
      if (count < options.min_obs) continue;
      const double mean = sum / static_cast<double>(count);
      for (Index t = begin; t < hold; ++t) {
        if (excess.mask(t, j)) sq += (excess.values(t, j) - mean) * (excess.values(t, j) - mean);
      }
      out.volatility(w, j) = std::sqrt(sq / static_cast<double>(count - 1));
      eligible.push_back(j);
    }
    if (static_cast<Index>(eligible.size()) < options.min_eligible) {
      throw Error(ErrorCode::kUniverseTooSmall, std::to_string(eligible.size()) + " eligible assets in week " +
                                                    panel.timestamps[static_cast<std::size_t>(hold)]);
    }
    std::stable_sort(eligible.begin(), eligible.end(),
                     [&](Index a, Index b) { return out.volatility(w, a) < out.volatility(w, b); });
    const auto k = static_cast<std::size_t>(std::floor(options.quantile * static_cast<double>(eligible.size()) + 1e-9));
    auto& low = out.low[static_cast<std::size_t>(w)];
    auto& high = out.high[static_cast<std::size_t>(w)];
    low.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(k));
    high.assign(eligible.end() - static_cast<std::ptrdiff_t>(k), eligible.end());
    std::sort(low.begin(), low.end());
    std::sort(high.begin(), high.end());
    out.low_returns(w) = member_mean(panel.values, hold, low);
    out.high_returns(w) = member_mean(panel.values, hold, high);
  }
  return out;
}

Eigen::VectorXd cumulative_capital(const Eigen::VectorXd& returns) {
  Eigen::VectorXd value(returns.size() + 1);
  value(0) = 1.0;
  for (Index t = 0; t < returns.size(); ++t) {
    if (!std::isfinite(returns(t))) throw Error(ErrorCode::kInvalidArgument, "return series contains a missing value");
    if (returns(t) <= -1.0) throw Error(ErrorCode::kTotalLoss, "return of -100% or worse at position " + std::to_string(t));
    value(t + 1) = value(t) * (1.0 + returns(t));
  }
  return value;
}

WelchResult anomaly_test(const Eigen::VectorXd& low_returns, const Eigen::VectorXd& high_returns) {
  if (low_returns.size() != high_returns.size()) throw Error(ErrorCode::kLengthMismatch, "series are not aligned");
  return welch_test(cumulative_capital(low_returns), cumulative_capital(high_returns));
}

FTestResult loading_difference_test(const Eigen::VectorXd& y_low, const Eigen::VectorXd& y_high,
                                    const Eigen::MatrixXd& X, const std::vector<Index>& s_low,
                                    const std::vector<Index>& s_high) {
  if (y_low.size() != X.rows() || y_high.size() != X.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "portfolio series and basis differ in length");
  }
  std::vector<Index> s(s_low);
  s.insert(s.end(), s_high.begin(), s_high.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "loading difference test needs a nonempty factor set");
  const Index n = X.rows();
  const auto k = static_cast<Index>(s.size());
  const Eigen::MatrixXd W = X(Eigen::all, s);
  Eigen::MatrixXd stacked(2 * n, k);
  stacked << W, W;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(2 * n, 2 * k);
  full.leftCols(k) = stacked;
  full.bottomRightCorner(n, k) = W;
  Eigen::VectorXd z(2 * n);
  z << y_low, y_high;
  return nested_f_test(ols(stacked, z, Intercept::kNone), ols(full, z, Intercept::kNone));
}

std::string to_string(FactorModel model) { return model == FactorModel::kGibs ? "gibs" : "fixed"; }

std::string to_string(AnomalyMode mode) {
  switch (mode) {
    case AnomalyMode::kExcess: return "excess";
    case AnomalyMode::kResidualFixed: return "residual_fixed";
    case AnomalyMode::kResidualGibs: return "residual_amf";
  }
  return "unknown";
}

AnomalyMode parse_anomaly_mode(std::string_view text) {
  if (text == "excess") return AnomalyMode::kExcess;
  if (text == "residual_fixed" || text == "residual_ff5") return AnomalyMode::kResidualFixed;
  if (text == "residual_amf" || text == "residual_gibs") return AnomalyMode::kResidualGibs;
  throw Error(ErrorCode::kConfig, "unknown anomaly mode '" + std::string(text) +
                                      "' (expected excess, residual_fixed or residual_amf)");
}

Eigen::VectorXd RollingStudy::residuals(Index portfolio, FactorModel model) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Index>(weeks.size()), kNaN);
  for (std::size_t w = 0; w < weeks.size(); ++w) {
    if (!weeks[w].ok()) continue;
    const auto& fits = model == FactorModel::kGibs ? weeks[w].gibs : weeks[w].fixed;
    if (static_cast<Index>(fits.size()) > portfolio) out(static_cast<Index>(w)) = fits[static_cast<std::size_t>(portfolio)].residual;
  }
  return out;
}

Eigen::VectorXd RollingStudy::excess(Index portfolio) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Index>(weeks.size()), kNaN);
  for (std::size_t w = 0; w < weeks.size(); ++w) {
    if (weeks[w].realized.size() > portfolio) out(static_cast<Index>(w)) = weeks[w].realized(portfolio);
  }
  return out;
}

double RollingStudy::oos_r2(Index portfolio, FactorModel model) const {
  double sse = 0.0, base = 0.0;
  for (const auto& week : weeks) {
    if (!week.ok()) continue;
    const auto& fits = model == FactorModel::kGibs ? week.gibs : week.fixed;
    if (static_cast<Index>(fits.size()) <= portfolio) continue;
    const double predicted = fits[static_cast<std::size_t>(portfolio)].prediction;
    const double realized = week.realized(portfolio);
    if (!std::isfinite(predicted) || !std::isfinite(realized)) continue;
    sse += (realized - predicted) * (realized - predicted);
    base += (realized - week.train_mean(portfolio)) * (realized - week.train_mean(portfolio));
  }
  return base > 0.0 ? 1.0 - sse / base : kNaN;
}

RollingStudy rolling_study(const ReturnsPanel& portfolios, const BasisUniverse& universe, const RiskFreeSeries& rf,
                           const RollingOptions& options) {
  options.gibs.validate();
  if (portfolios.timestamps != universe.panel.timestamps) {
    throw Error(ErrorCode::kLengthMismatch, "portfolio and basis panels use different periods");
  }
  if (!(options.window >= 3 && options.horizon_begin >= options.window && options.horizon_begin < options.horizon_end &&
        options.horizon_end <= portfolios.periods())) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must satisfy window <= begin < end <= T");
  }
  const RiskFreeSeries aligned = align_risk_free(rf, portfolios.timestamps);
  const ReturnsPanel port_excess = excess_returns(portfolios, aligned);
  const ReturnsPanel basis_excess = excess_returns(universe.panel, aligned);
  const Index P = portfolios.num_assets();

  RollingStudy study;
  study.portfolios = portfolios.assets;
  study.weeks.resize(static_cast<std::size_t>(options.horizon_end - options.horizon_begin));
  parallel_for(study.weeks.size(), [&](std::size_t slot) {
    const Index w = options.horizon_begin + static_cast<Index>(slot);
    RollingWeek& week = study.weeks[slot];
    week.timestamp = portfolios.timestamps[static_cast<std::size_t>(w)];
    week.realized = port_excess.values.row(w).transpose();
    week.train_mean = Eigen::VectorXd::Constant(P, kNaN);
    try {
      const Index begin = w - options.window;
      const PreparedUniverse prep = prepare_universe(
          window_from_panel(basis_excess, universe.categories, universe.market_index, begin, w), options.gibs);
      if (options.dimensions) {
        week.gibs_dimension = prep.dimension();
        week.pca_dimension = pca_dimension(prep.window.X);
      }
      std::vector<Index> to_panel;
      for (const auto& asset : prep.window.assets) to_panel.push_back(*basis_excess.asset_index(asset));
      const Eigen::VectorXd x_next = basis_excess.values.row(w)(to_panel).transpose();

      auto score = [&](SelectionResult selection, Index p) {
        PortfolioFit fit;
        const Eigen::VectorXd x = x_next(selection.selected_columns);
        if (x.allFinite()) {
          const double factor_part =
              selection.selected_columns.empty() ? 0.0 : x.dot(selection.fit.coefficients.tail(x.size()));
          fit.prediction = selection.fit.coefficients(0) + factor_part;
          fit.residual = week.realized(p) - factor_part;
        }
        fit.selection = std::move(selection);
        return fit;
      };
      for (Index p = 0; p < P; ++p) {
        const Eigen::VectorXd y = port_excess.values.col(p).segment(begin, options.window);
        double sum = 0.0;
        Index count = 0;
        for (Index t = 0; t < y.size(); ++t) {
          if (std::isfinite(y(t))) {
            sum += y(t);
            ++count;
          }
        }
        week.train_mean(p) = count ? sum / static_cast<double>(count) : kNaN;
        week.gibs.push_back(score(gibs_select(y, prep, options.gibs, portfolios.assets[p]), p));
        if (options.run_fixed) {
          week.fixed.push_back(
              score(fixed_select(y, prep.window, prep.fixed, options.gibs.sig_level, portfolios.assets[p]), p));
        }
      }
    } catch (const Error& e) {
      week.gibs.clear();
      week.fixed.clear();
      week.error = e.what();
    }
  });
  return study;
}

WelchResult anomaly_test(const RollingStudy& study, AnomalyMode mode, Index low, Index high) {
  Eigen::VectorXd a, b;
  switch (mode) {
    case AnomalyMode::kExcess:
      a = study.excess(low);
      b = study.excess(high);
      break;
    case AnomalyMode::kResidualFixed:
      a = study.residuals(low, FactorModel::kFixed);
      b = study.residuals(high, FactorModel::kFixed);
      break;
    case AnomalyMode::kResidualGibs:
      a = study.residuals(low, FactorModel::kGibs);
      b = study.residuals(high, FactorModel::kGibs);
      break;
  }
  std::vector<Index> rows;
  for (Index t = 0; t < a.size(); ++t) {
    if (std::isfinite(a(t)) && std::isfinite(b(t))) rows.push_back(t);
  }
  return anomaly_test(Eigen::VectorXd(a(rows)), Eigen::VectorXd(b(rows)));
}

void write_memberships(std::ostream& out, const VolPortfolios& portfolios) {
  out << "week,portfolio,asset,volatility\n";
  for (std::size_t w = 0; w < portfolios.timestamps.size(); ++w) {
    const auto row = static_cast<Index>(w);
    for (const auto& [name, members] : {std::pair{"low", &portfolios.low[w]}, std::pair{"high", &portfolios.high[w]}}) {
      for (Index c : *members) {
        out << io::csv_field(portfolios.timestamps[w]) << ',' << name << ','
            << io::csv_field(portfolios.assets[static_cast<std::size_t>(c)]) << ','
            << io::format_double(portfolios.volatility(row, c)) << '\n';
      }
    }
  }
}

void write_portfolio_returns(std::ostream& out, const VolPortfolios& portfolios) {
  const Eigen::VectorXd low = cumulative_capital(portfolios.low_returns.unaryExpr([](double r) {
    return std::isfinite(r) ? r : 0.0;
  }));
  const Eigen::VectorXd high = cumulative_capital(portfolios.high_returns.unaryExpr([](double r) {
    return std::isfinite(r) ? r : 0.0;
  }));
  out << "week,low_ret,high_ret,low_capital,high_capital\n";
  for (std::size_t w = 0; w < portfolios.timestamps.size(); ++w) {
    const auto row = static_cast<Index>(w);
    out << io::csv_field(portfolios.timestamps[w]) << ',' << na_or(portfolios.low_returns(row)) << ','
        << na_or(portfolios.high_returns(row)) << ',' << io::format_double(low(row + 1)) << ','
        << io::format_double(high(row + 1)) << '\n';
  }
}

void write_rolling_diagnostics(std::ostream& out, const RollingStudy& study) {
  out << "week,portfolio,model,selected,significant,alpha,alpha_p,adj_r2,prediction,realized,residual,gibs_dim,pca_dim,"
         "error\n";
  for (const auto& week : study.weeks) {
    for (std::size_t p = 0; p < study.portfolios.size(); ++p) {
      const auto emit = [&](const char* model, const PortfolioFit* fit) {
        out << io::csv_field(week.timestamp) << ',' << io::csv_field(study.portfolios[p]) << ',' << model << ',';
        if (fit) {
          const SelectionResult& s = fit->selection;
          out << io::csv_field(io::join(s.selected, ";")) << ',' << io::csv_field(io::join(s.significant, ";")) << ','
              << na_or(s.alpha) << ',' << na_or(s.alpha_p) << ',' << na_or(s.adj_r2) << ',' << na_or(fit->prediction)
              << ',';
        } else {
          out << ",,NA,NA,NA,NA,";
        }
        out << na_or(week.realized.size() ? week.realized(static_cast<Index>(p)) : kNaN) << ','
            << (fit ? na_or(fit->residual) : std::string("NA")) << ',' << week.gibs_dimension << ','
            << week.pca_dimension << ',' << io::csv_field(week.error) << '\n';
      };
      emit("gibs", p < week.gibs.size() ? &week.gibs[p] : nullptr);
      if (!week.fixed.empty() || !week.ok()) emit("fixed", p < week.fixed.size() ? &week.fixed[p] : nullptr);
    }
  }
}

void write_rolling_heatmap(std::ostream& out, const RollingStudy& study,
                           const std::map<std::string, std::string>& categories) {
  // portfolio -> half-year -> category -> significant picks
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> counts;
  std::map<std::string, std::map<std::string, double>> totals;
  for (const auto& week : study.weeks) {
    for (std::size_t p = 0; p < week.gibs.size(); ++p) {
      const std::string period = half_year(week.timestamp);
      auto& cell = counts[study.portfolios[p]][period];
      for (const auto& asset : week.gibs[p].selection.significant) {
        auto it = categories.find(asset);
        cell[it == categories.end() ? std::string("unclassified") : it->second] += 1.0;
        totals[study.portfolios[p]][period] += 1.0;
      }
    }
  }
  out << "portfolio,half_year,category,percent\n";
  for (const auto& [portfolio, periods] : counts) {
    for (const auto& [period, by_category] : periods) {
      const double total = totals[portfolio][period];
      for (const auto& [category, count] : by_category) {
        out << io::csv_field(portfolio) << ',' << period << ',' << io::csv_field(category) << ','
            << io::format_fixed(100.0 * count / total, 2) << '\n';
      }
    }
  }
}

}  // namespace amf
