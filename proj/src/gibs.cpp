#include "amf/gibs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "amf/cluster.hpp"
#include "amf/error.hpp"
#include "amf/io.hpp"
#include "amf/lasso.hpp"
#include "amf/parallel.hpp"

namespace amf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Index> finite_rows(const Eigen::VectorXd& y) {
  std::vector<Index> rows;
  for (Index t = 0; t < y.size(); ++t) {
    if (std::isfinite(y(t))) rows.push_back(t);
  }
  return rows;
}

double nan_mean(const Eigen::VectorXd& v) {
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

// OLS with intercept of y[rows] on the given window columns.
SelectionResult refit(const Eigen::VectorXd& y, const std::vector<Index>& rows, const BasisWindow& window,
                      std::vector<Index> columns, double sig_level, const std::string& security) {
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  SelectionResult result;
  result.security = security;
  result.selected_columns = columns;
  result.observations = static_cast<Index>(rows.size());
  if (static_cast<Index>(rows.size()) <= static_cast<Index>(columns.size()) + 1) {
    throw Error(ErrorCode::kDegenerateAfterSelection,
                security + ": " + std::to_string(rows.size()) + " rows for " + std::to_string(columns.size()) + " regressors");
  }
  const Eigen::MatrixXd X = window.X(rows, columns);
  result.fit = ols(X, y(rows), Intercept::kAdd);
  result.alpha = result.fit.coefficients(0);
  result.alpha_p = result.fit.p_values(0);
  result.adj_r2 = result.fit.adj_r2;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    result.selected.push_back(window.assets[static_cast<std::size_t>(columns[k])]);
    if (result.fit.p_values(static_cast<Index>(k) + 1) < sig_level) result.significant.push_back(result.selected.back());
  }
  return result;
}

struct LassoStage {
  LassoPath path;
  CvCurve curve;
};

LassoStage lasso_stage(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GibsConfig& config, double alpha) {
  LassoOptions options;
  options.alpha = alpha;
  LassoStage stage;
  stage.path = lasso_path(X, y, config.n_lambda, config.lambda_min_ratio, options);
  stage.curve = cross_validate(X, y, config.cv_folds, stage.path, config.seed, options);
  return stage;
}

std::vector<Index> support_columns(const Eigen::VectorXd& coefs, const std::vector<Index>& columns) {
  std::vector<Index> out;
  for (Index j = 0; j < coefs.size(); ++j) {
    if (coefs(j) != 0.0) out.push_back(columns[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

void GibsConfig::validate() const {
  auto fail = [](const std::string& message) { throw Error(ErrorCode::kConfig, message); };
  if (!(category_threshold >= 0.0 && category_threshold <= 1.0)) fail("category_threshold must lie in [0, 1]");
  if (!(global_threshold >= 0.0 && global_threshold <= 1.0)) fail("global_threshold must lie in [0, 1]");
  if (support_cap < 0) fail("support_cap must be non-negative");
  if (cv_folds < 2) fail("cv_folds must be at least 2");
  if (!(sig_level > 0.0 && sig_level < 1.0)) fail("sig_level must lie in (0, 1)");
  if (n_lambda < 2) fail("n_lambda must be at least 2");
  if (lambda_min_ratio < 0.0 || lambda_min_ratio >= 1.0) fail("lambda_min_ratio must lie in [0, 1)");
  for (const auto& [category, count] : category_counts) {
    if (count < 1) fail("prototype count for " + category + " must be positive");
  }
}

std::optional<Index> BasisWindow::column(std::string_view asset) const {
  for (std::size_t j = 0; j < assets.size(); ++j) {
    if (assets[j] == asset) return static_cast<Index>(j);
  }
  return std::nullopt;
}

BasisWindow window_from_panel(const ReturnsPanel& panel, const std::map<std::string, std::string>& categories,
                              const std::string& market, Index begin, Index end) {
  if (begin < 0 || end > panel.periods() || end - begin < 3) {
    throw Error(ErrorCode::kTooFewObservations, "basis window needs at least three rows inside the panel");
  }
  BasisWindow window;
  window.market = market;
  window.timestamps.assign(panel.timestamps.begin() + begin, panel.timestamps.begin() + end);
  std::vector<Index> keep;
  for (Index j = 0; j < panel.num_assets(); ++j) {
    if (!panel.mask.col(j).segment(begin, end - begin).all()) continue;
    auto it = categories.find(panel.assets[j]);
    if (it == categories.end()) throw Error(ErrorCode::kUnclassifiedEntity, "basis asset without category: " + panel.assets[j]);
    keep.push_back(j);
    window.assets.push_back(panel.assets[j]);
    window.categories.push_back(it->second);
  }
  if (!market.empty() && !window.column(market)) {
    throw Error(ErrorCode::kMissingMarketIndex, "market index '" + market + "' not observed in window " +
                                                    window.timestamps.front() + ".." + window.timestamps.back());
  }
  window.X = panel.values.middleRows(begin, end - begin)(Eigen::all, keep);
  return window;
}

BasisWindow excess_window(const BasisUniverse& universe, const RiskFreeSeries& rf, Index begin, Index end) {
  const RiskFreeSeries aligned = align_risk_free(rf, universe.panel.timestamps);
  return window_from_panel(excess_returns(universe.panel, aligned), universe.categories, universe.market_index, begin,
                           end);
}

Eigen::MatrixXd Orthogonalized::transform(const Eigen::MatrixXd& X) const {
  if (X.cols() != loadings.size()) throw Error(ErrorCode::kLengthMismatch, "transform expects the window's columns");
  Eigen::MatrixXd out = X;
  if (!market_column) return out;
  for (Index j = 0; j < X.cols(); ++j) {
    if (!protected_column[static_cast<std::size_t>(j)]) out.col(j) -= loadings(j) * X.col(*market_column);
  }
  return out;
}

Orthogonalized orthogonalize_universe(const BasisWindow& window, const std::vector<std::string>& protected_assets) {
  const Index P = window.X.cols();
  Orthogonalized orth;
  orth.X_tilde = window.X;
  orth.loadings = Eigen::VectorXd::Zero(P);
  orth.protected_column.assign(static_cast<std::size_t>(P), false);
  orth.dropped.assign(static_cast<std::size_t>(P), false);
  if (!window.market.empty()) {
    orth.market_column = window.column(window.market);
    if (!orth.market_column) throw Error(ErrorCode::kMissingMarketIndex, "market index not in window: " + window.market);
    orth.protected_column[static_cast<std::size_t>(*orth.market_column)] = true;
  }
  for (const auto& asset : protected_assets) {
    if (auto col = window.column(asset)) orth.protected_column[static_cast<std::size_t>(*col)] = true;
  }
  Eigen::VectorXd market;
  if (orth.market_column) {
    market = window.X.col(*orth.market_column);
    if (!(market.squaredNorm() > 0.0)) throw Error(ErrorCode::kZeroDirection, "market column is identically zero");
  }
  for (Index j = 0; j < P; ++j) {
    const auto slot = static_cast<std::size_t>(j);
    const Eigen::VectorXd original = window.X.col(j);
    if (orth.market_column && !orth.protected_column[slot]) {
      orth.loadings(j) = market.dot(original) / market.squaredNorm();
      orth.X_tilde.col(j) = project_out(original, market);
    }
    const Eigen::VectorXd& col = orth.X_tilde.col(j);
    const double spread = (col.array() - col.mean()).matrix().norm();
    if (!(spread > 1e-10 * std::max(original.norm(), 1e-300))) {
      orth.dropped[slot] = true;
      orth.warnings.push_back("dropped " + window.assets[slot] + ": no variation left after orthogonalization");
    }
  }
  return orth;
}

std::vector<Index> select_prototypes(const BasisWindow& window, const Orthogonalized& orth, const GibsConfig& config) {
  std::map<std::string, std::vector<Index>> groups;
  std::vector<Index> result;
  for (Index j = 0; j < window.X.cols(); ++j) {
    const auto slot = static_cast<std::size_t>(j);
    if (orth.dropped[slot]) continue;
    if (orth.protected_column[slot]) {
      result.push_back(j);
    } else {
      groups[window.categories[slot]].push_back(j);
    }
  }

  std::vector<Index> pooled;
  for (const auto& [category, columns] : groups) {
    if (columns.size() == 1) {
      pooled.push_back(columns.front());
      continue;
    }
    const Dendrogram dend = minimax_cluster(correlation_distance(Eigen::MatrixXd(orth.X_tilde(Eigen::all, columns))));
    auto override_count = config.category_counts.find(category);
    const auto clusters =
        override_count != config.category_counts.end()
            ? cut_to_count(dend, std::min<Index>(override_count->second, static_cast<Index>(columns.size())))
            : cut_by_threshold(dend, config.category_threshold);
    for (const auto& cluster : clusters) pooled.push_back(columns[static_cast<std::size_t>(cluster.prototype)]);
  }
  std::sort(pooled.begin(), pooled.end());

  if (pooled.size() > 1) {
    const Dendrogram dend = minimax_cluster(correlation_distance(Eigen::MatrixXd(orth.X_tilde(Eigen::all, pooled))));
    for (const auto& cluster : cut_by_threshold(dend, config.global_threshold)) {
      result.push_back(pooled[static_cast<std::size_t>(cluster.prototype)]);
    }
  } else {
    result.insert(result.end(), pooled.begin(), pooled.end());
  }
  std::sort(result.begin(), result.end());
  return result;
}

PreparedUniverse prepare_universe(BasisWindow window, const GibsConfig& config) {
  config.validate();
  PreparedUniverse prep;
  prep.orth = orthogonalize_universe(window, config.protected_assets);
  prep.prototypes = select_prototypes(window, prep.orth, config);
  for (const auto& factor : config.fixed_factors) {
    if (auto col = window.column(factor)) {
      prep.fixed.push_back(*col);
    } else {
      prep.warnings.push_back("fixed factor " + factor + " not observed in window");
    }
  }
  std::sort(prep.fixed.begin(), prep.fixed.end());
  prep.warnings.insert(prep.warnings.end(), prep.orth.warnings.begin(), prep.orth.warnings.end());
  prep.window = std::move(window);
  return prep;
}

double SelectionResult::coefficient(Index column) const {
  for (std::size_t k = 0; k < selected_columns.size(); ++k) {
    if (selected_columns[k] == column) return fit.coefficients(static_cast<Index>(k) + 1);
  }
  return 0.0;
}

SelectionResult gibs_select(const Eigen::VectorXd& y, const PreparedUniverse& prep, const GibsConfig& config,
                            const std::string& security) {
  if (y.size() != prep.window.X.rows()) throw Error(ErrorCode::kLengthMismatch, "response length differs from window");
  const auto rows = finite_rows(y);
  const Eigen::VectorXd y_rows = y(rows);
  std::vector<Index> selected;
  double lambda = kNaN;
  if (!prep.prototypes.empty() && config.support_cap > 0) {
    const Eigen::MatrixXd X_u = prep.orth.X_tilde(rows, prep.prototypes);
    const LassoStage stage = lasso_stage(X_u, y_rows, config, 1.0);
    const LambdaChoice choice = select_lambda_gibs(stage.curve, stage.path, config.support_cap);
    lambda = choice.lambda;
    selected = support_columns(stage.path.coefs.col(static_cast<Index>(choice.index)), prep.prototypes);
  }
  if (config.include_fixed_factors) selected.insert(selected.end(), prep.fixed.begin(), prep.fixed.end());
  SelectionResult result = refit(y, rows, prep.window, std::move(selected), config.sig_level, security);
  result.lambda = lambda;
  return result;
}

SelectionResult fixed_select(const Eigen::VectorXd& y, const BasisWindow& window, const std::vector<Index>& columns,
                             double sig_level, const std::string& security) {
  if (y.size() != window.X.rows()) throw Error(ErrorCode::kLengthMismatch, "response length differs from window");
  return refit(y, finite_rows(y), window, columns, sig_level, security);
}

std::vector<SelectionResult> gibs_run(const ReturnsPanel& securities_window, const PreparedUniverse& prep,
                                      const GibsConfig& config) {
  if (securities_window.periods() != prep.window.X.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "securities window and basis window differ in length");
  }
  std::vector<SelectionResult> results(static_cast<std::size_t>(securities_window.num_assets()));
  parallel_for(results.size(), [&](std::size_t i) {
    const auto& id = securities_window.assets[i];
    try {
      results[i] = gibs_select(securities_window.values.col(static_cast<Index>(i)), prep, config, id);
    } catch (const Error& e) {
      results[i] = SelectionResult{};
      results[i].security = id;
      results[i].error = e.what();
    }
  });
  return results;
}

double holdout_r2(const SelectionResult& result, const Eigen::MatrixXd& X_holdout, const Eigen::VectorXd& y_holdout,
                  double train_mean) {
  if (!result.ok()) return kNaN;
  std::vector<Index> rows;
  for (Index t = 0; t < y_holdout.size(); ++t) {
    bool usable = std::isfinite(y_holdout(t));
    for (Index c : result.selected_columns) usable = usable && std::isfinite(X_holdout(t, c));
    if (usable) rows.push_back(t);
  }
  if (rows.empty()) return kNaN;
  const Eigen::VectorXd predicted = result.fit.predict(X_holdout(rows, result.selected_columns));
  const Eigen::VectorXd realized = y_holdout(rows);
  try {
    return out_of_sample_r2(predicted, realized, Eigen::VectorXd::Constant(realized.size(), train_mean));
  } catch (const Error&) {
    return kNaN;
  }
}

SelectionSummary summarize_selection(const std::vector<SelectionResult>& results,
                                     const std::map<std::string, std::string>& security_classes,
                                     const std::map<std::string, std::string>& basis_categories) {
  SelectionSummary summary;
  std::set<std::string> categories;
  for (const auto& [asset, category] : basis_categories) categories.insert(category);
  std::set<std::string> classes;
  for (const auto& [security, cls] : security_classes) classes.insert(cls);
  summary.categories.assign(categories.begin(), categories.end());
  summary.classes.assign(classes.begin(), classes.end());
  auto index_of = [](const std::vector<std::string>& labels, const std::string& label) {
    return static_cast<Index>(std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
  };
  summary.counts = Eigen::MatrixXi::Zero(static_cast<Index>(categories.size()), static_cast<Index>(classes.size()));
  std::set<std::string> union_selected;
  double selected = 0.0;
  double significant = 0.0;
  for (const auto& result : results) {
    if (!result.ok()) continue;
    auto cls = security_classes.find(result.security);
    if (cls == security_classes.end()) throw Error(ErrorCode::kUnclassifiedEntity, "security without class: " + result.security);
    const Index d = index_of(summary.classes, cls->second);
    for (const auto& asset : result.selected) {
      if (!basis_categories.contains(asset)) throw Error(ErrorCode::kUnclassifiedEntity, "basis asset without category: " + asset);
      union_selected.insert(asset);
    }
    for (const auto& asset : result.significant) {
      summary.counts(index_of(summary.categories, basis_categories.at(asset)), d) += 1;
    }
    selected += static_cast<double>(result.selected.size());
    significant += static_cast<double>(result.significant.size());
    ++summary.securities;
  }
  if (summary.securities > 0) {
    summary.avg_selected = selected / static_cast<double>(summary.securities);
    summary.avg_significant = significant / static_cast<double>(summary.securities);
  }
  summary.union_selected = static_cast<Index>(union_selected.size());
  summary.proportions = summary.counts.cast<double>();
  for (Index d = 0; d < summary.proportions.cols(); ++d) {
    const double total = summary.proportions.col(d).sum();
    if (total > 0.0) summary.proportions.col(d) /= total;
  }
  return summary;
}

std::string method_label(Method method, double alpha) {
  switch (method) {
    case Method::kFixed: return "FF5";
    case Method::kGibs: return "GIBS";
    case Method::kGibsFixed: return "GIBS+FF5";
    case Method::kLassoCv: return "LASSO";
    case Method::kElasticNet: return "ENet(" + io::format_fixed(alpha, 2) + ")";
    case Method::kRidge: return "Ridge";
  }
  return "unknown";
}

const MethodSummary* ComparisonTable::find(std::string_view label) const {
  for (const auto& row : rows) {
    if (row.label == label) return &row;
  }
  return nullptr;
}

ComparisonTable compare_methods(const ReturnsPanel& securities, const BasisUniverse& universe, const RiskFreeSeries& rf,
                                const GibsConfig& config, const CompareSpec& spec) {
  config.validate();
  if (securities.timestamps != universe.panel.timestamps) {
    throw Error(ErrorCode::kLengthMismatch, "securities and basis panels use different periods");
  }
  if (!(spec.train_begin >= 0 && spec.train_begin < spec.train_end && spec.train_end < spec.holdout_end &&
        spec.holdout_end <= securities.periods())) {
    throw Error(ErrorCode::kInvalidArgument, "comparison split must satisfy begin < train_end < holdout_end <= T");
  }
  const RiskFreeSeries aligned = align_risk_free(rf, securities.timestamps);
  const ReturnsPanel sec_excess = excess_returns(securities, aligned);
  const ReturnsPanel basis_excess = excess_returns(universe.panel, aligned);

  const PreparedUniverse prep = prepare_universe(
      window_from_panel(basis_excess, universe.categories, universe.market_index, spec.train_begin, spec.train_end),
      config);
  std::vector<Index> window_to_panel;
  for (const auto& asset : prep.window.assets) window_to_panel.push_back(*basis_excess.asset_index(asset));
  const Index H = spec.holdout_end - spec.train_end;
  const Eigen::MatrixXd X_hold = basis_excess.values.middleRows(spec.train_end, H)(Eigen::all, window_to_panel);
  const Eigen::MatrixXd X_hold_tilde = prep.orth.transform(X_hold);

  // Expand the method list so each elastic-net alpha gets its own row.
  struct Row {
    Method method;
    double alpha;
  };
  std::vector<Row> plan;
  for (Method m : spec.methods) {
    if (m == Method::kElasticNet) {
      for (double a : spec.enet_alphas) plan.push_back({m, a});
    } else {
      plan.push_back({m, 1.0});
    }
  }
  const auto N = static_cast<std::size_t>(securities.num_assets());
  const auto R = plan.size();
  Eigen::MatrixXd sel = Eigen::MatrixXd::Constant(static_cast<Index>(N), static_cast<Index>(R), kNaN);
  Eigen::MatrixXd sig = sel, adj = sel, oos = sel;

  GibsConfig with_fixed = config;
  with_fixed.include_fixed_factors = true;
  GibsConfig without_fixed = config;
  without_fixed.include_fixed_factors = false;

  parallel_for(N, [&](std::size_t i) {
    const auto row = static_cast<Index>(i);
    const Eigen::VectorXd y_train = sec_excess.values.col(row).segment(spec.train_begin, spec.train_end - spec.train_begin);
    const Eigen::VectorXd y_hold = sec_excess.values.col(row).segment(spec.train_end, H);
    const auto rows = finite_rows(y_train);
    if (rows.size() < 3) return;
    const Eigen::VectorXd y_rows = y_train(rows);
    const double train_mean = y_rows.mean();
    const Eigen::MatrixXd X_u = prep.orth.X_tilde(rows, prep.prototypes);

    std::optional<LassoStage> lasso;
    auto record = [&](std::size_t r, const SelectionResult& result) {
      const auto c = static_cast<Index>(r);
      sel(row, c) = static_cast<double>(result.selected.size());
      sig(row, c) = static_cast<double>(result.significant.size());
      adj(row, c) = result.adj_r2;
      oos(row, c) = holdout_r2(result, X_hold, y_hold, train_mean);
    };
    for (std::size_t r = 0; r < R; ++r) {
      try {
        switch (plan[r].method) {
          case Method::kFixed:
            if (prep.fixed.empty()) throw Error(ErrorCode::kConfig, "FF5 baseline needs fixed_factors");
            record(r, fixed_select(y_train, prep.window, prep.fixed, config.sig_level));
            break;
          case Method::kGibs:
            record(r, gibs_select(y_train, prep, without_fixed));
            break;
          case Method::kGibsFixed:
            record(r, gibs_select(y_train, prep, with_fixed));
            break;
          case Method::kLassoCv:
          case Method::kElasticNet: {
            if (prep.prototypes.empty()) {
              record(r, fixed_select(y_train, prep.window, {}, config.sig_level));
              break;
            }
            const bool plain = plan[r].method == Method::kLassoCv;
            if (plain && !lasso) lasso = lasso_stage(X_u, y_rows, config, 1.0);
            const LassoStage stage = plain ? *lasso : lasso_stage(X_u, y_rows, config, plan[r].alpha);
            const auto coefs = stage.path.coefs.col(static_cast<Index>(stage.curve.index_min));
            record(r, fixed_select(y_train, prep.window, support_columns(coefs, prep.prototypes), config.sig_level));
            break;
          }
          case Method::kRidge: {
            if (prep.prototypes.empty()) break;
            const LassoStage stage = lasso_stage(X_u, y_rows, config, 0.0);
            const auto l = static_cast<Index>(stage.curve.index_min);
            const Eigen::VectorXd beta = stage.path.coefs.col(l);
            const double b0 = stage.path.intercepts(l);
            const auto c = static_cast<Index>(r);
            sel(row, c) = static_cast<double>(prep.prototypes.size());
            std::vector<Index> hold_rows;
            for (Index t = 0; t < H; ++t) {
              if (std::isfinite(y_hold(t)) && X_hold_tilde.row(t)(prep.prototypes).allFinite()) hold_rows.push_back(t);
            }
            if (!hold_rows.empty()) {
              const Eigen::VectorXd predicted = (X_hold_tilde(hold_rows, prep.prototypes) * beta).array() + b0;
              const Eigen::VectorXd realized = y_hold(hold_rows);
              oos(row, c) = out_of_sample_r2(predicted, realized, Eigen::VectorXd::Constant(realized.size(), train_mean));
            }
            break;
          }
        }
      } catch (const Error&) {
        // The cell stays NaN and is left out of the averages.
      }
    }
  });

  ComparisonTable table;
  table.securities = securities.assets;
  table.dimension = prep.dimension();
  for (std::size_t r = 0; r < R; ++r) {
    const auto c = static_cast<Index>(r);
    MethodSummary summary;
    summary.label = method_label(plan[r].method, plan[r].alpha);
    summary.avg_selected = nan_mean(sel.col(c));
    summary.avg_significant = nan_mean(sig.col(c));
    summary.avg_adj_r2 = nan_mean(adj.col(c));
    summary.avg_oos_r2 = nan_mean(oos.col(c));
    summary.oos_r2 = oos.col(c);
    table.rows.push_back(std::move(summary));
  }
  return table;
}

Index gibs_dimension(const BasisWindow& window, const GibsConfig& config) {
  return prepare_universe(window, config).dimension();
}

Index pca_dimension(const Eigen::MatrixXd& X, double variance_frac) {
  if (!(variance_frac > 0.0 && variance_frac <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "variance_frac must lie in (0, 1]");
  }
  if (X.rows() < 3 || X.cols() == 0) throw Error(ErrorCode::kTooFewObservations, "PCA needs at least three rows");
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  const double total = values.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroVariance, "basis has no variance");
  double running = 0.0;
  for (Index k = 0; k < values.size(); ++k) {
    running += values(k);
    if (running >= variance_frac * total * (1.0 - 1e-12)) return k + 1;
  }
  return values.size();
}

void write_selection_table(std::ostream& out, const std::vector<SelectionResult>& results) {
  out << "security,selected,significant,adj_r2,oos_r2\n";
  for (const auto& r : results) {
    out << io::csv_field(r.security) << ',' << io::csv_field(io::join(r.selected, ";")) << ','
        << io::csv_field(io::join(r.significant, ";")) << ',';
    out << (r.ok() && std::isfinite(r.adj_r2) ? io::format_double(r.adj_r2) : "NA") << ',';
    out << (std::isfinite(r.oos_r2) ? io::format_double(r.oos_r2) : "NA") << '\n';
  }
}

void write_summary_matrix(std::ostream& out, const SelectionSummary& summary, bool proportions) {
  out << "category";
  for (const auto& cls : summary.classes) out << ',' << io::csv_field(cls);
  out << '\n';
  for (std::size_t b = 0; b < summary.categories.size(); ++b) {
    out << io::csv_field(summary.categories[b]);
    for (std::size_t d = 0; d < summary.classes.size(); ++d) {
      const auto i = static_cast<Index>(b);
      const auto j = static_cast<Index>(d);
      out << ',' << (proportions ? io::format_double(summary.proportions(i, j)) : std::to_string(summary.counts(i, j)));
    }
    out << '\n';
  }
}

void write_comparison_table(std::ostream& out, const ComparisonTable& table) {
  const MethodSummary* base = table.find("FF5");
  auto change = [&](double value, double reference) {
    if (!base || !std::isfinite(value) || !std::isfinite(reference) || reference == 0.0) return std::string("NA");
    return io::format_fixed(100.0 * (value - reference) / std::abs(reference), 2);
  };
  out << "model,select,signif,adj_r2,adj_r2_change_pct,oos_r2,oos_r2_change_pct\n";
  for (const auto& row : table.rows) {
    out << io::csv_field(row.label) << ',' << io::format_fixed(row.avg_selected, 2) << ','
        << io::format_fixed(row.avg_significant, 2) << ',' << io::format_fixed(row.avg_adj_r2, 3) << ','
        << change(row.avg_adj_r2, base ? base->avg_adj_r2 : kNaN) << ',' << io::format_fixed(row.avg_oos_r2, 3) << ','
        << change(row.avg_oos_r2, base ? base->avg_oos_r2 : kNaN) << '\n';
  }
}

}  // namespace amf
