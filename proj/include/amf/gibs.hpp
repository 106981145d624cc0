#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amf/panel.hpp"
#include "amf/regression.hpp"

namespace amf {

struct GibsConfig {
  double category_threshold = 0.5;
  double global_threshold = 0.5;
  int support_cap = 20;
  int cv_folds = 10;
  double sig_level = 0.05;
  /// Never projected or clustered away. The market index is always protected.
  std::vector<std::string> protected_assets;
  /// The fixed factor set used by the FF5 baseline and the GIBS + FF5 variant.
  std::vector<std::string> fixed_factors;
  bool include_fixed_factors = false;
  /// Optional per-category prototype counts replacing the threshold cut.
  std::map<std::string, Index> category_counts;
  std::uint64_t seed = 1;
  int n_lambda = 100;
  double lambda_min_ratio = 0.0;

  /// Throws kConfig.
  void validate() const;
};

/// Basis regressors over one estimation window, fully observed. `market`
/// may be empty, in which case no column is projected out.
struct BasisWindow {
  std::vector<std::string> timestamps;
  std::vector<std::string> assets;
  std::vector<std::string> categories;
  std::string market;
  Eigen::MatrixXd X;

  std::optional<Index> column(std::string_view asset) const;
};

/// Rows [begin, end) of `panel`; assets with a gap inside the window are
/// left out. Every kept asset must have a category.
BasisWindow window_from_panel(const ReturnsPanel& panel, const std::map<std::string, std::string>& categories,
                              const std::string& market, Index begin, Index end);

/// Basis excess returns over rows [begin, end).
BasisWindow excess_window(const BasisUniverse& universe, const RiskFreeSeries& rf, Index begin, Index end);

/// Market-orthogonalized basis with the projection loadings kept so other
/// rows can be transformed identically.
struct Orthogonalized {
  Eigen::MatrixXd X_tilde;
  Eigen::VectorXd loadings;
  std::optional<Index> market_column;
  std::vector<bool> protected_column;
  std::vector<bool> dropped;
  std::vector<std::string> warnings;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

/// Replaces every unprotected column by its residual on the market column
/// (no intercept). Columns that vanish or become constant are marked dropped.
Orthogonalized orthogonalize_universe(const BasisWindow& window, const std::vector<std::string>& protected_assets);

/// Two-stage prototype selection: per-category cut, then a pooled cut. The
/// result holds window column indices, ascending, protected columns included.
std::vector<Index> select_prototypes(const BasisWindow& window, const Orthogonalized& orth, const GibsConfig& config);

/// Everything shared by the per-security selections of one window.
struct PreparedUniverse {
  BasisWindow window;
  Orthogonalized orth;
  std::vector<Index> prototypes;
  std::vector<Index> fixed;
  std::vector<std::string> warnings;

  Index dimension() const { return static_cast<Index>(prototypes.size()); }
};

PreparedUniverse prepare_universe(BasisWindow window, const GibsConfig& config);

struct SelectionResult {
  std::string security;
  std::vector<Index> selected_columns;  // window columns, ascending
  std::vector<std::string> selected;
  std::vector<std::string> significant;
  OlsFit fit;  // intercept first, then selected columns in order
  double alpha = 0.0;
  double alpha_p = 1.0;
  double lambda = 0.0;
  double adj_r2 = 0.0;
  double oos_r2 = std::numeric_limits<double>::quiet_NaN();
  Index observations = 0;
  std::string error;

  bool ok() const { return error.empty(); }
  /// Refit coefficient of a window column, 0 when not selected.
  double coefficient(Index column) const;
};

/// LASSO on the prototype columns of the orthogonalized basis with the
/// capped 1se lambda, then OLS with intercept on the original columns. Rows
/// where y is NaN are dropped.
SelectionResult gibs_select(const Eigen::VectorXd& y, const PreparedUniverse& prep, const GibsConfig& config,
                            const std::string& security = {});

/// OLS with intercept of y on fixed window columns, reported like a selection.
SelectionResult fixed_select(const Eigen::VectorXd& y, const BasisWindow& window, const std::vector<Index>& columns,
                             double sig_level, const std::string& security = {});

/// Runs gibs_select for every security column (rows aligned with the window).
std::vector<SelectionResult> gibs_run(const ReturnsPanel& securities_window, const PreparedUniverse& prep,
                                      const GibsConfig& config);

/// Out-of-sample R^2 of a refit on holdout rows. `X_holdout` has the
/// window's columns; the baseline is the training mean of y.
double holdout_r2(const SelectionResult& result, const Eigen::MatrixXd& X_holdout, const Eigen::VectorXd& y_holdout,
                  double train_mean);

struct SelectionSummary {
  std::vector<std::string> categories;  // rows
  std::vector<std::string> classes;     // columns
  Eigen::MatrixXi counts;
  Eigen::MatrixXd proportions;
  double avg_selected = 0.0;
  double avg_significant = 0.0;
  /// Distinct basis assets selected by at least one security.
  Index union_selected = 0;
  Index securities = 0;
};

/// a(b, d) = number of significant picks from category b over securities of
/// class d; proportions are column-normalized, zero columns stay zero.
SelectionSummary summarize_selection(const std::vector<SelectionResult>& results,
                                     const std::map<std::string, std::string>& security_classes,
                                     const std::map<std::string, std::string>& basis_categories);

enum class Method { kFixed, kGibs, kGibsFixed, kLassoCv, kElasticNet, kRidge };

struct CompareSpec {
  Index train_begin = 0;
  Index train_end = 0;
  Index holdout_end = 0;
  std::vector<Method> methods{Method::kFixed, Method::kGibs, Method::kGibsFixed, Method::kLassoCv,
                              Method::kElasticNet, Method::kRidge};
  std::vector<double> enet_alphas{0.75, 0.5, 0.25};
};

struct MethodSummary {
  std::string label;
  double avg_selected = 0.0;
  double avg_significant = 0.0;  // NaN when not defined
  double avg_adj_r2 = 0.0;       // NaN when not defined
  double avg_oos_r2 = 0.0;
  Eigen::VectorXd oos_r2;  // per security, NaN on failure
};

struct ComparisonTable {
  std::vector<MethodSummary> rows;
  std::vector<std::string> securities;
  Index dimension = 0;

  const MethodSummary* find(std::string_view label) const;
};

/// Fits every method on the training rows and scores it on the holdout rows
/// that follow. Securities are raw returns; excess returns are formed here.
ComparisonTable compare_methods(const ReturnsPanel& securities, const BasisUniverse& universe, const RiskFreeSeries& rf,
                                const GibsConfig& config, const CompareSpec& spec);

std::string method_label(Method method, double alpha = 0.0);

/// |U| for the given window.
Index gibs_dimension(const BasisWindow& window, const GibsConfig& config);

/// Smallest k whose leading covariance eigenvalues explain variance_frac.
Index pca_dimension(const Eigen::MatrixXd& X, double variance_frac = 0.9);

void write_selection_table(std::ostream& out, const std::vector<SelectionResult>& results);
void write_summary_matrix(std::ostream& out, const SelectionSummary& summary, bool proportions);
void write_comparison_table(std::ostream& out, const ComparisonTable& table);

}  // namespace amf
