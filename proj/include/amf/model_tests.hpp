#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amf/gibs.hpp"
#include "amf/panel.hpp"
#include "amf/regression.hpp"

namespace amf {

/// Batch p-values with both FDR adjustments. NaN p-values mark entities
/// without a test; they get NaN q-values and still count in the denominator
/// of reject_frac.
struct TestReport {
  std::string method;
  std::vector<std::string> entities;
  Eigen::VectorXd p_values;
  Eigen::VectorXd q_bh;
  Eigen::VectorXd q_bhy;

  /// Share of entities with q < alpha.
  double reject_frac(double alpha = 0.05, bool use_bhy = true) const;
};

TestReport make_report(std::string method, std::vector<std::string> entities, const Eigen::VectorXd& p_values);
void write_report(std::ostream& out, const TestReport& report);

struct InterceptResult {
  double alpha = 0.0;
  double p_value = 1.0;
};

/// OLS of y on [1, X]; two-sided t-test of the intercept.
InterceptResult intercept_test(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

/// Step 1: no-intercept OLS of price levels on V. Step 2: intercept-only
/// OLS on the step-1 residuals.
InterceptResult intercept_test_two_step(const Eigen::VectorXd& y_prices, const Eigen::MatrixXd& V);

struct BacktestOptions {
  double quantile = 0.5;
  double sig_level = 0.05;
  /// Rank all securities by alpha instead of ranking within the significant set.
  bool global_rank = false;
};

struct BacktestResult {
  Eigen::VectorXd long_returns;   // NaN on flagged weeks
  Eigen::VectorXd short_returns;  // NaN on flagged weeks
  Eigen::VectorXd value_change;
  std::vector<bool> flagged;
  std::vector<std::vector<Index>> long_members;
  std::vector<std::vector<Index>> short_members;
  double terminal_value = 0.0;
  /// One-sided t-test of a positive mean weekly value change.
  double mean_p_value = 1.0;
};

/// Weekly zero-investment portfolio: $1 long in the top quantile of
/// significantly positive alphas, $1 short in the bottom quantile of
/// significantly negative alphas. Row w of `next_returns` is realized after
/// the alphas of row w are estimated.
BacktestResult alpha_backtest(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& alpha_p,
                              const Eigen::MatrixXd& next_returns, const BacktestOptions& options = {});

struct AlphaStream {
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd alpha_p;
  Eigen::MatrixXd next_returns;
};

/// Trailing-window intercept tests for every week in [first, last): each
/// security uses its own fixed basis columns.
AlphaStream rolling_alpha_stream(const Eigen::MatrixXd& y, const Eigen::MatrixXd& X,
                                 const std::vector<std::vector<Index>>& columns, Index window, Index first, Index last);

void write_backtest(std::ostream& out, const std::vector<std::string>& weeks, const BacktestResult& result);

/// h = 0 on the first ceil(n/2) rows and 1 afterwards.
Eigen::VectorXd half_indicator(Index n);

/// ANOVA of dy ~ dV against dy ~ dV + dV * h, both without intercept.
FTestResult time_invariance_linear(const Eigen::VectorXd& dy, const Eigen::MatrixXd& dV, const Eigen::VectorXd& h);

enum class ResidualUniverse { kNewOnly, kAllExceptSelected };

/// Second-half residual test. `second_half` holds the basis observed over
/// the second half; `candidates` lists the assets GIBS may add. Returns no
/// value when GIBS on the residuals selects nothing.
std::optional<FTestResult> residual_expansion_test(const Eigen::VectorXd& dy_second, const BasisWindow& second_half,
                                                   const std::vector<std::string>& selected,
                                                   const std::vector<std::string>& candidates,
                                                   const GibsConfig& config);

/// Clamped B-spline basis of `size` functions on [0, 1] with degree
/// min(3, size - 1), evaluated at `t`.
Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& t, int size);

struct VaryingCoefficientResult {
  FTestResult test;
  double edf = 0.0;
  double rss_null = 0.0;
  double rss_full = 0.0;
};

/// Penalized varying-coefficient fit beta_j(t) = sum_k theta_jk B_k(t) with
/// a first-difference penalty, compared with the constant-beta model by an
/// approximate F test on effective degrees of freedom.
VaryingCoefficientResult varying_coefficient_test(const Eigen::VectorXd& dy, const Eigen::MatrixXd& dV,
                                                  int basis_size = 6, double penalty = 1.0);

struct RiskPremium {
  std::string asset;
  double premium = 0.0;
  bool risk_factor = false;
};

/// Annualized mean excess return per selected column; flagged when
/// |premium| >= threshold.
std::vector<RiskPremium> risk_premium(const Eigen::MatrixXd& excess, const std::vector<std::string>& assets,
                                      const std::vector<Index>& selected, double threshold,
                                      double periods_per_year = 52.0);

/// Smallest |premium| among the reference assets, the usual threshold.
double reference_threshold(const Eigen::MatrixXd& excess, const std::vector<Index>& reference,
                           double periods_per_year = 52.0);

struct GridCell {
  int start_year = 0;
  int end_year = 0;
  double value = 0.0;
  bool failed = false;
};

/// Start-year x end-year results. A cell is populated when its window
/// spans at least min_len calendar years.
class PeriodGrid {
 public:
  PeriodGrid(int first_year, int last_year, int min_len);

  int first_year() const { return first_year_; }
  int last_year() const { return last_year_; }
  int min_len() const { return min_len_; }
  bool populated(int start_year, int end_year) const;
  Index populated_count() const;
  std::vector<GridCell> cells() const;

  double value(int start_year, int end_year) const;
  void set(int start_year, int end_year, double value, bool failed = false);

  /// Cells with end - start = k + min_len - 1.
  std::vector<GridCell> skew_diagonal(int k) const;
  /// Cells with start + end = year_sum, i.e. the same mid-year.
  std::vector<GridCell> anti_diagonal(int year_sum) const;

 private:
  int first_year_;
  int last_year_;
  int min_len_;
  Eigen::MatrixXd values_;
  MaskMatrix failed_;
};

/// Runs `cell` on the rows whose label year lies in each populated cell's
/// span. Failures mark the cell and the run continues.
PeriodGrid period_grid_run(const std::vector<std::string>& timestamps, int first_year, int last_year, int min_len,
                           const std::function<double(Index begin, Index end)>& cell);

/// rows = start year, columns = end year, values x100 to 2 dp.
void write_period_grid(std::ostream& out, const PeriodGrid& grid);

/// Price-difference view used by the time-invariance tests. The basis gets
/// an extra money-market column "MMA" built from the risk-free series.
struct DifferenceData {
  ReturnsPanel securities;      // Delta Y
  ReturnsPanel security_levels; // Y, row t = level after period t
  BasisUniverse basis;          // Delta V with MMA
  ReturnsPanel basis_levels;    // V with MMA
};

DifferenceData make_difference_data(const ReturnsPanel& securities, const BasisUniverse& universe,
                                    const RiskFreeSeries& rf);

enum class InvarianceTest { kIntercept, kLinear, kResidualExpansion, kVaryingCoefficient };

struct InvarianceOptions {
  GibsConfig gibs;
  ResidualUniverse residual_universe = ResidualUniverse::kNewOnly;
  int basis_size = 6;
  double penalty = 1.0;
  /// Use the fixed factors instead of GIBS selections.
  bool fixed_model = false;
};

/// Per-security p-values of one test on difference rows [begin, end).
TestReport invariance_report(const DifferenceData& data, InvarianceTest test, Index begin, Index end,
                             const InvarianceOptions& options);

std::string to_string(InvarianceTest test);

}  // namespace amf
