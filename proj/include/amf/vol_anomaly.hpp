#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amf/gibs.hpp"
#include "amf/panel.hpp"
#include "amf/regression.hpp"

namespace amf {

struct VolOptions {
  Index lookback = 52;
  /// Observed weeks required inside the lookback.
  Index min_obs = 42;
  double quantile = 0.25;
  Index min_eligible = 8;
  /// When set, only these assets may enter a portfolio.
  std::optional<std::set<std::string>> eligible;
};

/// Weekly volatility sorts. Week w forms on the `lookback` rows before
/// timestamps[w] and holds over timestamps[w].
struct VolPortfolios {
  std::vector<std::string> assets;
  std::vector<std::string> timestamps;
  std::vector<std::vector<Index>> low;
  std::vector<std::vector<Index>> high;
  Eigen::VectorXd low_returns;
  Eigen::VectorXd high_returns;
  /// Formation volatility per week and asset, NaN when ineligible.
  Eigen::MatrixXd volatility;

  /// Two-column panel ("low", "high") of raw portfolio returns.
  ReturnsPanel as_panel() const;
};

/// Each leg holds floor(quantile * eligible) names, ranked by (volatility,
/// column). Equal weights over the members observed in the holding week.
VolPortfolios form_vol_portfolios(const ReturnsPanel& panel, const RiskFreeSeries& rf, const VolOptions& options = {});

/// value(0) = 1, value(t + 1) = value(t) * (1 + r(t)).
Eigen::VectorXd cumulative_capital(const Eigen::VectorXd& returns);

/// One-sided Welch test that the low portfolio's capital path lies above
/// the high one's.
WelchResult anomaly_test(const Eigen::VectorXd& low_returns, const Eigen::VectorXd& high_returns);

/// Stacked ANOVA: Z = [Y_low; Y_high] on W_S against W_S plus the
/// high-half interactions, both without intercept. S = S_low u S_high.
FTestResult loading_difference_test(const Eigen::VectorXd& y_low, const Eigen::VectorXd& y_high,
                                    const Eigen::MatrixXd& X, const std::vector<Index>& s_low,
                                    const std::vector<Index>& s_high);

enum class FactorModel { kGibs, kFixed };
enum class AnomalyMode { kExcess, kResidualFixed, kResidualGibs };

std::string to_string(FactorModel model);
std::string to_string(AnomalyMode mode);
AnomalyMode parse_anomaly_mode(std::string_view text);

struct RollingOptions {
  Index window = 156;
  Index horizon_begin = 0;
  Index horizon_end = 0;
  GibsConfig gibs;
  bool run_fixed = true;
  bool dimensions = true;
};

struct PortfolioFit {
  SelectionResult selection;
  double prediction = std::numeric_limits<double>::quiet_NaN();  // with intercept
  double residual = std::numeric_limits<double>::quiet_NaN();    // without intercept
};

struct RollingWeek {
  std::string timestamp;
  Eigen::VectorXd realized;    // portfolio excess returns this week
  Eigen::VectorXd train_mean;  // mean excess return over the window
  std::vector<PortfolioFit> gibs;
  std::vector<PortfolioFit> fixed;
  Index gibs_dimension = 0;
  Index pca_dimension = 0;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct RollingStudy {
  std::vector<std::string> portfolios;
  std::vector<RollingWeek> weeks;

  /// Per-week residuals of one portfolio, NaN where unavailable.
  Eigen::VectorXd residuals(Index portfolio, FactorModel model) const;
  Eigen::VectorXd excess(Index portfolio) const;
  /// Pooled out-of-sample R^2 over the horizon against the window means.
  double oos_r2(Index portfolio, FactorModel model) const;
};

/// Re-estimates both models on the trailing window for every week of
/// [horizon_begin, horizon_end). `portfolios` holds raw returns on the
/// universe's periods.
RollingStudy rolling_study(const ReturnsPanel& portfolios, const BasisUniverse& universe, const RiskFreeSeries& rf,
                           const RollingOptions& options);

/// Welch test on the capital paths of the chosen series. Weeks where either
/// series is missing are skipped.
WelchResult anomaly_test(const RollingStudy& study, AnomalyMode mode, Index low = 0, Index high = 1);

void write_memberships(std::ostream& out, const VolPortfolios& portfolios);
void write_portfolio_returns(std::ostream& out, const VolPortfolios& portfolios);
void write_rolling_diagnostics(std::ostream& out, const RollingStudy& study);
/// Long format `portfolio,half_year,category,percent`: share of significant
/// picks per basis category within each half-year, x100.
void write_rolling_heatmap(std::ostream& out, const RollingStudy& study,
                           const std::map<std::string, std::string>& categories);

}  // namespace amf
