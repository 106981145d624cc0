#pragma once

#include <Eigen/Dense>

namespace amf {

enum class Intercept { kNone, kAdd };

/// Ordinary least squares with classical inference.
///
/// When fitted with Intercept::kAdd the constant column is prepended, so
/// coefficient 0 is the intercept. The design and response are retained to
/// let nested_f_test verify nesting.
struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  Eigen::MatrixXd cov_unscaled;  // (X'X)^-1
  double rss = 0.0;
  double tss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double sigma2 = 0.0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  Eigen::Index df_resid = 0;
  bool intercept_included = false;

  Eigen::MatrixXd design;
  Eigen::VectorXd response;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Throws kTooFewObservations when n <= k and kRankDeficient when a QR
/// pivot falls below 1e-10 times the largest column norm.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Intercept intercept = Intercept::kNone);

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X);

/// Residual of regressing `target` on `direction` without intercept.
Eigen::VectorXd project_out(const Eigen::VectorXd& target, const Eigen::VectorXd& direction);

struct FTestResult {
  double f_stat = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
};

/// F = ((RSS_r - RSS_f) / df1) / (RSS_f / df2) with df1 = k_f - k_r and
/// df2 = n - k_f.
FTestResult nested_f_test(const OlsFit& restricted, const OlsFit& full);

/// F statistic from residual sums of squares with possibly fractional df.
FTestResult f_test_from_rss(double rss_restricted, double rss_full, double df1, double df2);

struct WelchResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 0.5;
};

/// One-sided Welch test of H1: mean(a) > mean(b). Two zero-variance samples
/// give t = 0 and p = 0.5.
WelchResult welch_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// 1 - SSE(predicted) / SSE(baseline).
double out_of_sample_r2(const Eigen::VectorXd& predicted, const Eigen::VectorXd& realized,
                        const Eigen::VectorXd& baseline);

}  // namespace amf
