#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library's solvers.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;

/// One-sample Kolmogorov-Smirnov p-value against U(0, 1) using the
/// asymptotic Kolmogorov series with the Stephens small-sample correction.
double ks_uniform_pvalue(std::vector<double> sample);

/// (1/2n)||y - b0 - X b||^2 + lambda ||b||_1.
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double b0,
                       double lambda);

struct LatticeResult {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double objective = 0.0;
};

/// Exhaustive lattice search for the intercept LASSO with p <= 3. The grid
/// is scanned coarse to fine (0.1, 0.01, 0.001) around the incumbent; the
/// intercept is profiled out exactly.
LatticeResult lattice_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double bound = 5.0);

struct BruteMerge {
  std::vector<Index> members;  // sorted union
  double height = 0.0;
  Index prototype = 0;
};

/// Minimax linkage by full recomputation: at each step every pair of
/// current clusters is scored by the minimax radius of its union. Ties go
/// to the pair with the smaller (lower min, higher min) member indices.
std::vector<BruteMerge> brute_minimax(const Eigen::MatrixXd& d);

/// Step-up q-values by scanning every rank at or above each p-value.
Eigen::VectorXd step_up_qvalues(const Eigen::VectorXd& p, bool dependence_adjusted);

/// Normal-equation OLS in long double: coefficients and residual variance.
struct OlsOracle {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double rss = 0.0;
};
OlsOracle ols_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Student-t two-sided p-value and F survival from Boost.Math.
double t_two_sided(double t, double df);
double f_survival(double f, double df1, double df2);

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng);

/// Rejection-rate summary used by size and power checks.
struct Rate {
  Index rejections = 0;
  Index trials = 0;
  double value() const { return trials ? static_cast<double>(rejections) / static_cast<double>(trials) : 0.0; }
};

}  // namespace oracle
