#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace amf {

/// Coordinate-descent settings for the penalized least-squares solver.
///
/// The objective is (1/2n)||y - b0 - X b||^2 + lambda * (alpha ||b||_1 +
/// (1 - alpha)/2 ||b||^2). With `standardize` the columns are scaled to unit
/// (1/n) standard deviation internally; coefficients are always reported on
/// the original scale.
struct LassoOptions {
  double alpha = 1.0;
  bool standardize = true;
  bool fit_intercept = true;
  double tolerance = 1e-9;
  int max_sweeps = 10000;
  /// When set, the objective after every sweep is appended here.
  std::vector<double>* objective_trace = nullptr;
};

struct LassoFit {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  int sweeps = 0;
};

/// Throws kDidNotConverge when max_sweeps is exhausted.
LassoFit lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& options = {});

/// Smallest lambda at which every coefficient is zero.
double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoOptions& options = {});

struct LassoPath {
  std::vector<double> lambdas;
  Eigen::MatrixXd coefs;  // p x L, original scale
  Eigen::VectorXd intercepts;
  std::vector<int> support_sizes;

  std::size_t size() const { return lambdas.size(); }
};

/// Log-spaced grid from lambda_max down to lambda_max * lambda_min_ratio
/// with warm starts. A non-positive ratio picks 1e-3 when n > p and 1e-2
/// otherwise.
LassoPath lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambda = 100,
                     double lambda_min_ratio = 0.0, const LassoOptions& options = {});

/// Path over a caller-supplied descending grid.
LassoPath lasso_path_on_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const std::vector<double>& lambdas, const LassoOptions& options = {});

struct CvCurve {
  std::vector<double> lambdas;
  Eigen::VectorXd mean_error;
  Eigen::VectorXd se_error;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
};

/// K-fold CV over the path's grid. Fold of observation perm[i] is i mod K
/// for a permutation drawn from `seed`.
CvCurve cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds, const LassoPath& path,
                       std::uint64_t seed, const LassoOptions& options = {});

/// Fold label per observation, as used by cross_validate.
std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed);

struct LambdaChoice {
  double lambda = 0.0;
  std::size_t index = 0;
};

/// max(lambda_1se, smallest grid lambda with support <= cap), moved up the
/// grid if needed so the chosen support never exceeds the cap.
LambdaChoice select_lambda_gibs(const CvCurve& curve, const LassoPath& path, int cap);

/// Closed-form ridge on the standardized design, reported on the original
/// scale: minimizes (1/2n)||y - b0 - X b||^2 + lambda/2 ||b||^2.
LassoFit ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace amf
