#include "amf/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "amf/error.hpp"
#include "amf/parallel.hpp"

namespace amf {
namespace {

// Centered and scaled copy of the problem. Columns with zero spread are
// kept at coefficient 0.
struct Standardized {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  Eigen::VectorXd col_sq;  // ||x_j||^2 / n on the working scale
  double y_mean = 0.0;
  std::vector<bool> usable;

  Standardized(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in, const LassoOptions& options) {
    if (X_in.rows() != y_in.size()) throw Error(ErrorCode::kLengthMismatch, "design rows differ from response length");
    if (X_in.rows() == 0) throw Error(ErrorCode::kTooFewObservations, "empty design");
    if (!X_in.allFinite() || !y_in.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite LASSO input");
    const double n = static_cast<double>(X_in.rows());
    const Eigen::Index p = X_in.cols();
    center = options.fit_intercept ? Eigen::VectorXd(X_in.colwise().mean().transpose()) : Eigen::VectorXd::Zero(p);
    y_mean = options.fit_intercept ? y_in.mean() : 0.0;
    X = X_in.rowwise() - center.transpose();
    y = y_in.array() - y_mean;
    scale = Eigen::VectorXd::Ones(p);
    col_sq.resize(p);
    usable.assign(static_cast<std::size_t>(p), true);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double ms = X.col(j).squaredNorm() / n;
      if (!(ms > 0.0)) {
        usable[static_cast<std::size_t>(j)] = false;
        scale(j) = 0.0;
        col_sq(j) = 0.0;
        X.col(j).setZero();
        continue;
      }
      if (options.standardize) {
        scale(j) = std::sqrt(ms);
        X.col(j) /= scale(j);
      }
      col_sq(j) = X.col(j).squaredNorm() / n;
    }
  }

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  double lambda_max(double alpha) const {
    double best = 0.0;
    for (Eigen::Index j = 0; j < p(); ++j) {
      if (usable[static_cast<std::size_t>(j)]) best = std::max(best, std::abs(X.col(j).dot(y)) / static_cast<double>(n()));
    }
    return best / std::max(alpha, 1e-3);
  }

  void to_original(const Eigen::VectorXd& scaled, Eigen::Ref<Eigen::VectorXd> beta, double& intercept) const {
    for (Eigen::Index j = 0; j < p(); ++j) beta(j) = scale(j) > 0.0 ? scaled(j) / scale(j) : 0.0;
    intercept = y_mean - center.dot(beta);
  }
};

class CoordinateDescent {
 public:
  CoordinateDescent(const Standardized& data, const LassoOptions& options) : data_(data), options_(options) {}

  // Minimizes at `lambda` starting from `beta` (working scale) in place.
  int solve(double lambda, Eigen::VectorXd& beta) const {
    const double n = static_cast<double>(data_.n());
    const double l1 = lambda * options_.alpha;
    const double l2 = lambda * (1.0 - options_.alpha);
    Eigen::VectorXd r = data_.y - data_.X * beta;
    auto objective = [&] {
      return 0.5 * r.squaredNorm() / n + l1 * beta.lpNorm<1>() + 0.5 * l2 * beta.squaredNorm();
    };
    auto update = [&](Eigen::Index j) {
      if (!data_.usable[static_cast<std::size_t>(j)]) return 0.0;
      const double v = data_.col_sq(j);
      const double z = data_.X.col(j).dot(r) / n + v * beta(j);
      const double next = soft_threshold(z, l1) / (v + l2);
      const double delta = next - beta(j);
      if (delta != 0.0) {
        r.noalias() -= delta * data_.X.col(j);
        beta(j) = next;
      }
      return std::abs(delta) * std::sqrt(v);
    };

    int sweeps = 0;
    std::vector<Eigen::Index> active;
    while (true) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < data_.p(); ++j) max_change = std::max(max_change, update(j));
      record(++sweeps, objective);
      if (max_change < options_.tolerance) break;
      active.clear();
      for (Eigen::Index j = 0; j < data_.p(); ++j) {
        if (beta(j) != 0.0) active.push_back(j);
      }
      while (true) {
        double active_change = 0.0;
        for (Eigen::Index j : active) active_change = std::max(active_change, update(j));
        record(++sweeps, objective);
        if (active_change < options_.tolerance) break;
      }
    }
    return sweeps;
  }

 private:
  template <typename Objective>
  void record(int sweeps, const Objective& objective) const {
    if (options_.objective_trace) options_.objective_trace->push_back(objective());
    if (sweeps >= options_.max_sweeps) {
      throw Error(ErrorCode::kDidNotConverge, "coordinate descent exceeded " + std::to_string(options_.max_sweeps) + " sweeps");
    }
  }

  const Standardized& data_;
  const LassoOptions& options_;
};

void validate_options(const LassoOptions& options) {
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  if (options.max_sweeps < 1) throw Error(ErrorCode::kInvalidArgument, "max_sweeps must be positive");
}

int count_support(const Eigen::VectorXd& beta) { return static_cast<int>((beta.array() != 0.0).count()); }

LassoPath ridge_path(const Standardized& data, const std::vector<double>& lambdas) {
  const double n = static_cast<double>(data.n());
  const Eigen::MatrixXd gram = data.X.transpose() * data.X / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd rotated = eig.eigenvectors().transpose() * (data.X.transpose() * data.y / n);
  LassoPath path;
  path.lambdas = lambdas;
  path.coefs.resize(data.p(), static_cast<Eigen::Index>(lambdas.size()));
  path.intercepts.resize(static_cast<Eigen::Index>(lambdas.size()));
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const Eigen::VectorXd shrink = (eig.eigenvalues().array().max(0.0) + lambdas[l]).inverse();
    Eigen::VectorXd scaled = eig.eigenvectors() * (shrink.array() * rotated.array()).matrix();
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      if (!data.usable[static_cast<std::size_t>(j)]) scaled(j) = 0.0;
    }
    const auto col = static_cast<Eigen::Index>(l);
    data.to_original(scaled, path.coefs.col(col), path.intercepts(col));
    path.support_sizes.push_back(count_support(path.coefs.col(col)));
  }
  return path;
}

LassoPath path_impl(const Standardized& data, const std::vector<double>& lambdas, const LassoOptions& options) {
  for (std::size_t l = 1; l < lambdas.size(); ++l) {
    if (!(lambdas[l] < lambdas[l - 1])) throw Error(ErrorCode::kInvalidArgument, "lambda grid must be strictly decreasing");
  }
  if (options.alpha == 0.0 && !options.objective_trace) {
    if (!lambdas.empty() && !(lambdas.back() > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge needs lambda > 0");
    return ridge_path(data, lambdas);
  }
  CoordinateDescent solver(data, options);
  LassoPath path;
  path.lambdas = lambdas;
  path.coefs.resize(data.p(), static_cast<Eigen::Index>(lambdas.size()));
  path.intercepts.resize(static_cast<Eigen::Index>(lambdas.size()));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    solver.solve(lambdas[l], beta);
    const auto col = static_cast<Eigen::Index>(l);
    data.to_original(beta, path.coefs.col(col), path.intercepts(col));
    path.support_sizes.push_back(count_support(path.coefs.col(col)));
  }
  return path;
}

std::vector<double> log_grid(double top, double ratio, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (!(top > 0.0)) {
    // Degenerate response: every lambda gives the empty model.
    for (int l = 0; l < count; ++l) grid[static_cast<std::size_t>(l)] = std::pow(ratio, static_cast<double>(l) / (count - 1));
    return grid;
  }
  const double log_top = std::log(top);
  const double step = std::log(ratio) / (count - 1);
  for (int l = 0; l < count; ++l) grid[static_cast<std::size_t>(l)] = std::exp(log_top + step * l);
  grid.front() = top;
  return grid;
}

}  // namespace

LassoFit lasso_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, const LassoOptions& options) {
  validate_options(options);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be non-negative");
  const Standardized data(X, y, options);
  CoordinateDescent solver(data, options);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
  LassoFit fit;
  fit.sweeps = solver.solve(lambda, beta);
  fit.beta.resize(data.p());
  data.to_original(beta, fit.beta, fit.intercept);
  return fit;
}

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoOptions& options) {
  validate_options(options);
  return Standardized(X, y, options).lambda_max(options.alpha);
}

LassoPath lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambda, double lambda_min_ratio,
                     const LassoOptions& options) {
  validate_options(options);
  if (n_lambda < 2) throw Error(ErrorCode::kInvalidArgument, "n_lambda must be at least 2");
  if (lambda_min_ratio <= 0.0) lambda_min_ratio = X.rows() > X.cols() ? 1e-3 : 1e-2;
  if (lambda_min_ratio >= 1.0) throw Error(ErrorCode::kInvalidArgument, "lambda_min_ratio must be below 1");
  const Standardized data(X, y, options);
  return path_impl(data, log_grid(data.lambda_max(options.alpha), lambda_min_ratio, n_lambda), options);
}

LassoPath lasso_path_on_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& lambdas,
                             const LassoOptions& options) {
  validate_options(options);
  const Standardized data(X, y, options);
  return path_impl(data, lambdas, options);
}

std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % folds);
  return fold;
}

CvCurve cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int folds, const LassoPath& path,
                       std::uint64_t seed, const LassoOptions& options) {
  validate_options(options);
  const Eigen::Index n = X.rows();
  if (folds < 2) throw Error(ErrorCode::kTooFewObservations, "cross-validation needs at least two folds");
  if (n < folds || n - (n + folds - 1) / folds < 2) {
    throw Error(ErrorCode::kTooFewObservations, "too few observations for " + std::to_string(folds) + " folds");
  }
  if (path.lambdas.empty()) throw Error(ErrorCode::kInvalidArgument, "empty lambda grid");
  const auto fold = fold_assignment(n, folds, seed);
  const auto L = static_cast<Eigen::Index>(path.lambdas.size());
  Eigen::MatrixXd errors(folds, L);

  LassoOptions fold_options = options;
  fold_options.objective_trace = nullptr;
  parallel_for(static_cast<std::size_t>(folds), [&](std::size_t k) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (Eigen::Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == static_cast<int>(k) ? test : train).push_back(i);
    const Eigen::MatrixXd X_train = X(train, Eigen::all);
    const Eigen::VectorXd y_train = y(train);
    const Eigen::MatrixXd X_test = X(test, Eigen::all);
    const Eigen::VectorXd y_test = y(test);
    const Standardized data(X_train, y_train, fold_options);
    const LassoPath fold_path = path_impl(data, path.lambdas, fold_options);
    for (Eigen::Index l = 0; l < L; ++l) {
      const Eigen::VectorXd prediction = (X_test * fold_path.coefs.col(l)).array() + fold_path.intercepts(l);
      errors(static_cast<Eigen::Index>(k), l) = (y_test - prediction).squaredNorm() / static_cast<double>(test.size());
    }
  });

  CvCurve curve;
  curve.lambdas = path.lambdas;
  curve.mean_error = errors.colwise().mean().transpose();
  curve.se_error.resize(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const double sd = std::sqrt((errors.col(l).array() - curve.mean_error(l)).square().sum() / (folds - 1));
    curve.se_error(l) = sd / std::sqrt(static_cast<double>(folds));
  }
  Eigen::Index best = 0;
  for (Eigen::Index l = 1; l < L; ++l) {
    if (curve.mean_error(l) < curve.mean_error(best)) best = l;
  }
  curve.index_min = static_cast<std::size_t>(best);
  curve.lambda_min = path.lambdas[curve.index_min];
  const double bound = curve.mean_error(best) + curve.se_error(best);
  curve.index_1se = curve.index_min;
  for (Eigen::Index l = 0; l < best; ++l) {
    if (curve.mean_error(l) <= bound) {
      curve.index_1se = static_cast<std::size_t>(l);
      break;
    }
  }
  curve.lambda_1se = path.lambdas[curve.index_1se];
  return curve;
}

LambdaChoice select_lambda_gibs(const CvCurve& curve, const LassoPath& path, int cap) {
  if (cap < 0) throw Error(ErrorCode::kInvalidArgument, "support cap must be non-negative");
  if (path.lambdas.empty() || curve.lambdas != path.lambdas) {
    throw Error(ErrorCode::kInvalidArgument, "CV curve and path use different grids");
  }
  // Grid is descending, so larger index means smaller lambda.
  std::size_t capped = 0;
  bool found = false;
  for (std::size_t l = 0; l < path.size(); ++l) {
    if (path.support_sizes[l] <= cap) {
      capped = l;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::kInvalidArgument, "no grid lambda meets the support cap");
  std::size_t chosen = std::min(curve.index_1se, capped);
  while (chosen > 0 && path.support_sizes[chosen] > cap) --chosen;
  if (path.support_sizes[chosen] > cap) chosen = capped;
  return {path.lambdas[chosen], chosen};
}

LassoFit ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be positive");
  LassoOptions options;
  options.alpha = 0.0;
  const Standardized data(X, y, options);
  const LassoPath path = ridge_path(data, {lambda});
  LassoFit fit;
  fit.beta = path.coefs.col(0);
  fit.intercept = path.intercepts(0);
  return fit;
}

}  // namespace amf
