#include <cmath>
#include <random>

#include "amf/error.hpp"
#include "amf/lasso.hpp"
#include "amf/panel.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace amf;

namespace {

// Columns with X'X = n I.
Eigen::MatrixXd orthonormal_design(Index n, Index p, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(oracle::gaussian_matrix(n, p, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, p) * std::sqrt(double(n));
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
}

TEST_CASE("orthonormal design has the closed-form solution") {
  std::mt19937_64 rng(3);
  const Index n = 60, p = 8;
  const Eigen::MatrixXd X = orthonormal_design(n, p, rng);
  const Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(p, -1.0, 1.0) + oracle::gaussian_matrix(n, 1, rng).col(0);
  LassoOptions opt;
  opt.standardize = false;
  opt.fit_intercept = false;
  const double lambda = 0.3;
  const LassoFit fit = lasso_fit(X, y, lambda, opt);
  const Eigen::VectorXd z = X.transpose() * y / double(n);
  for (Index j = 0; j < p; ++j) CHECK(fit.beta(j) == doctest::Approx(soft_threshold(z(j), lambda)).epsilon(1e-10));
}

TEST_CASE("KKT conditions hold at the solution") {
  std::mt19937_64 rng(17);
  const Index n = 120, p = 25;
  const Eigen::MatrixXd X = oracle::gaussian_matrix(n, p, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta.head(4) << 2.0, -1.0, 0.5, 0.25;
  const Eigen::VectorXd y = X * beta + oracle::gaussian_matrix(n, 1, rng).col(0) + Eigen::VectorXd::Constant(n, 3.0);
  LassoOptions opt;
  opt.standardize = false;
  const double lmax = lambda_max(X, y, opt);
  for (double frac : {0.5, 0.1, 0.02}) {
    const double lambda = frac * lmax;
    const LassoFit fit = lasso_fit(X, y, lambda, opt);
    const Eigen::VectorXd r = y - X * fit.beta - Eigen::VectorXd::Constant(n, fit.intercept);
    CHECK(std::abs(r.mean()) < 1e-10);
    const Eigen::VectorXd g = X.transpose() * r / double(n);
    for (Index j = 0; j < p; ++j) {
      if (fit.beta(j) != 0.0) {
        CHECK(std::abs(g(j) - lambda * (fit.beta(j) > 0 ? 1.0 : -1.0)) < 1e-6);
      } else {
        CHECK(std::abs(g(j)) <= lambda + 1e-6);
      }
    }
  }
  CHECK(lasso_fit(X, y, lmax * 1.0000001, opt).beta.isZero());
}

TEST_CASE("solver agrees with a lattice search on tiny problems") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 3; ++rep) {
    const Index n = 12, p = 2 + rep % 2;
    const Eigen::MatrixXd X = oracle::gaussian_matrix(n, p, rng);
    const Eigen::VectorXd y = X * Eigen::VectorXd::Constant(p, 0.8) + 0.5 * oracle::gaussian_matrix(n, 1, rng).col(0);
    LassoOptions opt;
    opt.standardize = false;
    const double lambda = 0.2 * lambda_max(X, y, opt);
    const LassoFit fit = lasso_fit(X, y, lambda, opt);
    const auto lattice = oracle::lattice_lasso(X, y, lambda);
    CHECK((fit.beta - lattice.beta).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK(oracle::lasso_objective(X, y, fit.beta, fit.intercept, lambda) <= lattice.objective + 1e-12);
  }
}

TEST_CASE("objective never increases across sweeps") {
  std::mt19937_64 rng(29);
  const Eigen::MatrixXd X = oracle::gaussian_matrix(50, 10, rng);
  const Eigen::VectorXd y = X.col(0) - X.col(1) + oracle::gaussian_matrix(50, 1, rng).col(0);
  std::vector<double> trace;
  LassoOptions opt;
  opt.objective_trace = &trace;
  lasso_fit(X, y, 0.05, opt);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
}

TEST_CASE("path, CV and the capped 1se rule") {
  std::mt19937_64 rng(31);
  const Index n = 100, p = 30;
  const Eigen::MatrixXd X = oracle::gaussian_matrix(n, p, rng);
  const Eigen::VectorXd y = X.leftCols(3).rowwise().sum() + 0.5 * oracle::gaussian_matrix(n, 1, rng).col(0);
  const LassoPath path = lasso_path(X, y, 50);
  REQUIRE(path.size() == 50u);
  CHECK(path.support_sizes.front() == 0);
  CHECK(path.lambdas.back() == doctest::Approx(path.lambdas.front() * 1e-3));

  const CvCurve cv = cross_validate(X, y, 10, path, 7);
  CHECK(cv.lambda_1se >= cv.lambda_min);
  CHECK(cv.mean_error(Eigen::Index(cv.index_1se)) <=
        cv.mean_error(Eigen::Index(cv.index_min)) + cv.se_error(Eigen::Index(cv.index_min)) + 1e-15);

  const LambdaChoice loose = select_lambda_gibs(cv, path, 20);
  CHECK(loose.lambda == doctest::Approx(cv.lambda_1se));
  const LambdaChoice tight = select_lambda_gibs(cv, path, 1);
  CHECK(path.support_sizes[tight.index] <= 1);
  CHECK(tight.lambda >= loose.lambda);

  const auto folds = fold_assignment(n, 10, 7);
  CHECK(folds == fold_assignment(n, 10, 7));
  std::vector<int> counts(10, 0);
  for (int f : folds) counts[std::size_t(f)] += 1;
  for (int c : counts) CHECK(c == 10);
  CHECK_THROWS_AS(cross_validate(X.topRows(5), y.head(5), 10, path, 1), Error);
}

TEST_CASE("ridge matches the normal equations") {
  std::mt19937_64 rng(37);
  const Index n = 40, p = 5;
  const Eigen::MatrixXd X = oracle::gaussian_matrix(n, p, rng);
  const Eigen::VectorXd y = X.col(2) + oracle::gaussian_matrix(n, 1, rng).col(0);
  const double lambda = 0.7;
  const LassoFit fit = ridge_fit(X, y, lambda);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mean;
  const Eigen::VectorXd sd = (Xc.array().square().colwise().sum() / double(n)).sqrt().transpose();
  const Eigen::MatrixXd Z = Xc * sd.cwiseInverse().asDiagonal();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::MatrixXd A = Z.transpose() * Z / double(n) + lambda * Eigen::MatrixXd::Identity(p, p);
  const Eigen::VectorXd theta = A.ldlt().solve(Z.transpose() * yc / double(n));
  CHECK((fit.beta - theta.cwiseQuotient(sd)).cwiseAbs().maxCoeff() < 1e-10);
}
