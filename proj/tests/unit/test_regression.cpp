#include <cmath>
#include <random>

#include "amf/error.hpp"
#include "amf/panel.hpp"
#include "amf/regression.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace amf;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an amf::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("OLS matches long-double normal equations") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 30 + rep, p = 1 + rep % 5;
    const Eigen::MatrixXd X = oracle::gaussian_matrix(n, p, rng);
    const Eigen::VectorXd y = oracle::gaussian_matrix(n, 1, rng).col(0) + X.rowwise().sum();
    const OlsFit fit = ols(X, y, Intercept::kAdd);
    const auto ref = oracle::ols_normal_equations(with_intercept(X), y);
    CHECK((fit.coefficients - ref.beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((fit.std_errors - ref.se).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.rss == doctest::Approx(ref.rss).epsilon(1e-10));
    CHECK(fit.df_resid == n - p - 1);
    for (Index j = 0; j <= p; ++j) {
      CHECK(fit.p_values(j) == doctest::Approx(oracle::t_two_sided(fit.t_stats(j), double(n - p - 1))).epsilon(1e-8));
    }
  }
}

TEST_CASE("OLS rejects degenerate designs") {
  Eigen::MatrixXd X(5, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  CHECK(code_of([&] { ols(X, y); }) == ErrorCode::kRankDeficient);
  CHECK(code_of([&] { ols(Eigen::MatrixXd::Ones(2, 2), y.head(2)); }) == ErrorCode::kTooFewObservations);
  // A constant column duplicates the added intercept.
  CHECK(code_of([&] { ols(Eigen::MatrixXd::Ones(5, 1), y, Intercept::kAdd); }) == ErrorCode::kRankDeficient);
}

TEST_CASE("nested F test equals the textbook statistic and checks nesting") {
  std::mt19937_64 rng(5);
  const Index n = 80;
  const Eigen::MatrixXd X = oracle::gaussian_matrix(n, 4, rng);
  const Eigen::VectorXd y = X.col(0) + 0.3 * X.col(3) + oracle::gaussian_matrix(n, 1, rng).col(0);
  const OlsFit restricted = ols(X.leftCols(2), y, Intercept::kAdd);
  const OlsFit full = ols(X, y, Intercept::kAdd);
  const FTestResult f = nested_f_test(restricted, full);
  const double expected = ((restricted.rss - full.rss) / 2.0) / (full.rss / double(n - 5));
  CHECK(f.f_stat == doctest::Approx(expected));
  CHECK(f.df1 == 2.0);
  CHECK(f.df2 == double(n - 5));
  CHECK(f.p_value == doctest::Approx(oracle::f_survival(expected, 2.0, double(n - 5))).epsilon(1e-9));

  const OlsFit other = ols(X.rightCols(2), y, Intercept::kAdd);
  const OlsFit bigger = ols(X.leftCols(3), y, Intercept::kAdd);
  CHECK(code_of([&] { nested_f_test(other, bigger); }) == ErrorCode::kNotNested);
  CHECK(code_of([&] { nested_f_test(full, restricted); }) == ErrorCode::kNotNested);
}

TEST_CASE("Welch test: equal samples, antisymmetry and degenerate input") {
  const Eigen::VectorXd a = (Eigen::VectorXd(5) << 1.0, 1.2, 1.1, 1.4, 1.3).finished();
  const Eigen::VectorXd b = (Eigen::VectorXd(6) << 0.9, 1.0, 0.8, 1.1, 0.95, 1.0).finished();
  const WelchResult same = welch_test(a, a);
  CHECK(same.t_stat == 0.0);
  CHECK(same.p_value == doctest::Approx(0.5));

  const WelchResult ab = welch_test(a, b);
  const WelchResult ba = welch_test(b, a);
  CHECK(ab.t_stat == doctest::Approx(-ba.t_stat));
  CHECK(ab.p_value + ba.p_value == doctest::Approx(1.0));
  CHECK(ab.p_value < 0.05);

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 2.0);
  CHECK(welch_test(c, c).p_value == doctest::Approx(0.5));
  CHECK(code_of([&] { welch_test(a.head(1), b); }) == ErrorCode::kTooFewObservations);
}

TEST_CASE("out-of-sample R2") {
  const Eigen::VectorXd realized = (Eigen::VectorXd(4) << 1, 2, 3, 4).finished();
  const Eigen::VectorXd baseline = Eigen::VectorXd::Constant(4, 2.5);
  CHECK(out_of_sample_r2(realized, realized, baseline) == 1.0);
  CHECK(out_of_sample_r2(baseline, realized, baseline) == 0.0);
  CHECK(code_of([&] { out_of_sample_r2(realized, realized, realized); }) == ErrorCode::kZeroBaselineSse);
}

TEST_CASE("projection removes the direction") {
  const Eigen::VectorXd d = (Eigen::VectorXd(3) << 1, 0, 1).finished();
  const Eigen::VectorXd t = (Eigen::VectorXd(3) << 2, 5, 0).finished();
  CHECK(std::abs(project_out(t, d).dot(d)) < 1e-14);
  CHECK(code_of([&] { project_out(t, Eigen::VectorXd::Zero(3)); }) == ErrorCode::kZeroDirection);
}
