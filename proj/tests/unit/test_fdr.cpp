#include <random>

#include "amf/error.hpp"
#include "amf/fdr.hpp"
#include "amf/panel.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace amf;

TEST_CASE("q-values match the step-up scan") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Index m = 1 + rep % 40;
    Eigen::VectorXd p(m);
    for (Index i = 0; i < m; ++i) p(i) = rep % 3 == 0 ? std::pow(u(rng), 4.0) : u(rng);
    if (m > 3) p(1) = p(2);  // a tie
    for (FdrMethod method : {FdrMethod::kBH, FdrMethod::kBHY}) {
      const QValues q = adjust(p, method);
      const Eigen::VectorXd ref = oracle::step_up_qvalues(p, method == FdrMethod::kBHY);
      CHECK((q.q_values - ref).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("worked example") {
  const Eigen::VectorXd p = (Eigen::VectorXd(4) << 0.01, 0.04, 0.03, 0.5).finished();
  const QValues bh = adjust(p, FdrMethod::kBH);
  CHECK(bh.q_values(0) == doctest::Approx(0.04));
  CHECK(bh.q_values(1) == doctest::Approx(0.16 / 3.0));
  CHECK(bh.q_values(2) == doctest::Approx(0.16 / 3.0));
  CHECK(bh.q_values(3) == doctest::Approx(0.5));
  const QValues bhy = adjust(p, FdrMethod::kBHY);
  const double c = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
  CHECK(bhy.q_values(0) == doctest::Approx(std::min(1.0, 0.04 * c)));
  CHECK(bhy.q_values(3) == 1.0);
  CHECK(to_string(FdrMethod::kBHY) == "BHY");
}

TEST_CASE("invalid p-values") {
  CHECK_THROWS_AS(adjust((Eigen::VectorXd(2) << 0.2, 1.5).finished(), FdrMethod::kBH), Error);
  CHECK_THROWS_AS(adjust((Eigen::VectorXd(1) << std::nan("")).finished(), FdrMethod::kBH), Error);
  CHECK(adjust(Eigen::VectorXd(0), FdrMethod::kBH).q_values.size() == 0);
}
