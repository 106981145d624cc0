#include <algorithm>
#include <cmath>
#include <sstream>

#include "amf/error.hpp"
#include "amf/gibs.hpp"
#include "amf/synth.hpp"
#include "doctest.h"

using namespace amf;

namespace {

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_obs = 300;
  spec.n_securities = 6;
  spec.n_basis = 30;
  spec.seed = seed;
  return spec;
}

GibsConfig tight_config() {
  GibsConfig config;
  config.category_threshold = 0.2;
  config.global_threshold = 0.2;
  config.fixed_factors = {"MKT", "F1", "F2", "F3", "F4"};
  return config;
}

}  // namespace

TEST_CASE("orthogonalized columns are uncorrelated with the market") {
  const SyntheticData data = synthesize(small_spec(1));
  const BasisWindow window = excess_window(data.basis, data.rf, 0, 300);
  const Orthogonalized orth = orthogonalize_universe(window, {});
  const Index m = *orth.market_column;
  for (Index j = 0; j < window.X.cols(); ++j) {
    if (j == m) {
      CHECK(orth.X_tilde.col(j) == window.X.col(j));
    } else {
      CHECK(std::abs(orth.X_tilde.col(j).dot(window.X.col(m))) < 1e-12);
    }
  }
  CHECK((orth.transform(window.X) - orth.X_tilde).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("a column equal to the market is dropped, a protected copy is kept") {
  SyntheticData data = synthesize(small_spec(2));
  BasisWindow window = excess_window(data.basis, data.rf, 0, 300);
  const Index m = *window.column("MKT");
  window.X.conservativeResize(Eigen::NoChange, window.X.cols() + 2);
  window.X.col(window.X.cols() - 2) = 2.0 * window.X.col(m);
  window.X.col(window.X.cols() - 1) = 3.0 * window.X.col(m);
  window.assets.push_back("COPY");
  window.assets.push_back("KEEP");
  window.categories.push_back("equity");
  window.categories.push_back("equity");
  const Orthogonalized orth = orthogonalize_universe(window, {"KEEP"});
  CHECK(orth.dropped[window.assets.size() - 2]);
  CHECK_FALSE(orth.dropped[window.assets.size() - 1]);
  CHECK(orth.warnings.size() == 1u);
}

TEST_CASE("prototype selection keeps the market and respects the thresholds") {
  const SyntheticData data = synthesize(small_spec(3));
  const BasisWindow window = excess_window(data.basis, data.rf, 0, 300);
  GibsConfig config = tight_config();
  const PreparedUniverse tight = prepare_universe(window, config);
  CHECK(std::find(tight.prototypes.begin(), tight.prototypes.end(), *window.column("MKT")) != tight.prototypes.end());
  CHECK(tight.fixed.size() == 5u);

  config.category_threshold = config.global_threshold = 1.0;
  const PreparedUniverse loose = prepare_universe(window, config);
  CHECK(loose.dimension() < tight.dimension());
  CHECK(loose.dimension() >= 2);

  config.category_threshold = 0.0;
  config.global_threshold = 0.0;
  CHECK(prepare_universe(window, config).dimension() == window.X.cols());
  CHECK(gibs_dimension(window, config) == window.X.cols());
}

TEST_CASE("GIBS recovers planted supports") {
  const SyntheticData data = synthesize(small_spec(4));
  const BasisWindow window = excess_window(data.basis, data.rf, 0, 300);
  const GibsConfig config = tight_config();
  const PreparedUniverse prep = prepare_universe(window, config);
  const ReturnsPanel sec = excess_returns(data.securities, data.rf);
  const auto results = gibs_run(sec, prep, config);
  int recovered = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    REQUIRE(results[i].ok());
    CHECK(results[i].selected.size() <= 20u);
    bool all = true;
    for (Index j : data.supports[i]) {
      const auto& name = data.basis.panel.assets[std::size_t(j)];
      all = all && std::find(results[i].selected.begin(), results[i].selected.end(), name) != results[i].selected.end();
    }
    recovered += all ? 1 : 0;
    CHECK(results[i].fit.coefficients.size() == Index(results[i].selected.size()) + 1);
  }
  CHECK(recovered >= 5);

  std::ostringstream table;
  write_selection_table(table, results);
  CHECK(table.str().starts_with("security,"));
}

TEST_CASE("support cap bounds the selection") {
  const SyntheticData data = synthesize(small_spec(5));
  const BasisWindow window = excess_window(data.basis, data.rf, 0, 300);
  GibsConfig config = tight_config();
  config.support_cap = 1;
  const PreparedUniverse prep = prepare_universe(window, config);
  const ReturnsPanel sec = excess_returns(data.securities, data.rf);
  for (const auto& r : gibs_run(sec, prep, config)) CHECK(r.selected.size() <= 1u);
}

TEST_CASE("selection summary counts significant picks by category and class") {
  SelectionResult a;
  a.security = "S1";
  a.significant = {"E1", "B1"};
  SelectionResult b;
  b.security = "S2";
  b.significant = {"E1"};
  const auto summary =
      summarize_selection({a, b}, {{"S1", "stock"}, {"S2", "fund"}}, {{"E1", "equity"}, {"B1", "bond"}, {"X", "fx"}});
  REQUIRE(summary.categories == std::vector<std::string>{"bond", "equity", "fx"});
  REQUIRE(summary.classes == std::vector<std::string>{"fund", "stock"});
  CHECK(summary.counts(1, 0) == 1);
  CHECK(summary.counts(1, 1) == 1);
  CHECK(summary.counts(0, 1) == 1);
  CHECK(summary.counts.row(2).sum() == 0);
  CHECK(summary.proportions.col(1).sum() == doctest::Approx(1.0));
  CHECK(summary.avg_significant == doctest::Approx(1.5));
  CHECK_THROWS_AS(summarize_selection({a}, {}, {{"E1", "equity"}, {"B1", "bond"}}), Error);
}

TEST_CASE("method comparison fills every row") {
  SyntheticSpec spec = small_spec(6);
  spec.n_obs = 260;
  spec.n_securities = 4;
  const SyntheticData data = synthesize(spec);
  CompareSpec split;
  split.train_end = 200;
  split.holdout_end = 260;
  const ComparisonTable table = compare_methods(data.securities, data.basis, data.rf, tight_config(), split);
  CHECK(table.rows.size() == 8u);
  const MethodSummary* gibs = table.find(method_label(Method::kGibs));
  REQUIRE(gibs != nullptr);
  CHECK(gibs->oos_r2.size() == 4);
  CHECK(std::isfinite(gibs->avg_oos_r2));
  std::ostringstream out;
  write_comparison_table(out, table);
  CHECK(out.str().find(method_label(Method::kRidge)) != std::string::npos);
}

TEST_CASE("PCA dimension") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(50, 3);
  for (Index t = 0; t < 50; ++t) {
    X(t, 0) = std::sin(0.3 * double(t));
    X(t, 1) = 0.01 * std::cos(0.7 * double(t));
  }
  CHECK(pca_dimension(X, 0.9) == 1);
  CHECK(pca_dimension(X, 0.9999) == 2);
  CHECK_THROWS_AS(pca_dimension(Eigen::MatrixXd::Zero(10, 2)), Error);
}
