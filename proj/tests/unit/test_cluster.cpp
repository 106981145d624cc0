#include <random>
#include <set>

#include "amf/cluster.hpp"
#include "amf/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace amf;

namespace {

DistanceMatrix random_distances(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
  }
  return {d};
}

}  // namespace

TEST_CASE("minimax radius and prototype") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 4, 1, 0, 2, 4, 2, 0;
  const std::vector<Index> all{0, 1, 2};
  const MinimaxRadius r = minimax_radius(all, DistanceMatrix{d});
  CHECK(r.radius == 2.0);
  CHECK(r.prototype == 1);
  CHECK(minimax_radius(std::vector<Index>{2}, DistanceMatrix{d}).radius == 0.0);
  CHECK_THROWS_AS(minimax_radius(std::vector<Index>{}, DistanceMatrix{d}), Error);
}

TEST_CASE("dendrogram matches full recomputation") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 2 + rep % 7;
    const DistanceMatrix d = random_distances(n, rng);
    const Dendrogram dend = minimax_cluster(d);
    const auto brute = oracle::brute_minimax(d.d);
    REQUIRE(dend.merges.size() == brute.size());
    for (std::size_t k = 0; k < brute.size(); ++k) {
      CHECK(dend.members(n + Index(k)) == brute[k].members);
      CHECK(dend.merges[k].height == brute[k].height);
      CHECK(dend.merges[k].prototype == brute[k].prototype);
    }
  }
}

TEST_CASE("heights never decrease and cuts partition the leaves") {
  std::mt19937_64 rng(43);
  const DistanceMatrix d = random_distances(25, rng);
  const Dendrogram dend = minimax_cluster(d);
  for (std::size_t k = 1; k < dend.merges.size(); ++k) CHECK(dend.merges[k].height >= dend.merges[k - 1].height);

  for (double h : {0.0, 0.3, 0.6, 1.0}) {
    const auto clusters = cut_by_threshold(dend, h);
    std::set<Index> seen;
    for (const auto& c : clusters) {
      CHECK(std::find(c.members.begin(), c.members.end(), c.prototype) != c.members.end());
      CHECK(minimax_radius(c.members, d).radius <= h);
      seen.insert(c.members.begin(), c.members.end());
    }
    CHECK(seen.size() == 25u);
  }
  CHECK(cut_by_threshold(dend, 0.0).size() == 25u);
  CHECK(cut_by_threshold(dend, 1.0).size() == 1u);
  for (Index k : {1, 4, 25}) CHECK(cut_to_count(dend, k).size() == std::size_t(k));
}

TEST_CASE("correlation distance") {
  Eigen::MatrixXd s(5, 3);
  s << 1, -2, 1, 2, -4, 0, 3, -6, 1, 4, -8, 0, 5, -10, 1;
  const DistanceMatrix d = correlation_distance(s);
  CHECK(d(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 2) == doctest::Approx(1.0));
  Eigen::MatrixXd flat = s;
  flat.col(2).setConstant(1.0);
  CHECK_THROWS_AS(correlation_distance(flat), Error);
}
