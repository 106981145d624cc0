#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "amf/panel.hpp"

namespace amf {

/// Symmetric dissimilarities with zero diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd d;

  Index size() const { return d.rows(); }
  double operator()(Index i, Index j) const { return d(i, j); }
};

/// d = 1 - |corr| on pairwise-complete observations. Throws
/// kInsufficientOverlap below `min_overlap` shared periods and kZeroVariance
/// for a constant series.
DistanceMatrix correlation_distance(const ReturnsPanel& panel, Index min_overlap = 3);
DistanceMatrix correlation_distance(const Eigen::MatrixXd& series);

struct MinimaxRadius {
  double radius = 0.0;
  Index prototype = 0;
};

/// argmin over x in C of max over x' in C of d(x, x'); ties go to the lowest
/// index.
MinimaxRadius minimax_radius(std::span<const Index> cluster, const DistanceMatrix& d);

/// One agglomeration step. Leaves are ids 0..n-1 and the cluster created by
/// merge i gets id n + i. `a` is the side holding the smaller leaf index.
struct Merge {
  Index a = 0;
  Index b = 0;
  double height = 0.0;
  Index prototype = 0;
  Index size = 0;
};

struct Dendrogram {
  Index leaves = 0;
  std::vector<Merge> merges;

  /// Leaf indices of cluster `id`, ascending.
  std::vector<Index> members(Index id) const;
};

/// Agglomerative clustering with minimax linkage d(G, H) = r(G u H). Equal
/// linkages are resolved by the smaller leaf index of each side.
Dendrogram minimax_cluster(const DistanceMatrix& d);

struct Cluster {
  std::vector<Index> members;
  Index prototype = 0;
};

/// Groups formed by all merges with height <= max_height, ordered by their
/// smallest member.
std::vector<Cluster> cut_by_threshold(const Dendrogram& dendrogram, double max_height);

/// Groups after applying the first leaves - count merges.
std::vector<Cluster> cut_to_count(const Dendrogram& dendrogram, Index count);

}  // namespace amf
