#include "amf/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "amf/error.hpp"
#include "amf/parallel.hpp"

namespace amf {
namespace {

double clamp_distance(double corr) { return std::clamp(1.0 - std::abs(corr), 0.0, 1.0); }

}  // namespace

DistanceMatrix correlation_distance(const ReturnsPanel& panel, Index min_overlap) {
  const Index N = panel.num_assets();
  const Index T = panel.periods();
  if (N == 0) throw Error(ErrorCode::kEmptyPanel, "no assets to compare");
  if (panel.mask.all()) return correlation_distance(panel.values);

  DistanceMatrix out{Eigen::MatrixXd::Zero(N, N)};
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t row) {
    const auto i = static_cast<Index>(row);
    for (Index j = i + 1; j < N; ++j) {
      double si = 0.0, sj = 0.0;
      Index count = 0;
      for (Index t = 0; t < T; ++t) {
        if (panel.mask(t, i) && panel.mask(t, j)) {
          si += panel.values(t, i);
          sj += panel.values(t, j);
          ++count;
        }
      }
      if (count < min_overlap) {
        throw Error(ErrorCode::kInsufficientOverlap, panel.assets[i] + " and " + panel.assets[j] + " share " +
                                                         std::to_string(count) + " periods");
      }
      const double mi = si / count;
      const double mj = sj / count;
      double sij = 0.0, sii = 0.0, sjj = 0.0;
      for (Index t = 0; t < T; ++t) {
        if (panel.mask(t, i) && panel.mask(t, j)) {
          const double a = panel.values(t, i) - mi;
          const double b = panel.values(t, j) - mj;
          sij += a * b;
          sii += a * a;
          sjj += b * b;
        }
      }
      if (!(sii > 0.0) || !(sjj > 0.0)) {
        throw Error(ErrorCode::kZeroVariance, "constant series on the overlap of " + panel.assets[i] + " and " +
                                                  panel.assets[j]);
      }
      out.d(i, j) = clamp_distance(sij / std::sqrt(sii * sjj));
    }
  });
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < i; ++j) out.d(i, j) = out.d(j, i);
  }
  return out;
}

DistanceMatrix correlation_distance(const Eigen::MatrixXd& series) {
  const Index N = series.cols();
  if (series.rows() < 3) throw Error(ErrorCode::kInsufficientOverlap, "need at least three observations");
  Eigen::MatrixXd z = series.rowwise() - series.colwise().mean();
  for (Index j = 0; j < N; ++j) {
    const double norm = z.col(j).norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::kZeroVariance, "column " + std::to_string(j) + " is constant");
    z.col(j) /= norm;
  }
  const Eigen::MatrixXd corr = z.transpose() * z;
  DistanceMatrix out{Eigen::MatrixXd::Zero(N, N)};
  for (Index i = 0; i < N; ++i) {
    for (Index j = i + 1; j < N; ++j) out.d(i, j) = out.d(j, i) = clamp_distance(corr(i, j));
  }
  return out;
}

MinimaxRadius minimax_radius(std::span<const Index> cluster, const DistanceMatrix& d) {
  if (cluster.empty()) throw Error(ErrorCode::kEmptyCluster, "minimax radius of an empty cluster");
  std::vector<Index> sorted(cluster.begin(), cluster.end());
  std::sort(sorted.begin(), sorted.end());
  MinimaxRadius best{std::numeric_limits<double>::infinity(), sorted.front()};
  for (Index x : sorted) {
    double worst = 0.0;
    for (Index other : sorted) worst = std::max(worst, d(x, other));
    if (worst < best.radius) best = {worst, x};
  }
  return best;
}

std::vector<Index> Dendrogram::members(Index id) const {
  std::vector<Index> out;
  std::vector<Index> stack{id};
  while (!stack.empty()) {
    const Index current = stack.back();
    stack.pop_back();
    if (current < leaves) {
      out.push_back(current);
    } else {
      const Merge& m = merges.at(static_cast<std::size_t>(current - leaves));
      stack.push_back(m.a);
      stack.push_back(m.b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dendrogram minimax_cluster(const DistanceMatrix& d) {
  const Index n = d.size();
  Dendrogram dend;
  dend.leaves = n;
  if (n <= 1) return dend;

  // Slots hold the active clusters; a merged cluster reuses the slot of the
  // side with the smaller leaf.
  std::vector<Index> slot_of(static_cast<std::size_t>(n));
  std::vector<Index> slot_id(static_cast<std::size_t>(n));
  std::vector<Index> slot_min(static_cast<std::size_t>(n));
  std::vector<Index> slot_size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  Eigen::MatrixXd dmax = d.d;  // dmax(x, s): farthest member of slot s from x
  Eigen::MatrixXd link = d.d;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> proto(n, n);
  for (Index i = 0; i < n; ++i) {
    slot_of[i] = i;
    slot_id[i] = i;
    slot_min[i] = i;
    for (Index j = 0; j < n; ++j) proto(i, j) = std::min(i, j);
  }

  auto linkage = [&](Index s, Index t, double& radius, Index& prototype) {
    radius = std::numeric_limits<double>::infinity();
    prototype = -1;
    for (Index x = 0; x < n; ++x) {
      const Index slot = slot_of[x];
      if (slot != s && slot != t) continue;
      const double r = std::max(dmax(x, s), dmax(x, t));
      if (r < radius) {
        radius = r;
        prototype = x;
      }
    }
  };

  for (Index step = 0; step < n - 1; ++step) {
    Index best_s = -1, best_t = -1;
    for (Index s = 0; s < n; ++s) {
      if (!active[s]) continue;
      for (Index t = s + 1; t < n; ++t) {
        if (!active[t]) continue;
        if (best_s < 0) {
          best_s = s;
          best_t = t;
          continue;
        }
        const auto key = [&](Index a, Index b) {
          const Index lo = std::min(slot_min[a], slot_min[b]);
          const Index hi = std::max(slot_min[a], slot_min[b]);
          return std::tuple(link(a, b), lo, hi);
        };
        if (key(s, t) < key(best_s, best_t)) {
          best_s = s;
          best_t = t;
        }
      }
    }
    if (slot_min[best_t] < slot_min[best_s]) std::swap(best_s, best_t);

    Merge merge;
    merge.a = slot_id[best_s];
    merge.b = slot_id[best_t];
    merge.height = link(best_s, best_t);
    merge.prototype = proto(best_s, best_t);
    merge.size = slot_size[best_s] + slot_size[best_t];
    dend.merges.push_back(merge);

    for (Index x = 0; x < n; ++x) {
      dmax(x, best_s) = std::max(dmax(x, best_s), dmax(x, best_t));
      if (slot_of[x] == best_t) slot_of[x] = best_s;
    }
    active[best_t] = false;
    slot_id[best_s] = n + step;
    slot_size[best_s] = merge.size;
    for (Index u = 0; u < n; ++u) {
      if (!active[u] || u == best_s) continue;
      double radius = 0.0;
      Index prototype = 0;
      linkage(best_s, u, radius, prototype);
      link(best_s, u) = link(u, best_s) = radius;
      proto(best_s, u) = proto(u, best_s) = prototype;
    }
  }
  return dend;
}

namespace {

std::vector<Cluster> replay(const Dendrogram& dend, std::size_t steps) {
  std::map<Index, Cluster> groups;
  for (Index i = 0; i < dend.leaves; ++i) groups[i] = Cluster{{i}, i};
  for (std::size_t s = 0; s < steps; ++s) {
    const Merge& m = dend.merges[s];
    Cluster merged;
    merged.members = std::move(groups.at(m.a).members);
    const auto& other = groups.at(m.b).members;
    merged.members.insert(merged.members.end(), other.begin(), other.end());
    std::sort(merged.members.begin(), merged.members.end());
    merged.prototype = m.prototype;
    groups.erase(m.a);
    groups.erase(m.b);
    groups[dend.leaves + static_cast<Index>(s)] = std::move(merged);
  }
  std::vector<Cluster> out;
  out.reserve(groups.size());
  for (auto& [id, cluster] : groups) out.push_back(std::move(cluster));
  std::sort(out.begin(), out.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
  return out;
}

}  // namespace

std::vector<Cluster> cut_by_threshold(const Dendrogram& dendrogram, double max_height) {
  std::size_t steps = 0;
  while (steps < dendrogram.merges.size() && dendrogram.merges[steps].height <= max_height) ++steps;
  return replay(dendrogram, steps);
}

std::vector<Cluster> cut_to_count(const Dendrogram& dendrogram, Index count) {
  if (count < 1 || count > dendrogram.leaves) {
    throw Error(ErrorCode::kInvalidArgument, "cluster count must lie in [1, leaves]");
  }
  return replay(dendrogram, static_cast<std::size_t>(dendrogram.leaves - count));
}

}  // namespace amf
