#include "amf/fdr.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "amf/error.hpp"

namespace amf {

std::string_view to_string(FdrMethod method) { return method == FdrMethod::kBH ? "BH" : "BHY"; }

QValues adjust(const Eigen::VectorXd& p_values, FdrMethod method) {
  const Eigen::Index m = p_values.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(p_values(i) >= 0.0 && p_values(i) <= 1.0)) {
      throw Error(ErrorCode::kInvalidPValue, "p-value outside [0, 1] at position " + std::to_string(i));
    }
  }
  QValues out;
  out.p_values = p_values;
  out.method = method;
  out.q_values.resize(m);
  if (m == 0) return out;

  double multiplier = static_cast<double>(m);
  if (method == FdrMethod::kBHY) {
    double harmonic = 0.0;
    for (Eigen::Index k = 1; k <= m; ++k) harmonic += 1.0 / static_cast<double>(k);
    multiplier *= harmonic;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return p_values(a) < p_values(b); });

  double running = 1.0;
  for (Eigen::Index r = m; r >= 1; --r) {
    const Eigen::Index idx = order[static_cast<std::size_t>(r - 1)];
    running = std::min(running, multiplier * p_values(idx) / static_cast<double>(r));
    out.q_values(idx) = running;
  }
  return out;
}

}  // namespace amf
