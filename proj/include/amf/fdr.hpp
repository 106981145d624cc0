#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace amf {

enum class FdrMethod { kBH, kBHY };

struct QValues {
  Eigen::VectorXd p_values;
  Eigen::VectorXd q_values;
  FdrMethod method = FdrMethod::kBH;
};

/// Step-up q-values q_(i) = min_{j >= i} c * m * p_(j) / j clipped to 1,
/// with c = 1 for BH and c = sum_{k<=m} 1/k for BHY. Throws kInvalidPValue
/// for values outside [0, 1].
QValues adjust(const Eigen::VectorXd& p_values, FdrMethod method);

std::string_view to_string(FdrMethod method);

}  // namespace amf
