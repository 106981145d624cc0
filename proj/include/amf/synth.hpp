#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amf/io.hpp"
#include "amf/panel.hpp"

namespace amf {

enum class Regime { kConstant, kBreak, kDrift };
enum class SynthModel { kReturns, kPrices };

/// Parameters of the synthetic panel generator. The first block matches the
/// documented config keys; the second block tunes the factor design.
struct SyntheticSpec {
  int n_obs = 300;
  int n_securities = 50;
  int n_basis = 50;
  int sparsity = 3;
  double beta_scale = 1.0;
  double noise_sd = 0.01;
  double correlation = 0.5;
  std::uint64_t seed = 1;
  Regime regime = Regime::kConstant;

  int block_size = 5;
  int n_fixed = 5;
  double factor_sd = 0.02;
  double market_premium = 0.001;
  double rf_rate = 0.0005;
  std::string start_date = "2007-01-05";
  int period_days = 7;
  SynthModel model = SynthModel::kReturns;
  int late_basis = 0;
  int n_classes = 2;
  double price_level = 20.0;

  /// Throws kInvalidSpec.
  void validate() const;

  static SyntheticSpec from_config(const io::KeyValueFile& config);
  io::KeyValueFile to_config() const;
  static const std::vector<std::string_view>& config_keys();
};

/// Generated panels with their ground truth. Returns are raw (not excess);
/// subtracting `rf` gives the model's excess returns.
struct SyntheticData {
  ReturnsPanel securities;
  BasisUniverse basis;
  RiskFreeSeries rf;
  std::map<std::string, std::string> classes;

  /// betas(i, j): loading of security i on basis asset j before the regime
  /// multiplier is applied.
  Eigen::MatrixXd betas;
  std::vector<std::vector<Index>> supports;
  /// Loading multiplier per period; beta_i(t) = betas.row(i) * multiplier(t).
  Eigen::VectorXd multiplier;
};

SyntheticData synthesize(const SyntheticSpec& spec);

std::string to_string(Regime regime);
Regime parse_regime(std::string_view text);

/// ISO date `start` shifted by `days`.
std::string shift_date(std::string_view start, long days);

}  // namespace amf
