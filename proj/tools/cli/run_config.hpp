#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amf/gibs.hpp"
#include "amf/io.hpp"
#include "amf/model_tests.hpp"
#include "amf/panel.hpp"
#include "amf/synth.hpp"

namespace amf::cli {

/// Everything one invocation needs. Relative input paths are resolved
/// against the directory of the config file.
struct RunConfig {
  std::string subcommand;

  std::optional<std::filesystem::path> securities;
  std::optional<std::filesystem::path> basis;
  std::optional<std::filesystem::path> rf;
  std::optional<std::filesystem::path> categories;
  std::optional<std::filesystem::path> classes;
  std::optional<std::filesystem::path> eligibility;
  Layout layout = Layout::kWide;
  std::string market = "MKT";

  GibsConfig gibs;

  // Estimation window as inclusive period labels; empty means the data edge.
  std::string window_start;
  std::string window_end;
  std::string holdout_end;

  // Period grid.
  bool grid = false;
  int first_year = 0;
  int last_year = 0;
  int min_len = 3;

  // Invariance tests.
  ResidualUniverse residual_universe = ResidualUniverse::kNewOnly;
  int basis_size = 6;
  double penalty = 1.0;
  bool fixed_model = false;

  // Volatility study.
  int lookback = 52;
  int min_obs = 42;
  double vol_quantile = 0.25;
  int min_eligible = 8;
  int rolling_window = 156;
  std::string horizon_start;
  std::string horizon_end;

  SyntheticSpec synth;

  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::filesystem::path out = "amf_out";

  /// Resolved keys in the config-file format; inputs become absolute paths.
  io::KeyValueFile to_config() const;
};

/// Keys accepted in config files (synthetic-generator keys included).
const std::vector<std::string_view>& config_keys();

/// Unknown keys are a config error; keys under `sha256.` and the manifest
/// header keys are ignored so a manifest can be fed back as a config.
RunConfig parse_config(const io::KeyValueFile& file, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Checks that the inputs a subcommand needs are configured and exist.
void validate_for(const RunConfig& config, std::string_view subcommand);

}  // namespace amf::cli
