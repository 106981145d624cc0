#include "cli/run_config.hpp"

#include <algorithm>

#include "amf/error.hpp"

namespace amf::cli {
namespace {

const std::vector<std::string_view> kRunKeys{
    "securities",      "basis",           "rf",
    "categories",      "classes",         "eligibility",
    "layout",          "market",          "fixed_factors",
    "protected_assets", "category_threshold", "global_threshold",
    "support_cap",     "cv_folds",        "sig_level",
    "n_lambda",        "lambda_min_ratio", "include_fixed_factors",
    "category_counts", "window_start",    "window_end",
    "holdout_end",     "grid",            "first_year",
    "last_year",       "min_len",         "residual_universe",
    "basis_size",      "penalty",         "test_model",
    "lookback",        "min_obs",         "vol_quantile",
    "min_eligible",    "rolling_window",  "horizon_start",
    "horizon_end",     "threads",         "out"};

const std::vector<std::string_view> kManifestKeys{"amf_version", "subcommand"};

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorCode::kConfig, message); }

int as_int(const io::KeyValueFile& file, std::string_view key, int fallback) {
  return static_cast<int>(file.get_int(key, fallback));
}

std::vector<std::string> list_or_empty(const io::KeyValueFile& file, std::string_view key) {
  auto value = file.get(key);
  if (!value || io::trim(*value).empty()) return {};
  return io::split_list(*value, ',');
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> all = kRunKeys;
    for (auto key : SyntheticSpec::config_keys()) {
      if (std::find(all.begin(), all.end(), key) == all.end()) all.push_back(key);
    }
    return all;
  }();
  return keys;
}

RunConfig parse_config(const io::KeyValueFile& file, const std::filesystem::path& base_dir) {
  std::vector<std::string_view> known = config_keys();
  known.insert(known.end(), kManifestKeys.begin(), kManifestKeys.end());
  std::vector<std::string> unknown;
  for (const auto& key : file.unknown_keys(known)) {
    if (!key.starts_with("sha256.")) unknown.push_back(key);
  }
  if (!unknown.empty()) fail("unknown config key(s): " + io::join(unknown, ", "));

  RunConfig c;
  auto path_of = [&](std::string_view key) -> std::optional<std::filesystem::path> {
    auto value = file.get(key);
    if (!value || io::trim(*value).empty()) return std::nullopt;
    std::filesystem::path p(io::trim(*value));
    return p.is_absolute() ? p : base_dir / p;
  };
  c.securities = path_of("securities");
  c.basis = path_of("basis");
  c.rf = path_of("rf");
  c.categories = path_of("categories");
  c.classes = path_of("classes");
  c.eligibility = path_of("eligibility");

  const std::string layout = file.get_or("layout", "wide");
  if (layout == "wide") {
    c.layout = Layout::kWide;
  } else if (layout == "long") {
    c.layout = Layout::kLong;
  } else {
    fail("layout must be wide or long, got '" + layout + "'");
  }
  c.market = file.get_or("market", c.market);

  GibsConfig& g = c.gibs;
  g.fixed_factors = list_or_empty(file, "fixed_factors");
  g.protected_assets = list_or_empty(file, "protected_assets");
  g.category_threshold = file.get_double("category_threshold", g.category_threshold);
  g.global_threshold = file.get_double("global_threshold", g.global_threshold);
  g.support_cap = as_int(file, "support_cap", g.support_cap);
  g.cv_folds = as_int(file, "cv_folds", g.cv_folds);
  g.sig_level = file.get_double("sig_level", g.sig_level);
  g.n_lambda = as_int(file, "n_lambda", g.n_lambda);
  g.lambda_min_ratio = file.get_double("lambda_min_ratio", g.lambda_min_ratio);
  g.include_fixed_factors = file.get_bool("include_fixed_factors", g.include_fixed_factors);
  for (const auto& item : list_or_empty(file, "category_counts")) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) fail("category_counts entries look like category:count, got '" + item + "'");
    const auto count = io::parse_double(item.substr(colon + 1));
    if (!count || *count != static_cast<double>(static_cast<Index>(*count))) {
      fail("category_counts needs an integer count in '" + item + "'");
    }
    g.category_counts[io::trim(item.substr(0, colon))] = static_cast<Index>(*count);
  }

  c.window_start = file.get_or("window_start", "");
  c.window_end = file.get_or("window_end", "");
  c.holdout_end = file.get_or("holdout_end", "");
  c.grid = file.get_bool("grid", c.grid);
  c.first_year = as_int(file, "first_year", c.first_year);
  c.last_year = as_int(file, "last_year", c.last_year);
  c.min_len = as_int(file, "min_len", c.min_len);

  const std::string universe = file.get_or("residual_universe", "new");
  if (universe == "new") {
    c.residual_universe = ResidualUniverse::kNewOnly;
  } else if (universe == "all") {
    c.residual_universe = ResidualUniverse::kAllExceptSelected;
  } else {
    fail("residual_universe must be new or all, got '" + universe + "'");
  }
  c.basis_size = as_int(file, "basis_size", c.basis_size);
  c.penalty = file.get_double("penalty", c.penalty);
  const std::string test_model = file.get_or("test_model", "gibs");
  if (test_model != "gibs" && test_model != "fixed") fail("test_model must be gibs or fixed, got '" + test_model + "'");
  c.fixed_model = test_model == "fixed";

  c.lookback = as_int(file, "lookback", c.lookback);
  c.min_obs = as_int(file, "min_obs", c.min_obs);
  c.vol_quantile = file.get_double("vol_quantile", c.vol_quantile);
  c.min_eligible = as_int(file, "min_eligible", c.min_eligible);
  c.rolling_window = as_int(file, "rolling_window", c.rolling_window);
  c.horizon_start = file.get_or("horizon_start", "");
  c.horizon_end = file.get_or("horizon_end", "");

  try {
    c.synth = SyntheticSpec::from_config(file);
  } catch (const Error& e) {
    fail(e.what());
  }
  if (file.contains("seed")) {
    const long long seed = file.get_int("seed", 0);
    if (seed < 0) fail("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  const long long threads = file.get_int("threads", 1);
  if (threads < 0) fail("threads must be non-negative");
  c.threads = static_cast<std::size_t>(threads);
  if (auto out = file.get("out")) c.out = *out;

  if (c.min_len < 1) fail("min_len must be positive");
  if (c.basis_size < 1) fail("basis_size must be positive");
  if (!(c.penalty >= 0.0)) fail("penalty must be non-negative");
  if (c.lookback < 2 || c.min_obs < 2 || c.min_obs > c.lookback) fail("need 2 <= min_obs <= lookback");
  if (!(c.vol_quantile > 0.0 && c.vol_quantile <= 0.5)) fail("vol_quantile must lie in (0, 0.5]");
  if (c.rolling_window < 3) fail("rolling_window must be at least 3");
  g.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const io::KeyValueFile file = io::KeyValueFile::load(path);
  return parse_config(file, path.parent_path());
}

io::KeyValueFile RunConfig::to_config() const {
  io::KeyValueFile f;
  auto put_path = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    if (p) f.set(key, std::filesystem::absolute(*p).lexically_normal().string());
  };
  put_path("securities", securities);
  put_path("basis", basis);
  put_path("rf", rf);
  put_path("categories", categories);
  put_path("classes", classes);
  put_path("eligibility", eligibility);
  f.set("layout", layout == Layout::kWide ? "wide" : "long");
  f.set("market", market);
  f.set("fixed_factors", io::join(gibs.fixed_factors, ","));
  f.set("protected_assets", io::join(gibs.protected_assets, ","));
  f.set("category_threshold", io::format_double(gibs.category_threshold));
  f.set("global_threshold", io::format_double(gibs.global_threshold));
  f.set("support_cap", std::to_string(gibs.support_cap));
  f.set("cv_folds", std::to_string(gibs.cv_folds));
  f.set("sig_level", io::format_double(gibs.sig_level));
  f.set("n_lambda", std::to_string(gibs.n_lambda));
  f.set("lambda_min_ratio", io::format_double(gibs.lambda_min_ratio));
  f.set("include_fixed_factors", gibs.include_fixed_factors ? "true" : "false");
  std::vector<std::string> counts;
  for (const auto& [category, count] : gibs.category_counts) counts.push_back(category + ":" + std::to_string(count));
  f.set("category_counts", io::join(counts, ","));
  f.set("window_start", window_start);
  f.set("window_end", window_end);
  f.set("holdout_end", holdout_end);
  f.set("grid", grid ? "true" : "false");
  f.set("first_year", std::to_string(first_year));
  f.set("last_year", std::to_string(last_year));
  f.set("min_len", std::to_string(min_len));
  f.set("residual_universe", residual_universe == ResidualUniverse::kNewOnly ? "new" : "all");
  f.set("basis_size", std::to_string(basis_size));
  f.set("penalty", io::format_double(penalty));
  f.set("test_model", fixed_model ? "fixed" : "gibs");
  f.set("lookback", std::to_string(lookback));
  f.set("min_obs", std::to_string(min_obs));
  f.set("vol_quantile", io::format_double(vol_quantile));
  f.set("min_eligible", std::to_string(min_eligible));
  f.set("rolling_window", std::to_string(rolling_window));
  f.set("horizon_start", horizon_start);
  f.set("horizon_end", horizon_end);
  const io::KeyValueFile synth_keys = synth.to_config();
  for (const auto& [key, value] : synth_keys.entries()) {
    if (key != "seed") f.set(key, value);
  }
  if (seed) f.set("seed", std::to_string(*seed));
  return f;
}

void validate_for(const RunConfig& config, std::string_view subcommand) {
  auto require = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    if (!p) fail(std::string(subcommand) + " needs '" + key + "' in the config");
    if (!std::filesystem::exists(*p)) fail(std::string(key) + " file not found: " + p->string());
  };
  auto check_optional = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    if (p && !std::filesystem::exists(*p)) fail(std::string(key) + " file not found: " + p->string());
  };
  check_optional("classes", config.classes);
  check_optional("eligibility", config.eligibility);
  if (subcommand == "synth") {
    if (!config.seed) fail("synth needs a seed (config key 'seed' or --seed)");
    return;
  }
  if (subcommand == "report") {
    check_optional("categories", config.categories);
    return;
  }
  require("securities", config.securities);
  require("basis", config.basis);
  require("rf", config.rf);
  require("categories", config.categories);
  if (!config.seed) fail(std::string(subcommand) + " needs a seed (config key 'seed' or --seed)");
}

}  // namespace amf::cli
