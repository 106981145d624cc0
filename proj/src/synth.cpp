#include "amf/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "amf/error.hpp"

namespace amf {
namespace {

std::string padded_id(std::string_view prefix, int number, int total) {
  const int width = std::max(3, static_cast<int>(std::to_string(total).size()));
  std::string digits = std::to_string(number);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return std::string(prefix) + digits;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidSpec, message);
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kConstant: return "constant";
    case Regime::kBreak: return "break";
    case Regime::kDrift: return "drift";
  }
  return "constant";
}

Regime parse_regime(std::string_view text) {
  if (text == "constant" || text == "constant-beta") return Regime::kConstant;
  if (text == "break" || text == "break-at-midpoint") return Regime::kBreak;
  if (text == "drift" || text == "smooth-drift") return Regime::kDrift;
  throw Error(ErrorCode::kInvalidSpec, "unknown regime: " + std::string(text));
}

std::string shift_date(std::string_view start, long days) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (start.size() != 10 || std::sscanf(std::string(start).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) {
    throw Error(ErrorCode::kInvalidSpec, "start_date must be YYYY-MM-DD: " + std::string(start));
  }
  using namespace std::chrono;
  const year_month_day base{year{y}, month{m}, day{d}};
  if (!base.ok()) throw Error(ErrorCode::kInvalidSpec, "invalid start_date: " + std::string(start));
  const year_month_day shifted{sys_days{base} + std::chrono::days{days}};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(shifted.year()),
                static_cast<unsigned>(shifted.month()), static_cast<unsigned>(shifted.day()));
  return buffer;
}

void SyntheticSpec::validate() const {
  require(n_obs >= 2, "n_obs must be at least 2");
  require(n_securities >= 1, "n_securities must be positive");
  require(n_fixed >= 1 && n_fixed <= n_basis, "n_fixed must lie in [1, n_basis]");
  require(late_basis >= 0 && late_basis <= n_basis - n_fixed, "late_basis exceeds the ETF count");
  require(sparsity >= 0 && sparsity <= n_basis - late_basis, "sparsity must not exceed n_basis");
  require(correlation >= 0.0 && correlation < 1.0, "correlation must lie in [0, 1)");
  require(noise_sd > 0.0, "noise_sd must be positive");
  require(factor_sd > 0.0, "factor_sd must be positive");
  require(block_size >= 1, "block_size must be positive");
  require(period_days >= 1, "period_days must be positive");
  require(n_classes >= 1, "n_classes must be positive");
  require(price_level > 0.0, "price_level must be positive");
  require(std::isfinite(beta_scale) && std::isfinite(market_premium) && std::isfinite(rf_rate),
          "scale parameters must be finite");
  shift_date(start_date, 0);
}

const std::vector<std::string_view>& SyntheticSpec::config_keys() {
  static const std::vector<std::string_view> keys = {
      "n_obs",      "n_securities", "n_basis",  "sparsity",       "beta_scale", "noise_sd",
      "correlation", "seed",        "regime",   "block_size",     "n_fixed",    "factor_sd",
      "market_premium", "rf_rate",  "start_date", "period_days",  "model",      "late_basis",
      "n_classes",  "price_level"};
  return keys;
}

SyntheticSpec SyntheticSpec::from_config(const io::KeyValueFile& config) {
  SyntheticSpec spec;
  auto as_int = [&](std::string_view key, int fallback) {
    return static_cast<int>(config.get_int(key, fallback));
  };
  spec.n_obs = as_int("n_obs", spec.n_obs);
  spec.n_securities = as_int("n_securities", spec.n_securities);
  spec.n_basis = as_int("n_basis", spec.n_basis);
  spec.sparsity = as_int("sparsity", spec.sparsity);
  spec.beta_scale = config.get_double("beta_scale", spec.beta_scale);
  spec.noise_sd = config.get_double("noise_sd", spec.noise_sd);
  spec.correlation = config.get_double("correlation", spec.correlation);
  spec.seed = static_cast<std::uint64_t>(config.get_int("seed", static_cast<long long>(spec.seed)));
  if (auto regime = config.get("regime")) spec.regime = parse_regime(*regime);
  spec.block_size = as_int("block_size", spec.block_size);
  spec.n_fixed = as_int("n_fixed", spec.n_fixed);
  spec.factor_sd = config.get_double("factor_sd", spec.factor_sd);
  spec.market_premium = config.get_double("market_premium", spec.market_premium);
  spec.rf_rate = config.get_double("rf_rate", spec.rf_rate);
  spec.start_date = config.get_or("start_date", spec.start_date);
  spec.period_days = as_int("period_days", spec.period_days);
  if (auto model = config.get("model")) {
    if (*model == "returns") {
      spec.model = SynthModel::kReturns;
    } else if (*model == "prices") {
      spec.model = SynthModel::kPrices;
    } else {
      throw Error(ErrorCode::kInvalidSpec, "model must be returns or prices: " + *model);
    }
  }
  spec.late_basis = as_int("late_basis", spec.late_basis);
  spec.n_classes = as_int("n_classes", spec.n_classes);
  spec.price_level = config.get_double("price_level", spec.price_level);
  return spec;
}

io::KeyValueFile SyntheticSpec::to_config() const {
  io::KeyValueFile out;
  out.set("n_obs", std::to_string(n_obs));
  out.set("n_securities", std::to_string(n_securities));
  out.set("n_basis", std::to_string(n_basis));
  out.set("sparsity", std::to_string(sparsity));
  out.set("beta_scale", io::format_double(beta_scale));
  out.set("noise_sd", io::format_double(noise_sd));
  out.set("correlation", io::format_double(correlation));
  out.set("seed", std::to_string(seed));
  out.set("regime", to_string(regime));
  out.set("block_size", std::to_string(block_size));
  out.set("n_fixed", std::to_string(n_fixed));
  out.set("factor_sd", io::format_double(factor_sd));
  out.set("market_premium", io::format_double(market_premium));
  out.set("rf_rate", io::format_double(rf_rate));
  out.set("start_date", start_date);
  out.set("period_days", std::to_string(period_days));
  out.set("model", model == SynthModel::kReturns ? "returns" : "prices");
  out.set("late_basis", std::to_string(late_basis));
  out.set("n_classes", std::to_string(n_classes));
  out.set("price_level", io::format_double(price_level));
  return out;
}

SyntheticData synthesize(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);

  const int T = spec.n_obs;
  const int P = spec.n_basis;
  const int n_etf = P - spec.n_fixed;
  const int N = spec.n_securities;

  SyntheticData data;
  auto& basis = data.basis;
  basis.market_index = "MKT";

  std::vector<std::string> timestamps(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) timestamps[t] = shift_date(spec.start_date, static_cast<long>(t) * spec.period_days);

  data.rf.timestamps = timestamps;
  data.rf.rate = Eigen::VectorXd::Constant(T, spec.rf_rate);

  // Basis excess returns: market, fixed factors, block-correlated ETFs.
  Eigen::MatrixXd excess(T, P);
  std::vector<std::string>& basis_ids = basis.panel.assets;
  basis_ids.push_back("MKT");
  basis.categories["MKT"] = "market";
  for (int k = 1; k < spec.n_fixed; ++k) {
    basis_ids.push_back("F" + std::to_string(k));
    basis.categories[basis_ids.back()] = "factor";
  }
  for (int j = 0; j < n_etf; ++j) {
    basis_ids.push_back(padded_id("ETF", j + 1, n_etf));
    basis.categories[basis_ids.back()] = padded_id("sector", j / spec.block_size + 1, n_etf / spec.block_size + 1);
  }

  for (int t = 0; t < T; ++t) excess(t, 0) = spec.market_premium + spec.factor_sd * normal(rng);
  for (int k = 1; k < spec.n_fixed; ++k) {
    const double premium = 0.3 * spec.market_premium;
    for (int t = 0; t < T; ++t) excess(t, k) = premium + spec.factor_sd * normal(rng);
  }
  const int n_blocks = (n_etf + spec.block_size - 1) / spec.block_size;
  Eigen::MatrixXd block_factor(T, std::max(n_blocks, 1));
  for (int b = 0; b < n_blocks; ++b) {
    for (int t = 0; t < T; ++t) block_factor(t, b) = normal(rng);
  }
  const double shared = std::sqrt(spec.correlation);
  const double idio = std::sqrt(1.0 - spec.correlation);
  for (int j = 0; j < n_etf; ++j) {
    const int col = spec.n_fixed + j;
    const double market_loading = uniform(rng);
    const int block = j / spec.block_size;
    for (int t = 0; t < T; ++t) {
      excess(t, col) = market_loading * excess(t, 0) +
                       spec.factor_sd * (shared * block_factor(t, block) + idio * normal(rng));
    }
  }

  basis.panel.timestamps = timestamps;
  basis.panel.values = excess.array() + spec.rf_rate;
  basis.panel.mask = MaskMatrix::Constant(T, P, true);
  const int late_start = T / 2;
  for (int j = P - spec.late_basis; j < P; ++j) {
    for (int t = 0; t < late_start; ++t) {
      basis.panel.values(t, j) = std::numeric_limits<double>::quiet_NaN();
      basis.panel.mask(t, j) = false;
    }
  }

  data.multiplier = Eigen::VectorXd::Ones(T);
  if (spec.regime == Regime::kBreak) {
    data.multiplier.tail(T - late_start).setConstant(2.0);
  } else if (spec.regime == Regime::kDrift) {
    for (int t = 0; t < T; ++t) {
      data.multiplier(t) = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t / std::max(T - 1, 1));
    }
  }

  // Sparse loadings drawn from assets observed over the whole span.
  const int eligible = P - spec.late_basis;
  data.betas = Eigen::MatrixXd::Zero(N, P);
  data.supports.resize(static_cast<std::size_t>(N));
  std::vector<Index> pool(static_cast<std::size_t>(eligible));
  for (int i = 0; i < N; ++i) {
    std::iota(pool.begin(), pool.end(), Index{0});
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<Index> support(pool.begin(), pool.begin() + spec.sparsity);
    std::sort(support.begin(), support.end());
    for (Index j : support) {
      const double sign = normal(rng) < 0.0 ? -1.0 : 1.0;
      data.betas(i, j) = sign * spec.beta_scale * uniform(rng);
    }
    data.supports[static_cast<std::size_t>(i)] = std::move(support);
  }

  auto& sec = data.securities;
  sec.timestamps = timestamps;
  sec.values.resize(T, N);
  sec.mask = MaskMatrix::Constant(T, N, true);
  for (int i = 0; i < N; ++i) {
    sec.assets.push_back(padded_id("SEC", i + 1, N));
    data.classes[sec.assets.back()] = padded_id("class", i % spec.n_classes + 1, spec.n_classes);
  }

  Eigen::MatrixXd basis_excess = excess;
  for (int j = P - spec.late_basis; j < P; ++j) basis_excess.col(j).head(late_start).setZero();

  if (spec.model == SynthModel::kReturns) {
    for (int i = 0; i < N; ++i) {
      for (int t = 0; t < T; ++t) {
        const double signal = data.multiplier(t) * basis_excess.row(t).dot(data.betas.row(i));
        sec.values(t, i) = spec.rf_rate + signal + spec.noise_sd * normal(rng);
      }
    }
    return data;
  }

  // Price model: Delta Y = c * Delta B + beta(t)' Delta V + eps with V(0) = 1.
  Eigen::MatrixXd levels(T + 1, P);
  levels.row(0).setOnes();
  for (int t = 0; t < T; ++t) {
    levels.row(t + 1) = levels.row(t).array() * (1.0 + basis.panel.values.row(t).array().isNaN().select(
                                                              0.0, basis.panel.values.row(t).array()));
  }
  Eigen::MatrixXd dV = levels.bottomRows(T) - levels.topRows(T);
  Eigen::VectorXd mma(T + 1);
  mma(0) = 1.0;
  for (int t = 0; t < T; ++t) mma(t + 1) = mma(t) * (1.0 + spec.rf_rate);
  for (int i = 0; i < N; ++i) {
    double y = spec.price_level + levels.row(0).dot(data.betas.row(i));
    if (!(y > 0.0)) throw Error(ErrorCode::kInvalidSpec, "initial synthetic price is not positive");
    for (int t = 0; t < T; ++t) {
      const double dy = spec.price_level * (mma(t + 1) - mma(t)) +
                        data.multiplier(t) * dV.row(t).dot(data.betas.row(i)) + spec.noise_sd * normal(rng);
      sec.values(t, i) = dy / y;
      y += dy;
      if (!(y > 0.0)) {
        throw Error(ErrorCode::kInvalidSpec, "synthetic price path of " + sec.assets[i] + " hit zero; raise price_level");
      }
    }
  }
  return data;
}

}  // namespace amf
