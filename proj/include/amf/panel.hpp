#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace amf {

using Index = Eigen::Index;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Aligned time x asset matrix of simple periodic returns.
///
/// Period labels are opaque strings ordered lexicographically, so ISO dates
/// and ISO year-weeks both work. Unobserved cells hold NaN and are false in
/// `mask`. A panel is immutable once built and may be shared across threads.
struct ReturnsPanel {
  std::vector<std::string> timestamps;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;
  MaskMatrix mask;

  Index periods() const { return values.rows(); }
  Index num_assets() const { return values.cols(); }

  /// Throws kEmptyPanel / kInvalidArgument when the invariants are broken.
  void validate() const;

  std::optional<Index> asset_index(std::string_view asset) const;
  double coverage(Index column) const;

  ReturnsPanel select_assets(std::span<const Index> columns) const;
  ReturnsPanel slice_rows(Index begin, Index end) const;
};

/// Per-period risk-free return r_0(t) on the same labels as a panel.
struct RiskFreeSeries {
  std::vector<std::string> timestamps;
  Eigen::VectorXd rate;

  RiskFreeSeries slice_rows(Index begin, Index end) const;
};

/// Candidate basis assets with one category label each and a designated
/// market index.
struct BasisUniverse {
  ReturnsPanel panel;
  std::map<std::string, std::string> categories;
  std::string market_index;

  void validate() const;
};

/// Adjusted price levels. Row 0 is the initial level A(0) and carries the
/// label "init"; row t+1 is the level at the end of return period t.
struct PricePanel {
  std::vector<std::string> timestamps;
  std::vector<std::string> assets;
  Eigen::MatrixXd prices;
};

enum class Layout { kWide, kLong };

ReturnsPanel load_panel(const std::filesystem::path& path, Layout layout);
ReturnsPanel parse_panel(std::istream& in, Layout layout, std::string_view origin = "<stream>");

/// Wide layout, shortest round-trip number formatting, empty cell = missing.
void write_panel(std::ostream& out, const ReturnsPanel& panel);
void save_panel(const std::filesystem::path& path, const ReturnsPanel& panel);

RiskFreeSeries load_risk_free(const std::filesystem::path& path);
RiskFreeSeries parse_risk_free(std::istream& in, std::string_view origin = "<stream>");
void write_risk_free(std::ostream& out, const RiskFreeSeries& rf);

/// Two-column label files (`asset,category`, `asset,class`, `asset,cap_rank`).
std::map<std::string, std::string> load_labels(const std::filesystem::path& path);
std::map<std::string, std::string> parse_labels(std::istream& in, std::string_view origin = "<stream>");
void write_labels(std::ostream& out, const std::map<std::string, std::string>& labels,
                  std::string_view key_header, std::string_view value_header);

/// Keeps assets whose observed fraction is at least `min_frac` (inclusive).
ReturnsPanel filter_coverage(const ReturnsPanel& panel, double min_frac);

ReturnsPanel excess_returns(const ReturnsPanel& panel, const RiskFreeSeries& rf);

/// Y_i(t) = A_i(0) * prod_{k<t} (1 + R_i(k)); T returns give T+1 levels.
/// Leading unobserved periods stay NaN and the compounding starts at the
/// first observed return; gaps after that are rejected.
PricePanel adjusted_prices(const ReturnsPanel& panel, std::span<const double> initial);

/// B(0) = 1, B(t) = prod_{k<t} (1 + r_0(k)) for t = 0..T-1.
Eigen::VectorXd money_market(const RiskFreeSeries& rf);

/// Delta Y(t) = Y(t+1) - Y(t), labelled with the later row's label.
ReturnsPanel first_differences(const PricePanel& prices);

/// Restricts a risk-free series to the given panel's labels.
RiskFreeSeries align_risk_free(const RiskFreeSeries& rf, const std::vector<std::string>& timestamps);

/// Calendar year encoded in the first four characters of a period label.
int label_year(std::string_view label);

}  // namespace amf
