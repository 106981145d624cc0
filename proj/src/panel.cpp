#include "amf/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "amf/error.hpp"
#include "amf/io.hpp"

namespace amf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string where(std::string_view origin, std::size_t line_no) {
  return std::string(origin) + ":" + std::to_string(line_no);
}

struct CellKey {
  std::string date;
  std::string asset;
};

// Assembles a panel from (date, asset, value) triples. Dates are sorted,
// assets keep their first-seen order.
ReturnsPanel assemble(const std::vector<std::string>& asset_order,
                      const std::vector<std::pair<CellKey, std::optional<double>>>& cells) {
  std::set<std::string> date_set;
  for (const auto& [key, value] : cells) date_set.insert(key.date);
  ReturnsPanel panel;
  panel.timestamps.assign(date_set.begin(), date_set.end());
  panel.assets = asset_order;
  const Index T = static_cast<Index>(panel.timestamps.size());
  const Index N = static_cast<Index>(panel.assets.size());
  panel.values = Eigen::MatrixXd::Constant(T, N, kNaN);
  panel.mask = MaskMatrix::Constant(T, N, false);

  std::unordered_map<std::string, Index> row_of;
  for (Index t = 0; t < T; ++t) row_of[panel.timestamps[t]] = t;
  std::unordered_map<std::string, Index> col_of;
  for (Index j = 0; j < N; ++j) col_of[panel.assets[j]] = j;

  for (const auto& [key, value] : cells) {
    if (!value) continue;
    const Index t = row_of.at(key.date);
    const Index j = col_of.at(key.asset);
    panel.values(t, j) = *value;
    panel.mask(t, j) = true;
  }
  return panel;
}

ReturnsPanel parse_wide(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no header");
  ++line_no;
  const auto header = io::split_csv_line(line);
  if (header.size() < 2 || io::trim(header[0]) != "date") {
    throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": wide header must start with 'date'");
  }
  std::vector<std::string> assets;
  std::set<std::string> seen_assets;
  for (std::size_t j = 1; j < header.size(); ++j) {
    auto asset = io::trim(header[j]);
    if (asset.empty()) throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": empty asset id");
    if (!seen_assets.insert(asset).second) {
      throw Error(ErrorCode::kDuplicateCell, where(origin, line_no) + ": asset column repeated: " + asset);
    }
    assets.push_back(std::move(asset));
  }

  std::vector<std::pair<CellKey, std::optional<double>>> cells;
  std::set<std::string> seen_dates;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": expected " +
                                                std::to_string(header.size()) + " fields, got " +
                                                std::to_string(fields.size()));
    }
    auto date = io::trim(fields[0]);
    if (date.empty()) throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": empty date");
    if (!seen_dates.insert(date).second) {
      throw Error(ErrorCode::kDuplicateCell, where(origin, line_no) + ": date repeated: " + date);
    }
    for (std::size_t j = 1; j < fields.size(); ++j) {
      std::optional<double> value;
      if (!io::trim(fields[j]).empty()) {
        value = io::parse_double(fields[j]);
        if (!value) {
          throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": not a number: " + fields[j]);
        }
      }
      cells.push_back({CellKey{date, assets[j - 1]}, value});
    }
  }
  if (seen_dates.empty()) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no data rows");
  return assemble(assets, cells);
}

ReturnsPanel parse_long(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no header");
  ++line_no;
  const auto header = io::split_csv_line(line);
  if (header.size() != 3 || io::trim(header[0]) != "date" || io::trim(header[1]) != "asset" ||
      io::trim(header[2]) != "value") {
    throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": long header must be date,asset,value");
  }
  std::vector<std::string> assets;
  std::set<std::string> seen_assets;
  std::set<std::pair<std::string, std::string>> seen_cells;
  std::vector<std::pair<CellKey, std::optional<double>>> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 3) {
      throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": expected 3 fields");
    }
    auto date = io::trim(fields[0]);
    auto asset = io::trim(fields[1]);
    if (date.empty() || asset.empty()) {
      throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": empty date or asset");
    }
    if (!seen_cells.insert({date, asset}).second) {
      throw Error(ErrorCode::kDuplicateCell, where(origin, line_no) + ": (" + date + ", " + asset + ") repeated");
    }
    if (seen_assets.insert(asset).second) assets.push_back(asset);
    std::optional<double> value;
    if (!io::trim(fields[2]).empty()) {
      value = io::parse_double(fields[2]);
      if (!value) throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": not a number: " + fields[2]);
    }
    cells.push_back({CellKey{std::move(date), std::move(asset)}, value});
  }
  if (cells.empty()) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no data rows");
  return assemble(assets, cells);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace

void ReturnsPanel::validate() const {
  if (assets.empty() || timestamps.empty()) throw Error(ErrorCode::kEmptyPanel, "panel has no cells");
  if (timestamps.size() < 2) throw Error(ErrorCode::kEmptyPanel, "panel needs at least two periods");
  if (values.rows() != static_cast<Index>(timestamps.size()) ||
      values.cols() != static_cast<Index>(assets.size()) || mask.rows() != values.rows() ||
      mask.cols() != values.cols()) {
    throw Error(ErrorCode::kLengthMismatch, "panel dimensions disagree with labels");
  }
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    if (!(timestamps[t - 1] < timestamps[t])) {
      throw Error(ErrorCode::kInvalidArgument, "timestamps not strictly increasing at " + timestamps[t]);
    }
  }
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index t = 0; t < values.rows(); ++t) {
      if (mask(t, j) && !std::isfinite(values(t, j))) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite observed value for " + assets[j]);
      }
    }
  }
}

std::optional<Index> ReturnsPanel::asset_index(std::string_view asset) const {
  for (std::size_t j = 0; j < assets.size(); ++j) {
    if (assets[j] == asset) return static_cast<Index>(j);
  }
  return std::nullopt;
}

double ReturnsPanel::coverage(Index column) const {
  if (periods() == 0) return 0.0;
  return static_cast<double>(mask.col(column).count()) / static_cast<double>(periods());
}

ReturnsPanel ReturnsPanel::select_assets(std::span<const Index> columns) const {
  ReturnsPanel out;
  out.timestamps = timestamps;
  out.values.resize(periods(), static_cast<Index>(columns.size()));
  out.mask.resize(periods(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.assets.push_back(assets.at(columns[k]));
    out.values.col(static_cast<Index>(k)) = values.col(columns[k]);
    out.mask.col(static_cast<Index>(k)) = mask.col(columns[k]);
  }
  return out;
}

ReturnsPanel ReturnsPanel::slice_rows(Index begin, Index end) const {
  if (begin < 0 || end > periods() || begin > end) {
    throw Error(ErrorCode::kInvalidArgument, "row slice out of range");
  }
  ReturnsPanel out;
  out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + end);
  out.assets = assets;
  out.values = values.middleRows(begin, end - begin);
  out.mask = mask.middleRows(begin, end - begin);
  return out;
}

RiskFreeSeries RiskFreeSeries::slice_rows(Index begin, Index end) const {
  if (begin < 0 || end > rate.size() || begin > end) {
    throw Error(ErrorCode::kInvalidArgument, "row slice out of range");
  }
  RiskFreeSeries out;
  out.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + end);
  out.rate = rate.segment(begin, end - begin);
  return out;
}

void BasisUniverse::validate() const {
  panel.validate();
  if (!panel.asset_index(market_index)) {
    throw Error(ErrorCode::kMissingMarketIndex, "market index '" + market_index + "' not in basis panel");
  }
  for (const auto& asset : panel.assets) {
    if (!categories.contains(asset)) {
      throw Error(ErrorCode::kUnclassifiedEntity, "basis asset without category: " + asset);
    }
  }
}

ReturnsPanel parse_panel(std::istream& in, Layout layout, std::string_view origin) {
  ReturnsPanel panel = layout == Layout::kWide ? parse_wide(in, origin) : parse_long(in, origin);
  panel.validate();
  return panel;
}

ReturnsPanel load_panel(const std::filesystem::path& path, Layout layout) {
  auto in = open_input(path);
  return parse_panel(in, layout, path.string());
}

void write_panel(std::ostream& out, const ReturnsPanel& panel) {
  out << "date";
  for (const auto& asset : panel.assets) out << ',' << io::csv_field(asset);
  out << '\n';
  for (Index t = 0; t < panel.periods(); ++t) {
    out << io::csv_field(panel.timestamps[t]);
    for (Index j = 0; j < panel.num_assets(); ++j) {
      out << ',';
      if (panel.mask(t, j)) out << io::format_double(panel.values(t, j));
    }
    out << '\n';
  }
}

void save_panel(const std::filesystem::path& path, const ReturnsPanel& panel) {
  std::ostringstream buffer;
  write_panel(buffer, panel);
  io::write_file(path, buffer.str());
}

RiskFreeSeries parse_risk_free(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no header");
  ++line_no;
  const auto header = io::split_csv_line(line);
  if (header.size() != 2 || io::trim(header[0]) != "date" || io::trim(header[1]) != "rf") {
    throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": risk-free header must be date,rf");
  }
  std::vector<std::pair<std::string, double>> rows;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 2) throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": expected 2 fields");
    auto date = io::trim(fields[0]);
    auto value = io::parse_double(fields[1]);
    if (!value || !std::isfinite(*value)) {
      throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": risk-free rate must be finite");
    }
    if (!seen.insert(date).second) throw Error(ErrorCode::kDuplicateCell, where(origin, line_no) + ": date repeated");
    rows.emplace_back(std::move(date), *value);
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyPanel, std::string(origin) + ": no data rows");
  std::sort(rows.begin(), rows.end());
  RiskFreeSeries rf;
  rf.rate.resize(static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rf.timestamps.push_back(rows[t].first);
    rf.rate(static_cast<Index>(t)) = rows[t].second;
  }
  return rf;
}

RiskFreeSeries load_risk_free(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_risk_free(in, path.string());
}

void write_risk_free(std::ostream& out, const RiskFreeSeries& rf) {
  out << "date,rf\n";
  for (Index t = 0; t < rf.rate.size(); ++t) {
    out << io::csv_field(rf.timestamps[t]) << ',' << io::format_double(rf.rate(t)) << '\n';
  }
}

std::map<std::string, std::string> parse_labels(std::istream& in, std::string_view origin) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedCsv, std::string(origin) + ": no header");
  ++line_no;
  if (io::split_csv_line(line).size() != 2) {
    throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": label file needs two columns");
  }
  std::map<std::string, std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 2) throw Error(ErrorCode::kMalformedCsv, where(origin, line_no) + ": expected 2 fields");
    auto key = io::trim(fields[0]);
    if (!labels.emplace(key, io::trim(fields[1])).second) {
      throw Error(ErrorCode::kDuplicateCell, where(origin, line_no) + ": label repeated for " + key);
    }
  }
  return labels;
}

std::map<std::string, std::string> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_labels(in, path.string());
}

void write_labels(std::ostream& out, const std::map<std::string, std::string>& labels,
                  std::string_view key_header, std::string_view value_header) {
  out << key_header << ',' << value_header << '\n';
  for (const auto& [key, value] : labels) out << io::csv_field(key) << ',' << io::csv_field(value) << '\n';
}

ReturnsPanel filter_coverage(const ReturnsPanel& panel, double min_frac) {
  if (!(min_frac > 0.0 && min_frac <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_frac must lie in (0, 1]");
  }
  std::vector<Index> keep;
  const double T = static_cast<double>(panel.periods());
  for (Index j = 0; j < panel.num_assets(); ++j) {
    // Compare counts rather than fractions so 80/100 at 0.8 is kept exactly.
    const double observed = static_cast<double>(panel.mask.col(j).count());
    if (observed >= min_frac * T - 1e-9) keep.push_back(j);
  }
  if (keep.empty()) throw Error(ErrorCode::kEmptyPanel, "no asset meets the coverage threshold");
  return panel.select_assets(keep);
}

ReturnsPanel excess_returns(const ReturnsPanel& panel, const RiskFreeSeries& rf) {
  if (static_cast<Index>(rf.rate.size()) != panel.periods()) {
    throw Error(ErrorCode::kLengthMismatch, "risk-free series length differs from panel");
  }
  if (!rf.timestamps.empty() && rf.timestamps != panel.timestamps) {
    throw Error(ErrorCode::kLengthMismatch, "risk-free labels differ from panel labels");
  }
  ReturnsPanel out = panel;
  for (Index j = 0; j < out.num_assets(); ++j) {
    for (Index t = 0; t < out.periods(); ++t) {
      if (out.mask(t, j)) out.values(t, j) = panel.values(t, j) - rf.rate(t);
    }
  }
  return out;
}

PricePanel adjusted_prices(const ReturnsPanel& panel, std::span<const double> initial) {
  if (static_cast<Index>(initial.size()) != panel.num_assets()) {
    throw Error(ErrorCode::kLengthMismatch, "one initial price per asset required");
  }
  const Index T = panel.periods();
  PricePanel out;
  out.assets = panel.assets;
  out.timestamps.reserve(static_cast<std::size_t>(T) + 1);
  out.timestamps.push_back("init");
  out.timestamps.insert(out.timestamps.end(), panel.timestamps.begin(), panel.timestamps.end());
  out.prices = Eigen::MatrixXd::Constant(T + 1, panel.num_assets(), kNaN);

  for (Index j = 0; j < panel.num_assets(); ++j) {
    if (!(initial[j] > 0.0)) throw Error(ErrorCode::kNonPositivePrice, "initial price must be positive");
    Index first = 0;
    while (first < T && !panel.mask(first, j)) ++first;
    if (first == T) continue;
    Index last = T - 1;
    while (!panel.mask(last, j)) --last;
    double level = initial[j];
    out.prices(first, j) = level;
    for (Index t = first; t <= last; ++t) {
      if (!panel.mask(t, j)) {
        throw Error(ErrorCode::kInvalidArgument, "gap inside active range of " + panel.assets[j]);
      }
      const double growth = 1.0 + panel.values(t, j);
      if (!(growth > 0.0)) {
        throw Error(ErrorCode::kNonPositivePrice, panel.assets[j] + " at " + panel.timestamps[t]);
      }
      level *= growth;
      out.prices(t + 1, j) = level;
    }
  }
  return out;
}

Eigen::VectorXd money_market(const RiskFreeSeries& rf) {
  const Index T = rf.rate.size();
  Eigen::VectorXd b(T);
  double level = 1.0;
  for (Index t = 0; t < T; ++t) {
    if (!std::isfinite(rf.rate(t))) throw Error(ErrorCode::kInvalidArgument, "risk-free rate not finite");
    b(t) = level;
    level *= 1.0 + rf.rate(t);
  }
  return b;
}

ReturnsPanel first_differences(const PricePanel& prices) {
  const Index T = prices.prices.rows();
  if (T < 2) throw Error(ErrorCode::kEmptyPanel, "first differences need at least two price rows");
  ReturnsPanel out;
  out.timestamps.assign(prices.timestamps.begin() + 1, prices.timestamps.end());
  out.assets = prices.assets;
  out.values = prices.prices.bottomRows(T - 1) - prices.prices.topRows(T - 1);
  out.mask = out.values.array().isFinite();
  return out;
}

RiskFreeSeries align_risk_free(const RiskFreeSeries& rf, const std::vector<std::string>& timestamps) {
  std::unordered_map<std::string, Index> row_of;
  for (std::size_t t = 0; t < rf.timestamps.size(); ++t) row_of[rf.timestamps[t]] = static_cast<Index>(t);
  RiskFreeSeries out;
  out.timestamps = timestamps;
  out.rate.resize(static_cast<Index>(timestamps.size()));
  for (std::size_t t = 0; t < timestamps.size(); ++t) {
    auto it = row_of.find(timestamps[t]);
    if (it == row_of.end()) {
      throw Error(ErrorCode::kLengthMismatch, "risk-free series lacks period " + timestamps[t]);
    }
    out.rate(static_cast<Index>(t)) = rf.rate(it->second);
  }
  return out;
}

int label_year(std::string_view label) {
  if (label.size() < 4) throw Error(ErrorCode::kInvalidArgument, "period label has no year: " + std::string(label));
  int year = 0;
  for (int i = 0; i < 4; ++i) {
    const char c = label[static_cast<std::size_t>(i)];
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::kInvalidArgument, "period label has no year: " + std::string(label));
    }
    year = year * 10 + (c - '0');
  }
  return year;
}

}  // namespace amf
