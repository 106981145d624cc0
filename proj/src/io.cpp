#include "amf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "amf/error.hpp"

namespace amf::io {

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::kMalformedCsv, "unterminated quoted field");
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error(ErrorCode::kIo, "cannot format double");
  return std::string(buffer, end);
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NA";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::fixed, decimals);
  if (ec != std::errc()) throw Error(ErrorCode::kIo, "cannot format double");
  std::string out(buffer, end);
  // Avoid "-0.00" so reports are stable across sign-of-zero noise.
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  const std::string cleaned = trim(text);
  if (cleaned.empty()) return std::nullopt;
  std::string_view view = cleaned;
  if (view.front() == '+') view.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
  if (ec != std::errc() || ptr != view.data() + view.size()) return std::nullopt;
  return value;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view origin) {
  KeyValueFile file;
  file.origin_ = std::string(origin);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('\n', pos);
    const auto raw = text.substr(pos, next == std::string_view::npos ? text.size() - pos : next - pos);
    ++line_no;
    const std::string line = trim(raw);
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::kConfig, file.origin_ + ":" + std::to_string(line_no) +
                                            ": expected key=value");
      }
      std::string key = trim(std::string_view(line).substr(0, eq));
      if (key.empty()) {
        throw Error(ErrorCode::kConfig, file.origin_ + ":" + std::to_string(line_no) + ": empty key");
      }
      file.entries_[std::move(key)] = trim(std::string_view(line).substr(eq + 1));
    }
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kConfig, "config file not found: " + path.string());
  }
  return parse(read_file(path), path.string());
}

bool KeyValueFile::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_or(std::string_view key, std::string_view fallback) const {
  auto value = get(key);
  return value ? *value : std::string(fallback);
}

double KeyValueFile::get_double(std::string_view key, double fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  auto parsed = parse_double(*value);
  if (!parsed) throw Error(ErrorCode::kConfig, "key '" + std::string(key) + "' is not a number: " + *value);
  return *parsed;
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  long long parsed = 0;
  auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), parsed);
  if (ec != std::errc() || ptr != value->data() + value->size()) {
    throw Error(ErrorCode::kConfig, "key '" + std::string(key) + "' is not an integer: " + *value);
  }
  return parsed;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  throw Error(ErrorCode::kConfig, "key '" + std::string(key) + "' is not a boolean: " + *value);
}

void KeyValueFile::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string_view>& known) const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries_) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) unknown.push_back(key);
  }
  return unknown;
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + "=" + value + "\n";
  return out;
}

std::vector<std::string> split_list(std::string_view text, char separator) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(separator, pos);
    auto item = trim(text.substr(pos, next == std::string_view::npos ? text.size() - pos : next - pos));
    if (!item.empty()) items.push_back(std::move(item));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return items;
}

std::string join(const std::vector<std::string>& items, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += separator;
    out += items[i];
  }
  return out;
}

}  // namespace amf::io
