#include "fvl/common/text.hpp"

#include <charconv>
#include <fstream>

#include "fvl/common/error.hpp"

namespace fvl::text {

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view field, const std::string& where) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto result = std::from_chars(field.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw FormatError(where + ": cannot parse \"" + std::string(field) + "\" as a number");
  }
  return value;
}

int parse_int(std::string_view field, const std::string& where) {
  int value = 0;
  const auto* end = field.data() + field.size();
  const auto result = std::from_chars(field.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw FormatError(where + ": cannot parse \"" + std::string(field) + "\" as an integer");
  }
  return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key=value");
    const std::string key(trim(view.substr(0, eq)));
    if (key.empty()) throw FormatError(where + ": empty key");
    if (!kv.emplace(key, std::string(trim(view.substr(eq + 1)))).second) {
      throw FormatError(where + ": duplicate key " + key);
    }
  }
  return kv;
}

void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  for (const auto& [key, value] : values) out << key << '=' << value << '\n';
}

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key,
                               const std::string& source) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(source + ": missing key " + key);
  return it->second;
}

}  // namespace fvl::text
