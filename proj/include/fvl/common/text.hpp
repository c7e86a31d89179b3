#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the line-oriented file formats.
namespace fvl::text {

// Shortest decimal that parses back to the identical double.
std::string format_double(double value);

// Strict parsers: the whole field must be consumed. `where` prefixes the
// FormatError message.
double parse_double(std::string_view field, const std::string& where);
int parse_int(std::string_view field, const std::string& where);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

// `key=value` lines; '#' starts a comment; blank lines ignored. Duplicate keys
// are a FormatError.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& values);

// Lookup helpers over a key/value map that throw FormatError naming `source`.
const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key,
                               const std::string& source);

}  // namespace fvl::text
