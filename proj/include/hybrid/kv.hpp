#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hybrid {

/// One `key = value` line of a plain-text document.
struct KeyValueEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses flat `key = value` text. `#` starts a comment, blank lines are
/// skipped, surrounding whitespace is trimmed. Keys may repeat; callers decide
/// whether that is allowed. Throws ConfigError naming the line on malformed
/// input.
std::vector<KeyValueEntry> parse_key_values(std::string_view text);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Parses a full double / integer, throwing ConfigError with `context` if
/// the text is not entirely consumed.
double parse_double(std::string_view s, const std::string& context);
long long parse_int(std::string_view s, const std::string& context);
std::vector<double> parse_double_list(std::string_view s, const std::string& context);

/// Shortest decimal form that parses back to exactly `x`.
std::string format_double(double x);

/// Compact formatting (6 significant digits) for messages.
std::string format_short(double x);
}  // namespace hybrid
