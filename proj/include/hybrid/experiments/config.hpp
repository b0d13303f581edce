#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hybrid::experiments {

/// A named config entry bound to a member of a config struct.
struct ConfigField {
  std::string key;
  std::variant<double*, long long*, std::uint64_t*, std::vector<double>*> target;
};

/// Applies `key = value` text to the bound fields. Unknown and repeated keys
/// are ConfigErrors naming the line. Fields not mentioned keep their values.
void apply_config_text(std::string_view text, const std::vector<ConfigField>& fields);

/// One `key = value` line per field, in declaration order, with doubles
/// written to round-trip exactly.
std::string config_text(const std::vector<ConfigField>& fields);

nlohmann::ordered_json config_json(const std::vector<ConfigField>& fields);

/// Config structs expose `fields()` (non-const, returns bindings) and
/// `validate()`; these helpers cover parsing and writing for all of them.
template <class Config>
Config parse_config(std::string_view text) {
  Config c;
  apply_config_text(text, c.fields());
  c.validate();
  return c;
}

template <class Config>
std::string write_config(Config c) {
  return config_text(c.fields());
}

template <class Config>
nlohmann::ordered_json config_to_json(Config c) {
  return config_json(c.fields());
}

/// Reads a whole file; ConfigError if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace hybrid::experiments
