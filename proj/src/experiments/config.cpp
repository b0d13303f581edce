#include "hybrid/experiments/config.hpp"

#include "hybrid/kv.hpp"
#include "hybrid/types.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace hybrid::experiments {

namespace {

std::uint64_t parse_u64(const std::string& s, const std::string& context) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end) throw ConfigError(context + ": expected a non-negative integer");
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

}  // namespace

void apply_config_text(std::string_view text, const std::vector<ConfigField>& fields) {
  std::set<std::string> seen;
  for (const auto& entry : parse_key_values(text)) {
    const std::string where = "line " + std::to_string(entry.line) + ": ";
    const ConfigField* field = nullptr;
    for (const auto& f : fields) {
      if (f.key == entry.key) field = &f;
    }
    if (!field) throw ConfigError(where + "unknown key '" + entry.key + "'");
    if (!seen.insert(entry.key).second) throw ConfigError(where + "key '" + entry.key + "' given twice");
    const std::string context = where + entry.key;
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, double>) {
            *target = parse_double(entry.value, context);
          } else if constexpr (std::is_same_v<T, long long>) {
            *target = parse_int(entry.value, context);
          } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            *target = parse_u64(entry.value, context);
          } else {
            *target = parse_double_list(entry.value, context);
          }
        },
        field->target);
  }
}

std::string config_text(const std::vector<ConfigField>& fields) {
  std::ostringstream os;
  for (const auto& f : fields) {
    os << f.key << " = ";
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, double>) {
            os << format_double(*target);
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            os << join(*target);
          } else {
            os << *target;
          }
        },
        f.target);
    os << '\n';
  }
  return os.str();
}

nlohmann::ordered_json config_json(const std::vector<ConfigField>& fields) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& f : fields) {
    std::visit([&](auto* target) { j[f.key] = *target; }, f.target);
  }
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace hybrid::experiments
