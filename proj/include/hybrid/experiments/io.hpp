#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace hybrid::experiments {

/// A named output produced in memory by an experiment.
struct OutputFile {
  std::string name;
  std::string content;
};

/// Writes via a temporary sibling file and a rename, so readers never see a
/// partial file. Throws std::runtime_error on IO failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Stable pretty-printed JSON text with a trailing newline.
std::string json_text(const nlohmann::ordered_json& j);

}  // namespace hybrid::experiments
