#include "hybrid/experiments/experiments.hpp"

#include <filesystem>

namespace hybrid::experiments {

namespace {

template <class Config, class Run>
ExperimentInfo make_info(std::string name, std::string description, Run run) {
  return {std::move(name), std::move(description),
          [run](std::string_view text, std::optional<std::uint64_t> seed) {
            auto cfg = parse_config<Config>(text);
            if (seed) cfg.seed = *seed;
            return std::pair{config_to_json(cfg), run(cfg).files};
          }};
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry{
      make_info<AcceleroConfig>("delta", "Van der Pol physics + GP residual on the synthetic accelerometer",
                                run_delta_experiment),
      make_info<ComplementaryConfig>("complementary", "low-pass physics + high-pass data complementary filter",
                                     run_complementary_experiment),
      make_info<SpectrogramConfig>("spectrogram", "STFT log-magnitude features + linear readout vs raw samples",
                                   run_spectrogram_demo),
      make_info<DdcmConfig>("ddcm", "data-driven solver on a 1-D magnetic circuit", run_ddcm_demo),
      make_info<KalmanConfig>("kalman", "continuous-discrete Kalman filter on an irregularly observed pendulum",
                              run_kalman_demo),
  };
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry()) {
    if (e.name == name) return e;
  }
  std::string known;
  for (const auto& e : experiment_registry()) known += (known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown experiment '" + name + "' (known: " + known + ")");
}

std::vector<std::string> run_and_write(const std::string& name, std::string_view config_text,
                                       std::optional<std::uint64_t> seed, const std::string& out_dir) {
  const auto& info = find_experiment(name);
  auto [config, files] = info.run(config_text, seed);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& f : files) {
    write_file_atomic(dir / f.name, f.content);
    written.push_back(f.name);
  }
  nlohmann::ordered_json manifest;
  manifest["experiment"] = name;
  manifest["seed"] = config["seed"];
  manifest["config"] = config;
  manifest["version"] = HYBRIDBLOCKS_VERSION;
  manifest["files"] = written;
  write_file_atomic(dir / "manifest.json", json_text(manifest));
  written.push_back("manifest.json");
  return written;
}

}  // namespace hybrid::experiments
