// Command-line runner for the shipped experiments.
//
//   hybridblocks list
//   hybridblocks defaults <experiment>
//   hybridblocks run <experiment> [--config FILE] [--seed N] --out DIR
//
// Exit codes: 0 success, 2 configuration or usage error, 1 numerical or IO
// failure.

#include "hybrid/experiments/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace ex = hybrid::experiments;

namespace {

constexpr int kConfigError = 2;
constexpr int kFailure = 1;

std::string default_config_text(const std::string& name) {
  if (name == "delta") return ex::write_config(ex::AcceleroConfig{});
  if (name == "complementary") return ex::write_config(ex::ComplementaryConfig{});
  if (name == "spectrogram") return ex::write_config(ex::SpectrogramConfig{});
  if (name == "ddcm") return ex::write_config(ex::DdcmConfig{});
  if (name == "kalman") return ex::write_config(ex::KalmanConfig{});
  ex::find_experiment(name);  // throws with the list of known names
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid modeling experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the available experiments");
  auto* defaults = app.add_subcommand("defaults", "Print an experiment's default configuration");
  std::string defaults_name;
  defaults->add_option("experiment", defaults_name, "Experiment name")->required();

  auto* run = app.add_subcommand("run", "Run an experiment and write its outputs");
  std::string name, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  run->add_option("experiment", name, "Experiment name")->required();
  run->add_option("--config", config_path, "key = value configuration file (defaults if omitted)");
  run->add_option("--seed", seed, "Seed overriding the configuration");
  run->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (list->parsed()) {
      for (const auto& e : ex::experiment_registry()) std::cout << e.name << "\t" << e.description << "\n";
      return 0;
    }
    if (defaults->parsed()) {
      std::cout << default_config_text(defaults_name);
      return 0;
    }
    const std::string text = config_path.empty() ? std::string() : ex::read_text_file(config_path);
    for (const auto& f : ex::run_and_write(name, text, seed, out_dir)) std::cout << out_dir << "/" << f << "\n";
    return 0;
  } catch (const hybrid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
