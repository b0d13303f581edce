#pragma once

#include "hybrid/experiments/config.hpp"
#include "hybrid/experiments/io.hpp"
#include "hybrid/experiments/metrics.hpp"
#include "hybrid/core/block.hpp"
#include "hybrid/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace hybrid::experiments {

// ---------------------------------------------------------------------------
// Accelerometer delta experiment

struct AcceleroConfig {
  double mu = 5.0;
  std::vector<double> t_span{0.0, 50.0};
  double grid_dt = 0.1;
  double gp_variance = 0.2;
  double gp_lengthscale = 0.5;
  double noise_var = 0.05;
  std::vector<double> blackout{5.0, 15.0};
  std::uint64_t seed = 0;
  double test_fraction = 0.3;

  std::vector<ConfigField> fields();
  void validate() const;
  bool operator==(const AcceleroConfig&) const = default;
};

struct AcceleroData {
  std::vector<double> t;        ///< full grid
  std::vector<double> y;        ///< observed
  std::vector<double> u_vdp;    ///< physics component
  std::vector<double> u_loc;    ///< local effects
  std::vector<bool> is_train;   ///< per grid point
  std::vector<bool> in_blackout;
  Trajectory vdp_trajectory;    ///< accepted DP54 steps, for dense evaluation

  TimeSeries train() const;
  TimeSeries test() const;
};

/// y = u_vdp + u_loc + noise on the grid. Blackout points (closed interval)
/// are always test; the rest are split by a seeded shuffle.
AcceleroData synth_accelerometer(const AcceleroConfig& cfg);

struct FittedGP {
  double variance = 0.0;
  double lengthscale = 0.0;
  double noise_var = 0.0;
  double lml = 0.0;
};

struct DeltaResult {
  Metrics physics, data, hybrid;  ///< P, D (standalone GP on y), H = P + residual GP
  FittedGP data_gp, residual_gp;
  double data_mean_at_10 = 0.0;      ///< standalone GP mean at t = 10
  double data_variance_at_10 = 0.0;  ///< its latent posterior variance there
  std::vector<OutputFile> files;
};

DeltaResult run_delta_experiment(const AcceleroConfig& cfg);

// ---------------------------------------------------------------------------
// Complementary filtering

struct ComplementaryConfig {
  std::uint64_t seed = 0;
  double sample_rate = 20.0;
  double duration = 200.0;
  double slow_freq = 0.05;
  double slow_amp = 1.0;
  double fast_freq = 1.5;
  double fast_amp = 0.5;
  double p_noise_std = 0.05;
  double drift_step_std = 0.02;
  double cutoff_hz = 0.5;
  long long numtaps = 201;

  std::vector<ConfigField> fields();
  void validate() const;
  bool operator==(const ComplementaryConfig&) const = default;
};

struct ComplementaryResult {
  double rmse_physics = 0.0, rmse_data = 0.0, rmse_hybrid = 0.0, rmse_swapped = 0.0;
  double signal_rms = 0.0;
  std::vector<OutputFile> files;
};

ComplementaryResult run_complementary_experiment(const ComplementaryConfig& cfg);

// ---------------------------------------------------------------------------
// Spectrogram preprocessing + linear readout

struct SpectrogramConfig {
  std::uint64_t seed = 0;
  double sample_rate = 1000.0;
  long long signal_len = 256;
  long long window_len = 32;
  long long hop = 16;
  std::vector<double> low_band{50.0, 150.0};
  std::vector<double> high_band{300.0, 450.0};
  long long n_train = 100;
  long long n_test = 100;
  double noise_std = 0.5;
  long long pooled_bands = 4;
  double floor_db = -80.0;

  std::vector<ConfigField> fields();
  void validate() const;
  bool operator==(const SpectrogramConfig&) const = default;
};

struct SpectrogramResult {
  double train_accuracy = 0.0, test_accuracy = 0.0;
  double baseline_train_accuracy = 0.0, baseline_test_accuracy = 0.0;
  int zero_signal_class = -1;
  int majority_class = -1;
  std::vector<OutputFile> files;
};

/// The fitted pipeline: log-magnitude STFT, band pooling and a linear
/// readout chained into one block producing a score; class 1 iff score > 0.
/// An all-zero signal carries no spectral information and is assigned the
/// majority training class (class 0 on a tie).
struct SpectrogramClassifier {
  core::Block pipeline;
  int majority_class = 0;

  int classify(const Vector& signal) const;
};

struct SpectrogramDataset {
  std::vector<Vector> signals;
  std::vector<int> labels;
};

/// Two-tone signals in the low (class 0) or high (class 1) band plus noise.
SpectrogramDataset synth_band_signals(const SpectrogramConfig& cfg, std::size_t count, std::uint64_t seed);

SpectrogramClassifier fit_spectrogram_classifier(const SpectrogramConfig& cfg, const SpectrogramDataset& train);

SpectrogramResult run_spectrogram_demo(const SpectrogramConfig& cfg);

// ---------------------------------------------------------------------------
// Data-driven magnetic circuit

struct DdcmConfig {
  std::uint64_t seed = 0;
  long long cells = 16;
  double cell_length = 0.01;
  double area = 1e-4;
  double area_slope = 0.05;  ///< A_e = area (1 + area_slope e)
  double ampere_turns = 1.6;
  double mu = 1e-3;          ///< initial permeability of the material law
  double b_sat = 0.015;      ///< B = b_sat tanh(mu H / b_sat); 0 gives B = mu H
  long long data_points = 200;
  double h_max = 20.0;
  double noise_std = 0.01;   ///< relative noise on measured B
  double stiffness = 5e-4;   ///< metric constant C, near the tangent modulus
  std::vector<double> nested_sizes{10, 40, 160, 640};
  long long max_iter = 500;
  double tol = 1e-14;

  std::vector<ConfigField> fields();
  void validate() const;
  bool operator==(const DdcmConfig&) const = default;
};

/// The monotone material law B(H) of a config.
double material_b(const DdcmConfig& cfg, double h);
/// Circuit solution with the noiseless law, by bisection on the flux.
Vector direct_circuit_solution(const DdcmConfig& cfg);

struct DdcmResult {
  int iterations = 0;
  bool converged = false;
  bool cycle_detected = false;
  double final_loss = 0.0;
  /// Worst of max|dH| / max|H| and max|dB| / max|B| against the direct solve.
  double relative_error = 0.0;
  Vector z, z_direct;
  std::vector<double> loss_history;
  std::vector<double> nested_final_loss;
  std::vector<std::vector<double>> nested_histories;
  std::vector<OutputFile> files;
};

DdcmResult run_ddcm_demo(const DdcmConfig& cfg);

// ---------------------------------------------------------------------------
// Continuous-discrete Kalman filter on an oscillating pendulum

struct KalmanConfig {
  std::uint64_t seed = 0;
  double omega = 1.2;
  double q_spectral = 0.05;
  std::vector<double> sensor_std{0.3, 0.5, 0.4};
  long long n_obs = 200;
  double dt_min = 0.05;
  double dt_max = 0.3;
  std::vector<double> init_state{1.0, 0.0};
  double init_var = 1.0;

  std::vector<ConfigField> fields();
  void validate() const;
  bool operator==(const KalmanConfig&) const = default;
};

struct KalmanResult {
  double rmse_observation = 0.0;  ///< encoded observation vs true angle
  double rmse_filtered = 0.0;
  double rmse_smoothed = 0.0;
  double total_loglik = 0.0;
  std::vector<OutputFile> files;
};

KalmanResult run_kalman_demo(const KalmanConfig& cfg);

// ---------------------------------------------------------------------------
// Registry used by the CLI

struct ExperimentInfo {
  std::string name;
  std::string description;
  /// Parses config text, applies the seed override, runs, and returns the
  /// config echo and output files.
  std::function<std::pair<nlohmann::ordered_json, std::vector<OutputFile>>(std::string_view config_text,
                                                                          std::optional<std::uint64_t> seed)>
      run;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& name);

/// Runs an experiment and writes its files into out_dir, then
/// manifest.json last. Returns the list of written file names (manifest
/// included).
std::vector<std::string> run_and_write(const std::string& name, std::string_view config_text,
                                       std::optional<std::uint64_t> seed, const std::string& out_dir);

}  // namespace hybrid::experiments
