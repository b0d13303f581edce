#include "hybrid/core/block.hpp"
#include "hybrid/experiments/experiments.hpp"
#include "hybrid/experiments/prng.hpp"
#include "hybrid/kv.hpp"
#include "hybrid/statespace/kalman.hpp"

#include <cmath>
#include <sstream>

namespace hybrid::experiments {

std::vector<ConfigField> KalmanConfig::fields() {
  return {{"seed", &seed},     {"omega", &omega},   {"q_spectral", &q_spectral}, {"sensor_std", &sensor_std},
          {"n_obs", &n_obs},   {"dt_min", &dt_min}, {"dt_max", &dt_max},         {"init_state", &init_state},
          {"init_var", &init_var}};
}

void KalmanConfig::validate() const {
  if (!(omega > 0)) throw ConfigError("omega must be positive");
  if (!(q_spectral >= 0)) throw ConfigError("q_spectral must be >= 0");
  if (sensor_std.empty()) throw ConfigError("sensor_std needs at least one sensor");
  for (double s : sensor_std) {
    if (!(s > 0)) throw ConfigError("sensor_std entries must be positive");
  }
  if (n_obs < 1) throw ConfigError("n_obs must be >= 1");
  if (!(dt_min > 0 && dt_max >= dt_min)) throw ConfigError("need 0 < dt_min <= dt_max");
  if (init_state.size() != 2) throw ConfigError("init_state must hold angle and angular velocity");
  if (!(init_var > 0)) throw ConfigError("init_var must be positive");
}

KalmanResult run_kalman_demo(const KalmanConfig& cfg) {
  cfg.validate();
  // Small-angle pendulum: angle and angular velocity driven by white torque
  // noise; several noisy angle sensors read at irregular times.
  statespace::LinearSDEModel model;
  model.F = Matrix(2, 2);
  model.F << 0, 1, -cfg.omega * cfg.omega, 0;
  model.L = Matrix(2, 1);
  model.L << 0, 1;
  model.q_spectral = Matrix::Constant(1, 1, cfg.q_spectral);
  model.Hobs = Matrix(1, 2);
  model.Hobs << 1, 0;

  // Encoder: inverse-variance weighted mean of the sensors. Its noise
  // variance 1 / sum(1 / sigma_i^2) becomes R.
  const auto sensors = static_cast<Eigen::Index>(cfg.sensor_std.size());
  Matrix weights(1, sensors);
  double precision = 0.0;
  for (Eigen::Index i = 0; i < sensors; ++i) {
    weights(0, i) = 1.0 / (cfg.sensor_std[i] * cfg.sensor_std[i]);
    precision += weights(0, i);
  }
  weights /= precision;
  model.R = Matrix::Constant(1, 1, 1.0 / precision);
  const auto encoder = core::linear_block(weights, Vector::Zero(1));

  Prng master(cfg.seed);
  Prng timing(master.next_u64());
  Prng process(master.next_u64());
  Prng sensing(master.next_u64());

  Vector s(2);
  s << cfg.init_state[0], cfg.init_state[1];
  TimeSeries raw;
  std::vector<double> truth;
  double t = 0.0;
  for (long long k = 0; k < cfg.n_obs; ++k) {
    const double dt = cfg.dt_min + (cfg.dt_max - cfg.dt_min) * timing.uniform();
    t += dt;
    const auto d = statespace::discretize(model, dt);
    // Exact process noise draw; Q may be singular for tiny q, hence LDLT.
    const Eigen::LDLT<Matrix> ldlt(d.Q);
    Vector w(2);
    w << process.normal(), process.normal();
    const Vector noise = ldlt.transpositionsP().transpose() *
                         (ldlt.matrixL() * (ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal() * w));
    s = d.A * s + noise;
    Vector reading(sensors);
    for (Eigen::Index i = 0; i < sensors; ++i) reading(i) = s(0) + cfg.sensor_std[i] * sensing.normal();
    raw.times.push_back(t);
    raw.values.push_back(std::move(reading));
    truth.push_back(s(0));
  }

  Vector m0(2);
  m0 << cfg.init_state[0], cfg.init_state[1];
  const statespace::GaussianBelief init{m0, cfg.init_var * Matrix::Identity(2, 2)};
  const auto fr = statespace::kf_filter_irregular(model, raw, encoder, init, 0.0);
  const auto smoothed = statespace::rts_smooth(model, fr);

  double e_obs = 0, e_filt = 0, e_smooth = 0;
  std::ostringstream csv;
  csv << "t,true_angle,observed_angle,filtered_angle,smoothed_angle,smoothed_var\n";
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double obs = encoder(raw.values[k])(0);
    e_obs += (obs - truth[k]) * (obs - truth[k]);
    e_filt += std::pow(fr.updated[k].mean(0) - truth[k], 2);
    e_smooth += std::pow(smoothed[k].mean(0) - truth[k], 2);
    csv << format_double(raw.times[k]) << ',' << format_double(truth[k]) << ',' << format_double(obs) << ','
        << format_double(fr.updated[k].mean(0)) << ',' << format_double(smoothed[k].mean(0)) << ','
        << format_double(smoothed[k].cov(0, 0)) << '\n';
  }
  const double n = static_cast<double>(truth.size());
  KalmanResult res;
  res.rmse_observation = std::sqrt(e_obs / n);
  res.rmse_filtered = std::sqrt(e_filt / n);
  res.rmse_smoothed = std::sqrt(e_smooth / n);
  res.total_loglik = fr.total_loglik;

  std::ostringstream filter_csv;
  statespace::write_filter_csv(filter_csv, fr);
  nlohmann::ordered_json report;
  report["rmse"] = {{"observation", res.rmse_observation}, {"filtered", res.rmse_filtered}, {"smoothed", res.rmse_smoothed}};
  report["total_loglik"] = res.total_loglik;
  report["encoder_noise_var"] = model.R(0, 0);
  report["observations"] = cfg.n_obs;
  res.files = {{"filter.csv", filter_csv.str()}, {"angles.csv", csv.str()}, {"report.json", json_text(report)}};
  return res;
}

}  // namespace hybrid::experiments
