#include "hybrid/core/combinators.hpp"
#include "hybrid/experiments/experiments.hpp"
#include "hybrid/experiments/prng.hpp"
#include "hybrid/gp/gp.hpp"
#include "hybrid/kv.hpp"
#include "hybrid/ode/integrate.hpp"

#include <cmath>
#include <sstream>

namespace hybrid::experiments {

std::vector<ConfigField> AcceleroConfig::fields() {
  return {{"mu", &mu},
          {"t_span", &t_span},
          {"grid_dt", &grid_dt},
          {"gp_variance", &gp_variance},
          {"gp_lengthscale", &gp_lengthscale},
          {"noise_var", &noise_var},
          {"blackout", &blackout},
          {"seed", &seed},
          {"test_fraction", &test_fraction}};
}

void AcceleroConfig::validate() const {
  if (!(mu >= 0)) throw ConfigError("mu must be >= 0");
  if (t_span.size() != 2 || !(t_span[1] > t_span[0])) throw ConfigError("t_span must be two increasing times");
  if (!(grid_dt > 0)) throw ConfigError("grid_dt must be positive");
  const double steps = (t_span[1] - t_span[0]) / grid_dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("grid_dt must divide the t_span length");
  }
  if (!(gp_variance > 0) || !(gp_lengthscale > 0)) throw ConfigError("gp_variance and gp_lengthscale must be positive");
  if (!(noise_var >= 0)) throw ConfigError("noise_var must be >= 0");
  if (blackout.size() != 2 || !(blackout[0] <= blackout[1]) || blackout[0] < t_span[0] || blackout[1] > t_span[1]) {
    throw ConfigError("blackout must be an interval within t_span");
  }
  if (!(test_fraction > 0 && test_fraction < 1)) throw ConfigError("test_fraction must lie in (0, 1)");
}

namespace {

TimeSeries select(const AcceleroData& d, bool train) {
  TimeSeries ts;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    if (d.is_train[i] == train) {
      ts.times.push_back(d.t[i]);
      ts.values.push_back(Vector::Constant(1, d.y[i]));
    }
  }
  return ts;
}

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

// Hyperparameters start from the data scale, not from the generating values.
gp::GPRegressor fit_gp(const std::vector<double>& t, const std::vector<double>& y, FittedGP& report) {
  const Matrix x = gp::column(t);
  const Vector yv = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  const double scale = std::max(sample_variance(y), 1e-6);
  const auto fit = gp::fit_hyperparams(x, yv, gp::Hyperparams{{scale, 1.0}, 0.1 * scale});
  report = {fit.params.kernel.variance, fit.params.kernel.lengthscale, fit.params.noise_var, fit.lml};
  return gp::gp_fit(x, yv, fit.params.kernel, fit.params.noise_var);
}

nlohmann::ordered_json to_json(const FittedGP& g) {
  return {{"variance", g.variance}, {"lengthscale", g.lengthscale}, {"noise_var", g.noise_var}, {"lml", g.lml}};
}

}  // namespace

TimeSeries AcceleroData::train() const { return select(*this, true); }
TimeSeries AcceleroData::test() const { return select(*this, false); }

AcceleroData synth_accelerometer(const AcceleroConfig& cfg) {
  cfg.validate();
  AcceleroData d;
  const auto n = static_cast<std::size_t>(std::llround((cfg.t_span[1] - cfg.t_span[0]) / cfg.grid_dt)) + 1;
  for (std::size_t k = 0; k < n; ++k) d.t.push_back(cfg.t_span[0] + static_cast<double>(k) * cfg.grid_dt);
  d.t.back() = cfg.t_span[1];

  const auto vf = ode::vf_van_der_pol(cfg.mu);
  ode::IntegratorConfig ic;
  ic.method = ode::Method::DP54Adaptive;
  Vector u0(2);
  u0 << 1.0, 0.0;
  d.vdp_trajectory = ode::integrate(vf, u0, cfg.t_span[0], cfg.t_span[1], ic);
  const auto sampled = ode::sample_on_grid(vf, d.vdp_trajectory, d.t);

  // Independent sub-streams: local effects, measurement noise, split.
  Prng master(cfg.seed);
  const std::uint64_t loc_seed = master.next_u64();
  Prng noise(master.next_u64());
  Prng shuffle(master.next_u64());

  const Vector loc = gp::gp_sample_prior({cfg.gp_variance, cfg.gp_lengthscale}, gp::column(d.t), loc_seed);
  const double noise_std = std::sqrt(cfg.noise_var);
  std::vector<std::size_t> outside;
  for (std::size_t k = 0; k < n; ++k) {
    d.u_vdp.push_back(sampled.values[k](0));
    d.u_loc.push_back(loc(static_cast<Eigen::Index>(k)));
    d.y.push_back(d.u_vdp[k] + d.u_loc[k] + noise_std * noise.normal());
    const bool dark = d.t[k] >= cfg.blackout[0] - 1e-9 && d.t[k] <= cfg.blackout[1] + 1e-9;
    d.in_blackout.push_back(dark);
    d.is_train.push_back(!dark);
    if (!dark) outside.push_back(k);
  }
  const auto perm = shuffle.permutation(outside.size());
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(outside.size())));
  for (std::size_t i = 0; i < n_test; ++i) d.is_train[outside[perm[i]]] = false;
  return d;
}

DeltaResult run_delta_experiment(const AcceleroConfig& cfg) {
  const auto data = synth_accelerometer(cfg);
  const auto vf = ode::vf_van_der_pol(cfg.mu);
  const auto physics = ode::trajectory_block(vf, data.vdp_trajectory, 0);

  std::vector<double> t_train, y_train, r_train;
  for (std::size_t k = 0; k < data.t.size(); ++k) {
    if (!data.is_train[k]) continue;
    t_train.push_back(data.t[k]);
    y_train.push_back(data.y[k]);
    r_train.push_back(data.y[k] - physics(Vector::Constant(1, data.t[k]))(0));
  }
  DeltaResult res;
  const auto data_gp = fit_gp(t_train, y_train, res.data_gp);
  const auto residual_gp = fit_gp(t_train, r_train, res.residual_gp);
  const auto hybrid = core::compose_delta(physics, gp::gp_mean_block(residual_gp, "residual_gp"));

  const Matrix grid = gp::column(data.t);
  const auto d_pred = gp::gp_predict(data_gp, grid);
  const auto r_pred = gp::gp_predict(residual_gp, grid);

  std::vector<double> y_test, p_test, d_test, h_test;
  std::vector<bool> dark_test;
  std::ostringstream csv;
  csv << "t,y,split,blackout,p,d_mean,d_lower,d_upper,h_mean,h_lower,h_upper\n";
  for (std::size_t k = 0; k < data.t.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const Vector tk = Vector::Constant(1, data.t[k]);
    const double p = physics(tk)(0);
    const double h = hybrid(tk)(0);
    const double d_sd = std::sqrt(d_pred.variance(i)), h_sd = std::sqrt(r_pred.variance(i));
    csv << format_double(data.t[k]) << ',' << format_double(data.y[k]) << ',' << (data.is_train[k] ? "train" : "test")
        << ',' << (data.in_blackout[k] ? 1 : 0) << ',' << format_double(p) << ',' << format_double(d_pred.mean(i)) << ','
        << format_double(d_pred.mean(i) - 2 * d_sd) << ',' << format_double(d_pred.mean(i) + 2 * d_sd) << ','
        << format_double(h) << ',' << format_double(h - 2 * h_sd) << ',' << format_double(h + 2 * h_sd) << '\n';
    if (data.is_train[k]) continue;
    y_test.push_back(data.y[k]);
    p_test.push_back(p);
    d_test.push_back(d_pred.mean(i));
    h_test.push_back(h);
    dark_test.push_back(data.in_blackout[k]);
  }
  res.physics = compute_metrics(p_test, y_test, dark_test);
  res.data = compute_metrics(d_test, y_test, dark_test);
  res.hybrid = compute_metrics(h_test, y_test, dark_test);
  const auto at10 = gp::gp_predict(data_gp, Matrix::Constant(1, 1, 10.0));
  res.data_mean_at_10 = at10.mean(0);
  res.data_variance_at_10 = at10.variance(0);

  std::ostringstream series;
  series << "t,y,u_vdp,u_loc,split\n";
  for (std::size_t k = 0; k < data.t.size(); ++k) {
    series << format_double(data.t[k]) << ',' << format_double(data.y[k]) << ',' << format_double(data.u_vdp[k]) << ','
           << format_double(data.u_loc[k]) << ',' << (data.is_train[k] ? "train" : "test") << '\n';
  }
  nlohmann::ordered_json report;
  report["metrics"] = {{"P", to_json(res.physics)}, {"D", to_json(res.data)}, {"H", to_json(res.hybrid)}};
  report["data_gp"] = to_json(res.data_gp);
  report["residual_gp"] = to_json(res.residual_gp);
  report["data_gp_at_t10"] = {{"mean", res.data_mean_at_10}, {"variance", res.data_variance_at_10}};
  report["n_train"] = t_train.size();
  report["n_test"] = y_test.size();
  report["band"] = "mean +/- 2 sd of the latent GP";
  res.files = {{"series.csv", series.str()}, {"predictions.csv", csv.str()}, {"report.json", json_text(report)}};
  return res;
}

}  // namespace hybrid::experiments
