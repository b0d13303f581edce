#include "hybrid/constraints/magnetic_circuit.hpp"
#include "hybrid/experiments/experiments.hpp"
#include "hybrid/experiments/prng.hpp"

#include <cmath>

namespace hybrid::experiments {

std::vector<ConfigField> DdcmConfig::fields() {
  return {{"seed", &seed},
          {"cells", &cells},
          {"cell_length", &cell_length},
          {"area", &area},
          {"area_slope", &area_slope},
          {"ampere_turns", &ampere_turns},
          {"mu", &mu},
          {"b_sat", &b_sat},
          {"data_points", &data_points},
          {"h_max", &h_max},
          {"noise_std", &noise_std},
          {"stiffness", &stiffness},
          {"nested_sizes", &nested_sizes},
          {"max_iter", &max_iter},
          {"tol", &tol}};
}

void DdcmConfig::validate() const {
  if (cells < 1 || cells > 32) throw ConfigError("cells must be in [1, 32]");
  if (!(cell_length > 0) || !(area > 0)) throw ConfigError("cell_length and area must be positive");
  if (!(1 + area_slope * static_cast<double>(cells - 1) > 0) || !(area_slope > -1)) {
    throw ConfigError("area_slope makes a cross-section non-positive");
  }
  if (!(ampere_turns > 0)) throw ConfigError("ampere_turns must be positive");
  if (!(mu > 0) || !(b_sat >= 0)) throw ConfigError("mu must be positive and b_sat >= 0");
  if (data_points < 1 || !(h_max > 0)) throw ConfigError("need data_points >= 1 and h_max > 0");
  if (!(noise_std >= 0)) throw ConfigError("noise_std must be >= 0");
  if (!(stiffness > 0)) throw ConfigError("stiffness must be positive");
  if (nested_sizes.empty()) throw ConfigError("nested_sizes must not be empty");
  const double largest = nested_sizes.back();
  for (std::size_t i = 0; i < nested_sizes.size(); ++i) {
    const double n = nested_sizes[i];
    if (!(n >= 1) || n != std::floor(n)) throw ConfigError("nested_sizes must be positive integers");
    if (i > 0 && !(n > nested_sizes[i - 1])) throw ConfigError("nested_sizes must increase");
    if (std::fmod(largest, n) != 0) throw ConfigError("every nested size must divide the largest");
  }
  if (max_iter < 1 || !(tol > 0)) throw ConfigError("need max_iter >= 1 and tol > 0");
}

namespace {

constraints::MagneticCircuit circuit(const DdcmConfig& cfg) {
  constraints::MagneticCircuit mc;
  for (long long e = 0; e < cfg.cells; ++e) {
    mc.lengths.push_back(cfg.cell_length);
    mc.areas.push_back(cfg.area * (1 + cfg.area_slope * static_cast<double>(e)));
  }
  mc.ampere_turns = cfg.ampere_turns;
  mc.stiffness = cfg.stiffness;
  return mc;
}

double material_h(const DdcmConfig& cfg, double b) {
  if (cfg.b_sat == 0.0) return b / cfg.mu;
  return cfg.b_sat * std::atanh(b / cfg.b_sat) / cfg.mu;
}

// Samples H on (0, h_max] at `count` evenly spaced points; B carries
// relative measurement noise.
std::vector<Vector> material_data(const DdcmConfig& cfg, std::size_t count, Prng& rng) {
  std::vector<Vector> d;
  for (std::size_t i = 1; i <= count; ++i) {
    const double h = cfg.h_max * static_cast<double>(i) / static_cast<double>(count);
    Vector p(2);
    p << h, material_b(cfg, h) * (1 + cfg.noise_std * rng.normal());
    d.push_back(std::move(p));
  }
  return d;
}

double field_error(const Vector& z, const Vector& ref) {
  double dh = 0, db = 0, h = 0, b = 0;
  for (Eigen::Index i = 0; i < z.size(); i += 2) {
    dh = std::max(dh, std::abs(z(i) - ref(i)));
    db = std::max(db, std::abs(z(i + 1) - ref(i + 1)));
    h = std::max(h, std::abs(ref(i)));
    b = std::max(b, std::abs(ref(i + 1)));
  }
  return std::max(dh / h, db / b);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double material_b(const DdcmConfig& cfg, double h) {
  if (cfg.b_sat == 0.0) return cfg.mu * h;
  return cfg.b_sat * std::tanh(cfg.mu * h / cfg.b_sat);
}

Vector direct_circuit_solution(const DdcmConfig& cfg) {
  cfg.validate();
  const auto mc = circuit(cfg);
  if (cfg.b_sat == 0.0) return mc.linear_solution(cfg.mu);
  // sum_e l_e H(phi / A_e) increases with phi on [0, b_sat min_e A_e).
  const double a_min = *std::min_element(mc.areas.begin(), mc.areas.end());
  auto mmf = [&](double phi) {
    double s = 0.0;
    for (std::size_t e = 0; e < mc.cells(); ++e) s += mc.lengths[e] * material_h(cfg, phi / mc.areas[e]);
    return s;
  };
  double lo = 0.0, hi = cfg.b_sat * a_min;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mmf(mid) < cfg.ampere_turns ? lo : hi) = mid;
  }
  const double phi = 0.5 * (lo + hi);
  Vector z(2 * mc.cells());
  for (std::size_t e = 0; e < mc.cells(); ++e) {
    z(2 * e + 1) = phi / mc.areas[e];
    z(2 * e) = material_h(cfg, z(2 * e + 1));
  }
  return z;
}

DdcmResult run_ddcm_demo(const DdcmConfig& cfg) {
  cfg.validate();
  const auto mc = circuit(cfg);
  Prng master(cfg.seed);
  Prng main_noise(master.next_u64());
  Prng nested_noise(master.next_u64());

  DdcmResult res;
  const auto problem = mc.problem(material_data(cfg, static_cast<std::size_t>(cfg.data_points), main_noise));
  const auto run = constraints::solve_data_driven(problem, problem.z0, static_cast<int>(cfg.max_iter), cfg.tol);
  res.iterations = run.iterations;
  res.converged = run.converged;
  res.cycle_detected = run.cycle_detected;
  res.loss_history = run.loss_history;
  res.final_loss = run.loss_history.back();
  res.z = run.z;
  res.z_direct = direct_circuit_solution(cfg);
  res.relative_error = field_error(run.z, res.z_direct);

  // Nested data sets: every size takes evenly strided points of the largest.
  const auto largest = static_cast<std::size_t>(cfg.nested_sizes.back());
  const auto full = material_data(cfg, largest, nested_noise);
  nlohmann::ordered_json nested = nlohmann::ordered_json::array();
  for (double size : cfg.nested_sizes) {
    const auto n = static_cast<std::size_t>(size);
    std::vector<Vector> subset;
    for (std::size_t i = largest / n; i <= largest; i += largest / n) subset.push_back(full[i - 1]);
    const auto p = mc.problem(std::move(subset));
    const auto r = constraints::solve_data_driven(p, p.z0, static_cast<int>(cfg.max_iter), cfg.tol);
    res.nested_final_loss.push_back(r.loss_history.back());
    res.nested_histories.push_back(r.loss_history);
    nested.push_back({{"size", n},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"final_loss", r.loss_history.back()},
                      {"relative_error", field_error(r.z, res.z_direct)}});
  }

  nlohmann::ordered_json report;
  report["iterations"] = res.iterations;
  report["converged"] = res.converged;
  report["cycle_detected"] = res.cycle_detected;
  report["final_loss"] = res.final_loss;
  report["loss_history"] = res.loss_history;
  report["flux"] = mc.flux(res.z);
  report["direct_flux"] = mc.flux(res.z_direct);
  report["relative_error_vs_direct"] = res.relative_error;
  report["constraint_residual"] = mc.constraint_residual(res.z);
  report["final_z"] = to_std(res.z);
  report["direct_z"] = to_std(res.z_direct);
  report["nested"] = nested;
  res.files = {{"report.json", json_text(report)}};
  return res;
}

}  // namespace hybrid::experiments
