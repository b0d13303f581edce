#include "hybrid/ode/integrate.hpp"

#include "hybrid/kv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace hybrid::ode {

void IntegratorConfig::validate() const {
  if (!(step > 0)) throw InvalidArgument("integrator step must be positive");
  if (!(rel_tol > 0) || !(abs_tol > 0)) throw InvalidArgument("integrator tolerances must be positive");
  if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
  if (!(inner_tol > 0) || inner_max < 1) throw InvalidArgument("inner solver settings must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Fourth-order weights.
constexpr double d1 = 5179.0 / 57600, d3 = 7571.0 / 16695, d4 = 393.0 / 640, d5 = -92097.0 / 339200,
                 d6 = 187.0 / 2100, d7 = 1.0 / 40;

void require_finite(const Vector& v, double t, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite value at t=" + format_short(t));
}

}  // namespace

EmbeddedStep dp54_step(const VectorField& vf, const Vector& u, double t, double h) {
  if (!(h > 0)) throw InvalidArgument("dp54_step: h must be positive");
  const Vector k1 = vf(u, t);
  const Vector k2 = vf(u + h * a21 * k1, t + c2 * h);
  const Vector k3 = vf(u + h * (a31 * k1 + a32 * k2), t + c3 * h);
  const Vector k4 = vf(u + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
  const Vector k5 = vf(u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
  const Vector k6 = vf(u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
  EmbeddedStep out;
  out.u_next = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vector k7 = vf(out.u_next, t + h);
  const Vector u4 = u + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  for (const Vector* k : {&k1, &k2, &k3, &k4, &k5, &k6, &k7}) require_finite(*k, t, "dp54 stage");
  out.error = out.u_next - u4;
  out.error_norm = out.error.norm();
  return out;
}

Vector rk4_step(const VectorField& vf, const Vector& u, double t, double h) {
  const Vector k1 = vf(u, t);
  const Vector k2 = vf(u + 0.5 * h * k1, t + 0.5 * h);
  const Vector k3 = vf(u + 0.5 * h * k2, t + 0.5 * h);
  const Vector k4 = vf(u + h * k3, t + h);
  return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector backward_euler_step(const VectorField& vf, const Vector& u, double t, double h, double inner_tol,
                           int inner_max) {
  if (!(h > 0)) throw InvalidArgument("backward_euler_step: h must be positive");
  const double t1 = t + h;
  auto residual = [&](const Vector& x) { return Vector(x - u - h * vf(x, t1)); };

  // Damped fixed-point iteration x <- (1 - w) x + w (u + h f(x)); halve w
  // whenever the residual grows.
  Vector x = u;
  double res = residual(x).norm();
  double w = 1.0;
  for (int it = 0; it < inner_max && res > inner_tol; ++it) {
    const Vector candidate = (1.0 - w) * x + w * (u + h * vf(x, t1));
    const double cres = candidate.allFinite() ? residual(candidate).norm() : INFINITY;
    if (cres < res) {
      x = candidate;
      res = cres;
    } else {
      w *= 0.5;
      if (w < 1e-6) break;
    }
  }
  if (res <= inner_tol) return x;

  if (vf.jacobian) {
    x = u;
    for (int it = 0; it < inner_max; ++it) {
      const Vector r = residual(x);
      res = r.norm();
      if (res <= inner_tol) return x;
      const Matrix jac = Matrix::Identity(u.size(), u.size()) - h * vf.jacobian(x, t1);
      x -= jac.partialPivLu().solve(r);
      require_finite(x, t1, "backward Euler Newton iterate");
    }
    res = residual(x).norm();
    if (res <= inner_tol) return x;
  }
  throw NumericalError("backward Euler inner solve did not converge at t=" + format_short(t1) +
                       " (residual " + format_short(res) + ")");
}

double weighted_rms(const Vector& err, const Vector& scale, double rel_tol, double abs_tol) {
  const Vector w = (abs_tol + rel_tol * scale.array().abs()).matrix();
  return std::sqrt((err.array() / w.array()).square().mean());
}

Trajectory integrate(const VectorField& vf, const Vector& u0, double t0, double t1, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(t1 > t0)) throw InvalidArgument("integrate: t1 must exceed t0");
  if (u0.size() != vf.dim) throw DimensionError("integrate: initial state has wrong length");
  require_finite(u0, t0, "initial state");

  Trajectory traj;
  traj.times.push_back(t0);
  traj.values.push_back(u0);
  Vector u = u0;
  double t = t0;
  const double span = t1 - t0;
  const double t_eps = 1e-13 * std::max(1.0, std::abs(t1));
  long steps = 0;

  auto accept = [&](double t_next, Vector u_next) {
    require_finite(u_next, t_next, "integrate");
    t = t_next;
    u = std::move(u_next);
    traj.times.push_back(t);
    traj.values.push_back(u);
  };

  if (cfg.method != Method::DP54Adaptive) {
    while (t1 - t > t_eps) {
      if (++steps > cfg.max_steps) {
        throw NumericalError("integrate: max_steps exceeded at t=" + format_short(t));
      }
      double h = std::min(cfg.step, t1 - t);
      // Avoid a sliver final step.
      if (t1 - (t + h) <= t_eps) h = t1 - t;
      const double t_next = (t1 - (t + h) <= t_eps) ? t1 : t + h;
      accept(t_next, cfg.method == Method::RK4Fixed
                         ? rk4_step(vf, u, t, h)
                         : backward_euler_step(vf, u, t, h, cfg.inner_tol, cfg.inner_max));
    }
    return traj;
  }

  // Adaptive Dormand-Prince with a PI step-size controller.
  constexpr double safety = 0.9, min_factor = 0.2, max_factor = 5.0;
  constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
  double h = std::min(cfg.step, span);
  double prev_err = 1.0;
  while (t1 - t > t_eps) {
    if (++steps > cfg.max_steps) {
      throw NumericalError("integrate: max_steps exceeded at t=" + format_short(t));
    }
    const bool last = h >= t1 - t;
    if (last) h = t1 - t;
    const EmbeddedStep s = dp54_step(vf, u, t, h);
    const Vector scale = u.cwiseAbs().cwiseMax(s.u_next.cwiseAbs());
    const double err = weighted_rms(s.error, scale, cfg.rel_tol, cfg.abs_tol);
    if (!std::isfinite(err)) throw NumericalError("integrate: non-finite error estimate at t=" + format_short(t));
    if (err <= 1.0) {
      const double e = std::max(err, 1e-10);
      double factor = safety * std::pow(e, -alpha) * std::pow(prev_err, beta);
      factor = std::clamp(factor, min_factor, max_factor);
      prev_err = std::max(err, 1e-4);
      accept(last ? t1 : t + h, s.u_next);
      h *= factor;
    } else {
      h *= std::max(min_factor, safety * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw NumericalError("integrate: step size underflow at t=" + format_short(t));
      }
    }
  }
  return traj;
}

Trajectory sample_on_grid(const VectorField& vf, const Trajectory& traj, const std::vector<double>& grid) {
  traj.validate();
  if (traj.empty()) throw InvalidArgument("sample_on_grid: empty trajectory");
  const double lo = traj.times.front(), hi = traj.times.back();
  Trajectory out;
  out.times = grid;
  out.values.reserve(grid.size());
  for (double tq : grid) {
    if (tq < lo || tq > hi) {
      throw InvalidArgument("sample_on_grid: time " + format_short(tq) + " outside [" + format_short(lo) + ", " +
                            format_short(hi) + "]");
    }
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), tq);
    const auto k = static_cast<std::size_t>(it - traj.times.begin());
    if (it != traj.times.end() && *it == tq) {
      out.values.push_back(traj.values[k]);
      continue;
    }
    const std::size_t i = k - 1;
    const double ta = traj.times[i], tb = traj.times[i + 1];
    const double h = tb - ta;
    const double s = (tq - ta) / h;
    const Vector& ya = traj.values[i];
    const Vector& yb = traj.values[i + 1];
    const Vector fa = vf(ya, ta);
    const Vector fb = vf(yb, tb);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    out.values.push_back(h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb);
  }
  return out;
}

core::Block trajectory_block(const VectorField& vf, Trajectory traj, Eigen::Index component) {
  if (component < 0 || component >= vf.dim) throw DimensionError("trajectory_block: component out of range");
  auto shared = std::make_shared<const Trajectory>(std::move(traj));
  return core::function_block("trajectory(" + vf.name + ")", 1, 1, [vf, shared, component](const Vector& t) {
    const auto s = sample_on_grid(vf, *shared, {t(0)});
    return Vector(Vector::Constant(1, s.values.front()(component)));
  });
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.values.empty() ? 0 : traj.values.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",u" << (i + 1);
  os << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(traj.values[k](i));
    os << "\n";
  }
}

}  // namespace hybrid::ode
