#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/ode/vector_field.hpp"

#include <iosfwd>

namespace hybrid::ode {

enum class Method { RK4Fixed, DP54Adaptive, BackwardEuler };

struct IntegratorConfig {
  Method method = Method::DP54Adaptive;
  /// Fixed step for RK4 / backward Euler; initial step for DP54.
  double step = 0.01;
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  long max_steps = 1'000'000;
  /// Inner solve of the implicit step.
  double inner_tol = 1e-12;
  int inner_max = 200;

  /// Throws InvalidArgument unless step, tolerances and max_steps are
  /// positive.
  void validate() const;
};

/// Integrates u' = f(u, t) from (t0, u0) to t1 and returns every accepted
/// step. The last sample is exactly at t1.
///
/// Failure modes (NumericalError): max_steps exhausted (message names the
/// last reached time), non-finite state, implicit inner solve not converging.
Trajectory integrate(const VectorField& vf, const Vector& u0, double t0, double t1, const IntegratorConfig& cfg);

struct EmbeddedStep {
  Vector u_next;  ///< fifth-order solution
  Vector error;   ///< fifth minus fourth-order solution
  double error_norm = 0.0;  ///< Euclidean norm of `error`
};

/// One Dormand-Prince 5(4) step of size h.
EmbeddedStep dp54_step(const VectorField& vf, const Vector& u, double t, double h);

/// One classical fourth-order Runge-Kutta step.
Vector rk4_step(const VectorField& vf, const Vector& u, double t, double h);

/// Solves u_next = u + h f(u_next, t + h). Uses damped fixed-point iteration
/// first and falls back to Newton's method when the field has a Jacobian.
/// Throws NumericalError with the final residual if neither converges.
Vector backward_euler_step(const VectorField& vf, const Vector& u, double t, double h, double inner_tol,
                           int inner_max);

/// Weighted RMS norm with per-component weight abs_tol + rel_tol * |scale_i|.
double weighted_rms(const Vector& err, const Vector& scale, double rel_tol, double abs_tol);

/// Cubic Hermite interpolation of a stored trajectory at arbitrary times in
/// its range, using the field to supply the derivatives at stored states.
Trajectory sample_on_grid(const VectorField& vf, const Trajectory& traj, const std::vector<double>& grid);

/// Block mapping a time (length-1 input) to component `component` of the
/// interpolated trajectory.
core::Block trajectory_block(const VectorField& vf, Trajectory traj, Eigen::Index component);

/// CSV with header `t,u1,...,un`; values round-trip exactly.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace hybrid::ode
