#pragma once

#include "hybrid/types.hpp"

#include <functional>
#include <string>

namespace hybrid::ode {

/// Right-hand side of du/dt = f(u, t; params).
struct VectorField {
  std::string name;
  Eigen::Index dim = 0;
  Vector params;
  std::function<Vector(const Vector& u, double t)> f;
  /// Optional analytic Jacobian df/du; enables Newton iterations in implicit
  /// steps.
  std::function<Matrix(const Vector& u, double t)> jacobian;

  /// Evaluates f, checking the state and result lengths.
  Vector operator()(const Vector& u, double t) const;

  /// The field g(u, t) = -f(u, t), used for integrating backwards in time
  /// for autonomous systems.
  VectorField negated() const;
};

/// Harmonic oscillator in state-space form: (s, v) -> (v, -s).
VectorField vf_harmonic();

/// Van der Pol oscillator: (s, v) -> (v, -s + mu v (1 - s^2)). mu = 0 is the
/// harmonic oscillator; negative mu is rejected.
VectorField vf_van_der_pol(double mu);

/// Lotka-Volterra predator-prey dynamics:
/// (u, w) -> (alpha u - beta u w, delta u w - gamma w).
VectorField vf_lotka_volterra(double alpha, double beta, double gamma, double delta);

/// First integral of the Lotka-Volterra system,
/// delta u - gamma ln u + beta w - alpha ln w.
double lotka_volterra_invariant(const Vector& state, double alpha, double beta, double gamma, double delta);

/// Linear time-invariant field u -> A u.
VectorField vf_linear(Matrix a);

}  // namespace hybrid::ode
