#include "hybrid/ode/vector_field.hpp"

#include <cmath>

namespace hybrid::ode {

Vector VectorField::operator()(const Vector& u, double t) const {
  if (u.size() != dim) {
    throw DimensionError("vector field '" + name + "': state length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(dim));
  }
  Vector du = f(u, t);
  if (du.size() != dim) throw DimensionError("vector field '" + name + "' returned wrong length");
  return du;
}

VectorField VectorField::negated() const {
  VectorField g = *this;
  g.name = "-" + name;
  g.f = [f = f](const Vector& u, double t) { return Vector(-f(u, t)); };
  if (jacobian) g.jacobian = [j = jacobian](const Vector& u, double t) { return Matrix(-j(u, t)); };
  return g;
}

VectorField vf_harmonic() {
  VectorField vf;
  vf.name = "harmonic";
  vf.dim = 2;
  vf.f = [](const Vector& u, double) {
    Vector du(2);
    du << u(1), -u(0);
    return du;
  };
  vf.jacobian = [](const Vector&, double) {
    Matrix j(2, 2);
    j << 0, 1, -1, 0;
    return j;
  };
  return vf;
}

VectorField vf_van_der_pol(double mu) {
  if (!(mu >= 0.0)) throw InvalidArgument("Van der Pol damping mu must be nonnegative");
  VectorField vf;
  vf.name = "van_der_pol";
  vf.dim = 2;
  vf.params = Vector::Constant(1, mu);
  vf.f = [mu](const Vector& u, double) {
    Vector du(2);
    du << u(1), -u(0) + mu * u(1) * (1.0 - u(0) * u(0));
    return du;
  };
  vf.jacobian = [mu](const Vector& u, double) {
    Matrix j(2, 2);
    j << 0, 1, -1.0 - 2.0 * mu * u(0) * u(1), mu * (1.0 - u(0) * u(0));
    return j;
  };
  return vf;
}

VectorField vf_lotka_volterra(double alpha, double beta, double gamma, double delta) {
  if (!(alpha > 0 && beta > 0 && gamma > 0 && delta > 0)) {
    throw InvalidArgument("Lotka-Volterra parameters must all be positive");
  }
  VectorField vf;
  vf.name = "lotka_volterra";
  vf.dim = 2;
  vf.params = Vector(4);
  vf.params << alpha, beta, gamma, delta;
  vf.f = [=](const Vector& u, double) {
    Vector du(2);
    du << alpha * u(0) - beta * u(0) * u(1), delta * u(0) * u(1) - gamma * u(1);
    return du;
  };
  vf.jacobian = [=](const Vector& u, double) {
    Matrix j(2, 2);
    j << alpha - beta * u(1), -beta * u(0), delta * u(1), delta * u(0) - gamma;
    return j;
  };
  return vf;
}

double lotka_volterra_invariant(const Vector& s, double alpha, double beta, double gamma, double delta) {
  return delta * s(0) - gamma * std::log(s(0)) + beta * s(1) - alpha * std::log(s(1));
}

VectorField vf_linear(Matrix a) {
  if (a.rows() != a.cols()) throw DimensionError("linear field needs a square matrix");
  VectorField vf;
  vf.name = "linear";
  vf.dim = a.rows();
  vf.params = Eigen::Map<const Vector>(a.data(), a.size());
  vf.f = [a](const Vector& u, double) { return Vector(a * u); };
  vf.jacobian = [a](const Vector&, double) { return a; };
  return vf;
}

}  // namespace hybrid::ode
