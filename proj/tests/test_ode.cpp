#include "hybrid/ode/integrate.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace hybrid;
using namespace hybrid::ode;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

VectorField zero_field(Eigen::Index dim) {
  VectorField vf;
  vf.name = "zero";
  vf.dim = dim;
  vf.f = [dim](const Vector&, double) { return Vector(Vector::Zero(dim)); };
  return vf;
}

double max_position_error_vs_cos(const Trajectory& tr) {
  double err = 0;
  for (std::size_t k = 0; k < tr.size(); ++k) err = std::max(err, std::abs(tr.values[k](0) - std::cos(tr.times[k])));
  return err;
}

IntegratorConfig rk4(double h) {
  IntegratorConfig c;
  c.method = Method::RK4Fixed;
  c.step = h;
  return c;
}

IntegratorConfig dp54(double tol) {
  IntegratorConfig c;
  c.method = Method::DP54Adaptive;
  c.step = 0.01;
  c.rel_tol = tol;
  c.abs_tol = tol;
  return c;
}

}  // namespace

TEST_CASE("vector fields evaluate as stated") {
  const auto h = vf_harmonic();
  CHECK(h(vec2(1, 0), 0) == vec2(0, -1));
  CHECK(h(vec2(0, 1), 0) == vec2(1, 0));
  CHECK(vf_van_der_pol(5)(vec2(1, 0), 0) == vec2(0, -1));
  const auto vdp0 = vf_van_der_pol(0);
  for (double s : {-2.0, -0.3, 0.0, 1.7})
    for (double v : {-1.0, 0.0, 2.5}) CHECK(vdp0(vec2(s, v), 1.0) == h(vec2(s, v), 1.0));
  CHECK_THROWS_AS(vf_van_der_pol(-0.1), InvalidArgument);

  const double a = 1.1, b = 0.4, g = 0.4, d = 0.1;
  const auto lv = vf_lotka_volterra(a, b, g, d);
  CHECK(lv(vec2(g / d, a / b), 0).norm() < 1e-15);
  CHECK(lv(vec2(0.0, 3.0), 0)(0) == 0.0);
  CHECK_THROWS_AS(vf_lotka_volterra(1, 0, 1, 1), InvalidArgument);

  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(vf_linear(rot)(vec2(0.3, -0.7), 0) == h(vec2(0.3, -0.7), 0));
  CHECK_THROWS_AS(vf_linear(Matrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(h(Vector::Zero(3), 0), DimensionError);
}

TEST_CASE("integrate: trivial and analytic cases") {
  const auto flat = integrate(zero_field(3), Vector::Constant(3, 2.5), 0, 4, dp54(1e-8));
  for (const auto& v : flat.values) CHECK(v == Vector::Constant(3, 2.5));
  CHECK(flat.times.back() == 4.0);

  const auto quarter = integrate(vf_harmonic(), vec2(1, 0), 0, std::numbers::pi / 2, dp54(1e-8));
  CHECK(std::abs(quarter.values.back()(0)) < 1e-6);

  const auto decay = integrate(vf_linear(-Matrix::Identity(2, 2)), vec2(2, -1), 0, 3, dp54(1e-10));
  for (std::size_t k = 0; k < decay.size(); ++k) {
    const double e = std::exp(-decay.times[k]);
    CHECK(std::abs(decay.values[k](0) - 2 * e) < 1e-8);
    CHECK(std::abs(decay.values[k](1) + e) < 1e-8);
  }
  const auto still = integrate(vf_linear(Matrix::Zero(2, 2)), vec2(1, 2), 0, 1, rk4(0.1));
  CHECK(still.values.back() == vec2(1, 2));
}

TEST_CASE("integrate: rejects bad input and reports failures") {
  CHECK_THROWS_AS(integrate(vf_harmonic(), vec2(1, 0), 1, 1, dp54(1e-6)), InvalidArgument);
  CHECK_THROWS_AS(integrate(vf_harmonic(), Vector::Zero(3), 0, 1, dp54(1e-6)), DimensionError);
  auto cfg = rk4(0.01);
  cfg.max_steps = 10;
  try {
    integrate(vf_harmonic(), vec2(1, 0), 0, 1, cfg);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("t=0.1") != std::string::npos);
  }
  VectorField blowup = zero_field(1);
  blowup.f = [](const Vector& u, double) { return Vector(u.array().square() * 1e200); };
  CHECK_THROWS_AS(integrate(blowup, Vector::Constant(1, 1e200), 0, 1, rk4(0.5)), NumericalError);
  cfg.step = 0;
  CHECK_THROWS_AS(integrate(vf_harmonic(), vec2(1, 0), 0, 1, cfg), InvalidArgument);
}

TEST_CASE("RK4 global error is fourth order on the harmonic oscillator") {
  const double e1 = max_position_error_vs_cos(integrate(vf_harmonic(), vec2(1, 0), 0, 2 * std::numbers::pi, rk4(0.1)));
  const double e2 = max_position_error_vs_cos(integrate(vf_harmonic(), vec2(1, 0), 0, 2 * std::numbers::pi, rk4(0.05)));
  const double ratio = e1 / e2;
  CHECK(ratio >= 12);
  CHECK(ratio <= 20);
}

TEST_CASE("DP54 accuracy and Van der Pol / harmonic agreement") {
  auto cfg = dp54(1e-6);
  const auto tr = integrate(vf_harmonic(), vec2(1, 0), 0, 2 * std::numbers::pi, cfg);
  CHECK(max_position_error_vs_cos(tr) < 1e-4);

  const auto vdp = integrate(vf_van_der_pol(0), vec2(1, 0), 0, 2 * std::numbers::pi, cfg);
  REQUIRE(vdp.size() == tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK((vdp.values[k] - tr.values[k]).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("Lotka-Volterra first integral is conserved") {
  const double a = 1.0, b = 0.5, g = 1.0, d = 0.5;
  const auto lv = vf_lotka_volterra(a, b, g, d);
  // One period from (3, 1) is a little under 8 time units; integrate past it.
  const auto tr = integrate(lv, vec2(3, 1), 0, 8, dp54(1e-8));
  const double v0 = lotka_volterra_invariant(tr.values.front(), a, b, g, d);
  double drift = 0;
  for (const auto& s : tr.values) drift = std::max(drift, std::abs(lotka_volterra_invariant(s, a, b, g, d) - v0));
  CHECK(drift / std::abs(v0) < 1e-4);
}

TEST_CASE("Van der Pol mu=5 follows a bounded limit cycle matching a dense RK4 reference") {
  const auto vdp = vf_van_der_pol(5);
  std::vector<double> grid;
  for (int k = 0; k <= 500; ++k) grid.push_back(0.1 * k);
  const auto adaptive = sample_on_grid(vdp, integrate(vdp, vec2(1, 0), 0, 50, dp54(1e-8)), grid);
  const auto dense = integrate(vdp, vec2(1, 0), 0, 50, rk4(1e-3));
  double amp = 0, diff = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    amp = std::max(amp, std::abs(adaptive.values[k](0)));
    // The RK4 reference lands on the grid every 100 steps.
    diff = std::max(diff, std::abs(adaptive.values[k](0) - dense.values[100 * k](0)));
  }
  CHECK(amp <= 2.5);
  CHECK(amp > 1.9);
  CHECK(diff < 1e-5);
}

TEST_CASE("time reversal returns to the initial state") {
  const double T = 5.0;
  const auto fwd = integrate(vf_harmonic(), vec2(1, 0), 0, T, dp54(1e-10));
  const auto back = integrate(vf_harmonic().negated(), fwd.values.back(), 0, T, dp54(1e-10));
  CHECK((back.values.back() - vec2(1, 0)).norm() < 1e-6);
}

TEST_CASE("dp54_step") {
  const auto z = dp54_step(zero_field(2), vec2(1, 2), 0, 0.3);
  CHECK(z.u_next == vec2(1, 2));
  CHECK(z.error_norm == 0.0);

  VectorField c = zero_field(2);
  c.f = [](const Vector&, double) { return vec2(0.5, -2.0); };
  const auto s = dp54_step(c, vec2(1, 2), 0, 0.3);
  CHECK((s.u_next - vec2(1.15, 1.4)).norm() < 1e-15);
  CHECK(s.error_norm <= 1e-15);

  const double e1 = dp54_step(vf_harmonic(), vec2(1, 0), 0, 0.2).error_norm;
  const double e2 = dp54_step(vf_harmonic(), vec2(1, 0), 0, 0.1).error_norm;
  CHECK(e1 / e2 >= 24);
  CHECK(e1 / e2 <= 40);
  CHECK_THROWS_AS(dp54_step(vf_harmonic(), vec2(1, 0), 0, 0), InvalidArgument);
}

TEST_CASE("backward_euler_step") {
  CHECK(backward_euler_step(zero_field(2), vec2(1, 2), 0, 0.5, 1e-12, 50) == vec2(1, 2));

  VectorField decay = zero_field(1);
  decay.f = [](const Vector& u, double) { return Vector(-u); };
  const Vector u = Vector::Constant(1, 3.0);
  CHECK(std::abs(backward_euler_step(decay, u, 0, 1.0, 1e-13, 200)(0) - 1.5) < 1e-12);

  Matrix a(3, 3);
  a << -2, 1, 0, 0.5, -3, 1, 0, 2, -40;
  const Vector u0 = Vector::LinSpaced(3, 1, 2);
  const double h = 0.2;  // stiff enough that plain fixed-point iteration diverges
  const Vector direct = (Matrix::Identity(3, 3) - h * a).partialPivLu().solve(u0);
  CHECK((backward_euler_step(vf_linear(a), u0, 0, h, 1e-13, 200) - direct).cwiseAbs().maxCoeff() < 1e-10);

  VectorField no_jac = vf_linear(a);
  no_jac.jacobian = nullptr;
  CHECK_THROWS_AS(backward_euler_step(no_jac, u0, 0, 5.0, 1e-13, 30), NumericalError);
}

TEST_CASE("backward Euler integration tracks the harmonic oscillator at first order") {
  IntegratorConfig cfg;
  cfg.method = Method::BackwardEuler;
  cfg.step = 1e-3;
  const auto tr = integrate(vf_harmonic(), vec2(1, 0), 0, 1, cfg);
  CHECK(std::abs(tr.values.back()(0) - std::cos(1.0)) < 1e-3);
}

TEST_CASE("sample_on_grid") {
  const auto tr = integrate(vf_harmonic(), vec2(1, 0), 0, 2 * std::numbers::pi, rk4(0.1));
  const auto same = sample_on_grid(vf_harmonic(), tr, tr.times);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(same.values[k] == tr.values[k]);

  std::vector<double> mids;
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) mids.push_back(0.5 * (tr.times[k] + tr.times[k + 1]));
  const auto mid = sample_on_grid(vf_harmonic(), tr, mids);
  CHECK(max_position_error_vs_cos(mid) < 1e-5);

  const auto flat = integrate(zero_field(1), Vector::Constant(1, 7.0), 0, 1, rk4(0.25));
  for (const auto& v : sample_on_grid(zero_field(1), flat, {0.1, 0.33, 0.9}).values) CHECK(v(0) == doctest::Approx(7.0).epsilon(1e-15));

  CHECK_THROWS_AS(sample_on_grid(vf_harmonic(), tr, {-0.1}), InvalidArgument);
  CHECK_THROWS_AS(sample_on_grid(vf_harmonic(), tr, {7.0}), InvalidArgument);
}

TEST_CASE("trajectory CSV") {
  Trajectory tr;
  tr.times = {0.0, 0.1};
  tr.values = {vec2(1, 0), vec2(0.1, 1.0 / 3.0)};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  CHECK(os.str() == "t,u1,u2\n0,1,0\n0.1,0.1,0.3333333333333333\n");
  CHECK(std::stod("0.3333333333333333") == 1.0 / 3.0);
}
