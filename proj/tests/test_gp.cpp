#include "hybrid/experiments/prng.hpp"
#include "hybrid/gp/gp.hpp"
#include "hybrid/gp/nelder_mead.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hybrid;
using namespace hybrid::gp;
using hybrid::experiments::Prng;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

Matrix random_inputs(Prng& rng, int n, double lo, double hi) {
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = lo + (hi - lo) * rng.uniform();
  return x;
}

Vector random_targets(Prng& rng, int n) {
  Vector y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal();
  return y;
}

// Dense-inverse reference for the posterior and the evidence.
struct DenseOracle {
  Matrix kinv;
  double logdet;
  DenseOracle(const Matrix& x, const SEKernelParams& p, double noise) {
    Matrix k = se_kernel_matrix(x, x, p);
    k.diagonal().array() += noise;
    Eigen::FullPivLU<Matrix> lu(k);
    kinv = lu.inverse();
    logdet = std::log(lu.determinant());
  }
};

}  // namespace

TEST_CASE("se_kernel") {
  CHECK(se_kernel(scalar(1.3), scalar(1.3), {0.2, 0.5}) == doctest::Approx(0.2));
  CHECK(se_kernel(scalar(0), scalar(1e3), {1, 0.5}) == 0.0);
  CHECK(se_kernel(scalar(0), scalar(0.5), {1, 0.5}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(std::exp(-0.5) == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK(se_kernel(scalar(2), scalar(-1), {0.7, 1.2}) == se_kernel(scalar(-1), scalar(2), {0.7, 1.2}));
}

TEST_CASE("gp_fit") {
  const auto one = gp_fit(Matrix::Zero(1, 1), Vector::Ones(1), {0.2, 0.5}, 0.0);
  CHECK(one.alpha(0) == doctest::Approx(1.0 / 0.2));
  CHECK(one.jitter == 0.0);

  Matrix dup(3, 1);
  dup << 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(gp_fit(dup, Vector::Ones(3), {1, 1}, 0.0), NumericalError);
  CHECK_NOTHROW(gp_fit(dup, Vector::Ones(3), {1, 1}, 0.01));
  CHECK_THROWS_AS(gp_fit(dup, Vector::Ones(2), {1, 1}, 0.1), DimensionError);
  CHECK_THROWS_AS(gp_fit(dup, Vector::Ones(3), {-1, 1}, 0.1), InvalidArgument);

  Prng rng(3);
  const Matrix x = random_inputs(rng, 30, 0, 10);
  const Vector y = random_targets(rng, 30);
  const auto reg = gp_fit(x, y, {0.8, 0.7}, 0.05);
  Matrix k = se_kernel_matrix(x, x, reg.params);
  k.diagonal().array() += reg.noise_var + reg.jitter;
  CHECK((reg.chol * reg.chol.transpose() - k).norm() / k.norm() < 1e-10);
  CHECK((k * reg.alpha - y).norm() / y.norm() < 1e-8);
}

TEST_CASE("cholesky jitter escalation") {
  Matrix singular = Matrix::Ones(4, 4);
  const auto [l, jitter] = cholesky_with_jitter(singular);
  CHECK(jitter > 0);
  CHECK(jitter <= 1e-4);
  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1;
  try {
    cholesky_with_jitter(indefinite);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("final jitter") != std::string::npos);
  }
}

TEST_CASE("gp_predict basics") {
  Matrix x(3, 1);
  x << 0, 1, 2.5;
  Vector y(3);
  y << 0.3, -1, 2;
  const auto reg = gp_fit(x, y, {1.5, 0.8}, 0.0);
  const auto at = gp_predict(reg, x);
  CHECK((at.mean - y).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(at.variance.maxCoeff() <= 1e-8);

  const auto far = gp_predict(reg, Matrix::Constant(1, 1, 100));
  CHECK(std::abs(far.mean(0)) < 1e-6);
  CHECK(std::abs(far.variance(0) - 1.5) < 1e-6);
  CHECK_THROWS_AS(gp_predict(reg, Matrix::Zero(1, 2)), DimensionError);
}

TEST_CASE("gp_predict matches an explicit 2x2 solve") {
  Matrix x(2, 1);
  x << 0, 1;
  Vector y(2);
  y << 1, 0;
  const auto reg = gp_fit(x, y, {1, 1}, 0.1);
  const auto pred = gp_predict(reg, Matrix::Constant(1, 1, 0.5));

  // K + s I = [[a, b], [b, a]], k* = (c, c).
  const double a = 1.1, b = std::exp(-0.5), c = std::exp(-0.125);
  const double det = a * a - b * b;
  const double w0 = (a * c - b * c) / det;  // row of k*^T (K + sI)^{-1}
  const double w1 = (a * c - b * c) / det;
  const double mean = w0 * 1 + w1 * 0;
  const double var = 1 - (w0 * c + w1 * c);
  CHECK(pred.mean(0) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(pred.variance(0) == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("log marginal likelihood") {
  const auto reg = gp_fit(Matrix::Zero(1, 1), Vector::Zero(1), {0.6, 1}, 0.4);
  CHECK(log_marginal_likelihood(reg) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(log_marginal_likelihood(reg) == doctest::Approx(-0.9189).epsilon(1e-4));

  Prng rng(8);
  const Matrix x = random_inputs(rng, 20, 0, 5);
  const Vector y = random_targets(rng, 20);
  const SEKernelParams p{1, 1};
  CHECK(log_marginal_likelihood(gp_fit(x, 10 * y, p, 0.1)) < log_marginal_likelihood(gp_fit(x, y, p, 0.1)));

  for (int trial = 0; trial < 10; ++trial) {
    const Matrix xs = random_inputs(rng, 20, 0, 8);
    const Vector ys = random_targets(rng, 20);
    const SEKernelParams q{0.5 + rng.uniform(), 0.3 + rng.uniform()};
    const double noise = 0.05 + 0.2 * rng.uniform();
    const DenseOracle o(xs, q, noise);
    const double dense = -0.5 * ys.dot(o.kinv * ys) - 0.5 * o.logdet - 10 * std::log(2 * std::numbers::pi);
    CHECK(std::abs(log_marginal_likelihood(gp_fit(xs, ys, q, noise)) - dense) < 1e-8);
  }
}

TEST_CASE("posterior agrees with dense inverse and respects variance bounds") {
  Prng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(46));
    const Matrix x = random_inputs(rng, n, 0, 10);
    const Vector y = random_targets(rng, n);
    const SEKernelParams p{0.2 + rng.uniform(), 0.3 + rng.uniform()};
    const double noise = 0.05 + 0.1 * rng.uniform();
    const auto reg = gp_fit(x, y, p, noise);
    const Matrix xs = random_inputs(rng, 25, -2, 12);
    const auto pred = gp_predict(reg, xs);
    const DenseOracle o(x, p, noise);
    const Matrix ks = se_kernel_matrix(x, xs, p);
    const Vector mean = ks.transpose() * o.kinv * y;
    const Vector var = (p.variance - (ks.transpose() * o.kinv * ks).diagonal().array()).matrix();
    CHECK((pred.mean - mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pred.variance - var).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pred.variance.maxCoeff() <= p.variance + 1e-10);

    // One more training point never increases the variance.
    Matrix x2(n + 1, 1);
    x2 << x, Matrix::Constant(1, 1, 10 * rng.uniform());
    Vector y2(n + 1);
    y2 << y, rng.normal();
    const auto more = gp_predict(gp_fit(x2, y2, p, noise), xs);
    CHECK((more.variance - pred.variance).maxCoeff() <= 1e-9);

    // Training-row order does not matter.
    const auto perm = rng.permutation(static_cast<std::size_t>(n));
    Matrix xp(n, 1);
    Vector yp(n);
    for (int i = 0; i < n; ++i) {
      xp(i, 0) = x(static_cast<Eigen::Index>(perm[i]), 0);
      yp(i) = y(static_cast<Eigen::Index>(perm[i]));
    }
    const auto permuted = gp_predict(gp_fit(xp, yp, p, noise), xs);
    CHECK((permuted.mean - pred.mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((permuted.variance - pred.variance).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Nelder-Mead minimizes a quadratic and rejects hopeless starts") {
  NelderMeadOptions opts;
  const auto r = nelder_mead([](const Vector& v) { return (v - Vector::LinSpaced(3, 1, 3)).squaredNorm(); },
                             Vector::Zero(3), opts);
  CHECK(r.converged);
  CHECK((r.x - Vector::LinSpaced(3, 1, 3)).cwiseAbs().maxCoeff() < 1e-5);
  CHECK_THROWS_AS(nelder_mead([](const Vector&) { return NAN; }, Vector::Zero(2), opts), NumericalError);
}

TEST_CASE("fit_hyperparams on degenerate data drives variances to their bounds") {
  Matrix x(20, 1);
  for (int i = 0; i < 20; ++i) x(i, 0) = 0.5 * i;
  HyperparamBounds bounds;
  bounds.lower = {{1e-4, 0.05}, 1e-5};
  bounds.upper = {{10, 10}, 10};
  const auto fit = fit_hyperparams(x, Vector::Zero(20), {{1, 1}, 0.1}, bounds);
  CHECK(fit.params.kernel.variance <= 1.01e-4);
  CHECK(fit.params.noise_var <= 1.01e-5);
}

TEST_CASE("fit_hyperparams does not lose likelihood when restarted at its optimum") {
  Prng rng(4);
  const Matrix x = random_inputs(rng, 60, 0, 10);
  Vector y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::sin(x(i, 0)) + 0.1 * rng.normal();
  const auto first = fit_hyperparams(x, y, {{1, 1}, 0.1});
  const auto again = fit_hyperparams(x, y, first.params);
  CHECK(again.lml >= first.lml - 1e-12);
  const auto& p = first.params;
  CHECK(first.lml == doctest::Approx(log_marginal_likelihood(gp_fit(x, y, p.kernel, p.noise_var))).epsilon(1e-12));
  CHECK_THROWS_AS(fit_hyperparams(x.topRows(2), y.head(2), {{1, 1}, 0.1}), InvalidArgument);
}

TEST_CASE("gp_sample_prior") {
  Matrix grid(50, 1);
  for (int i = 0; i < 50; ++i) grid(i, 0) = 0.1 * i;
  CHECK(gp_sample_prior({1e-14, 0.5}, grid, 1).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(gp_sample_prior({0.2, 0.5}, grid, 9) == gp_sample_prior({0.2, 0.5}, grid, 9));
  CHECK(gp_sample_prior({0.2, 0.5}, grid, 9) != gp_sample_prior({0.2, 0.5}, grid, 10));

  const double sf2 = 0.2;
  double sum = 0, sum2 = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const double v = gp_sample_prior({sf2, 0.5}, grid, s)(17);
    sum += v;
    sum2 += v * v;
  }
  const double var = sum2 / 500 - (sum / 500) * (sum / 500);
  CHECK(std::abs(var - sf2) < 0.1 * sf2);

  const Vector smooth = gp_sample_prior({1.0, 500.0}, grid, 2);
  CHECK(smooth.maxCoeff() - smooth.minCoeff() < 0.1);
}

TEST_CASE("gp_mean_block evaluates the posterior mean") {
  Matrix x(2, 1);
  x << 0, 1;
  const auto reg = gp_fit(x, Vector::Ones(2), {1, 1}, 0.01);
  const auto block = gp_mean_block(reg);
  CHECK(block(scalar(0.4))(0) == doctest::Approx(gp_predict(reg, Matrix::Constant(1, 1, 0.4)).mean(0)));
}
