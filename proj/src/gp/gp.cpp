#include "hybrid/gp/gp.hpp"

#include "hybrid/experiments/prng.hpp"
#include "hybrid/gp/nelder_mead.hpp"
#include "hybrid/kv.hpp"

#include <cmath>
#include <numbers>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace hybrid::gp {

void SEKernelParams::validate() const {
  if (!(variance > 0) || !(lengthscale > 0)) {
    throw InvalidArgument("SE kernel variance and lengthscale must be positive");
  }
}

namespace {

// The SE kernel's tails drive Cholesky intermediates into the subnormal range,
// where x86 arithmetic is several times slower. Values that small cannot
// affect the likelihood, so the hyperparameter search runs with
// flush-to-zero and denormals-are-zero set, restoring the caller's mode after.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

}  // namespace

double se_kernel(const Vector& x, const Vector& xp, const SEKernelParams& p) {
  return p.variance * std::exp(-(x - xp).squaredNorm() / (2.0 * p.lengthscale * p.lengthscale));
}

Matrix se_kernel_matrix(const Matrix& a, const Matrix& b, const SEKernelParams& p) {
  if (a.cols() != b.cols()) throw DimensionError("kernel matrix: input dimensions differ");
  const double inv = 1.0 / (2.0 * p.lengthscale * p.lengthscale);
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) k(i, j) = p.variance * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return k;
}

std::pair<Matrix, double> cholesky_with_jitter(const Matrix& k) {
  const Eigen::Index n = k.rows();
  const double scale = k.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1));
  double jitter = 0.0;
  double factor = 1e-10;
  while (true) {
    Matrix kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(kj);
    if (llt.info() == Eigen::Success) {
      Matrix l = llt.matrixL();
      if (l.diagonal().minCoeff() > 0 && l.allFinite()) return {std::move(l), jitter};
    }
    if (factor > 1e-4 * 1.0000001) {
      throw NumericalError("Cholesky failed after jitter escalation (final jitter " + format_short(jitter) + ")");
    }
    jitter = factor * scale;
    factor *= 10.0;
  }
}

GPRegressor gp_fit(const Matrix& X, const Vector& y, const SEKernelParams& p, double noise_var) {
  p.validate();
  if (X.rows() < 1) throw InvalidArgument("gp_fit needs at least one training point");
  if (X.rows() != y.size()) throw DimensionError("gp_fit: X rows and y length differ");
  if (!(noise_var >= 0)) throw InvalidArgument("gp_fit: noise variance must be nonnegative");
  if (noise_var == 0.0) {
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = i + 1; j < X.rows(); ++j)
        if (X.row(i) == X.row(j)) {
          throw NumericalError("gp_fit: duplicate input rows " + std::to_string(i) + " and " + std::to_string(j) +
                               " with zero noise make the kernel matrix singular");
        }
  }
  GPRegressor reg;
  reg.X = X;
  reg.y = y;
  reg.params = p;
  reg.noise_var = noise_var;
  Matrix k = se_kernel_matrix(X, X, p);
  k.diagonal().array() += noise_var;
  std::tie(reg.chol, reg.jitter) = cholesky_with_jitter(k);
  const Vector w = reg.chol.triangularView<Eigen::Lower>().solve(y);
  reg.alpha = reg.chol.transpose().triangularView<Eigen::Upper>().solve(w);
  return reg;
}

GPPrediction gp_predict(const GPRegressor& reg, const Matrix& Xs) {
  if (Xs.cols() != reg.X.cols()) throw DimensionError("gp_predict: test inputs have wrong dimension");
  const Matrix ks = se_kernel_matrix(reg.X, Xs, reg.params);  // n x m
  GPPrediction out;
  out.mean = ks.transpose() * reg.alpha;
  const Matrix v = reg.chol.triangularView<Eigen::Lower>().solve(ks);
  out.variance = (reg.params.variance - v.colwise().squaredNorm().array()).matrix();
  const double tol = 1e-10 * std::max(1.0, reg.params.variance);
  for (Eigen::Index i = 0; i < out.variance.size(); ++i) {
    if (out.variance(i) < -tol) throw NumericalError("gp_predict: negative predictive variance");
    out.variance(i) = std::max(out.variance(i), 0.0);
  }
  return out;
}

double log_marginal_likelihood(const GPRegressor& reg) {
  const double n = static_cast<double>(reg.y.size());
  return -0.5 * reg.y.dot(reg.alpha) - reg.chol.diagonal().array().log().sum() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

HyperparamFit fit_hyperparams(const Matrix& X, const Vector& y, const Hyperparams& init, const HyperparamBounds& bounds) {
  if (X.rows() < 3) throw InvalidArgument("fit_hyperparams needs at least three points");
  const FlushDenormals ftz;
  auto to_log = [](const Hyperparams& h) {
    Vector v(3);
    v << std::log(h.kernel.variance), std::log(h.kernel.lengthscale), std::log(h.noise_var);
    return v;
  };
  auto from_log = [](const Vector& v) { return Hyperparams{{std::exp(v(0)), std::exp(v(1))}, std::exp(v(2))}; };

  NelderMeadOptions opts;
  opts.lower = to_log(bounds.lower);
  opts.upper = to_log(bounds.upper);
  // Pairwise squared distances are fixed across evaluations. The fast path
  // fills only the lower triangle and factors in place; a failed
  // factorization falls back to gp_fit with its jitter escalation.
  const Eigen::Index n = X.rows();
  Matrix sqdist(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) sqdist(i, j) = (X.row(i) - X.row(j)).squaredNorm();
  Matrix k(n, n);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const auto objective = [&](const Vector& v) {
    const Hyperparams h = from_log(v);
    const double inv = 1.0 / (2.0 * h.kernel.lengthscale * h.kernel.lengthscale);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) k(i, j) = h.kernel.variance * std::exp(-sqdist(i, j) * inv);
      k(j, j) += h.noise_var;
    }
    Eigen::LLT<Eigen::Ref<Matrix>> llt(k);
    if (llt.info() == Eigen::Success) {
      const auto l = llt.matrixL();
      const Vector w = l.solve(y);
      const double logdet_half = k.diagonal().array().log().sum();
      if (std::isfinite(logdet_half)) return 0.5 * w.squaredNorm() + logdet_half + 0.5 * static_cast<double>(n) * log2pi;
    }
    try {
      return -log_marginal_likelihood(gp_fit(X, y, h.kernel, h.noise_var));
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const Vector base = to_log(init);
  const double spread = std::log(4.0);
  Vector up(3), down(3);
  up << spread, spread, -spread;
  down << -spread, -spread, spread;

  HyperparamFit best;
  best.lml = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const Vector& start : {Vector(base), Vector(base + up), Vector(base + down)}) {
    NelderMeadResult r;
    try {
      r = nelder_mead(objective, start, opts);
    } catch (const NumericalError&) {
      continue;
    }
    best.evaluations += r.evaluations;
    if (!any || -r.value > best.lml) {
      best.params = from_log(r.x);
      best.lml = -r.value;
      best.converged = r.converged;
      any = true;
    }
  }
  if (!any) throw NumericalError("fit_hyperparams: log marginal likelihood non-finite at every start");
  return best;
}

Vector gp_sample_prior(const SEKernelParams& p, const Matrix& grid, std::uint64_t seed) {
  p.validate();
  const Matrix l = cholesky_with_jitter(se_kernel_matrix(grid, grid, p)).first;
  experiments::Prng rng(seed);
  Vector z(grid.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return l.triangularView<Eigen::Lower>() * z;
}

core::Block gp_mean_block(GPRegressor reg, std::string name) {
  const auto d = reg.X.cols();
  auto shared = std::make_shared<const GPRegressor>(std::move(reg));
  return core::function_block(std::move(name), d, 1, [shared](const Vector& x) {
    return Vector(gp_predict(*shared, x.transpose()).mean);
  });
}

Matrix column(const std::vector<double>& xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

}  // namespace hybrid::gp
