#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/types.hpp"

#include <cstdint>

namespace hybrid::gp {

/// Squared-exponential kernel parameters: signal variance and lengthscale.
struct SEKernelParams {
  double variance = 1.0;
  double lengthscale = 1.0;

  void validate() const;
};

/// sigma_f^2 * exp(-|x - x'|^2 / (2 l^2)).
double se_kernel(const Vector& x, const Vector& xp, const SEKernelParams& p);

/// Covariance matrix between the rows of `a` and the rows of `b`.
Matrix se_kernel_matrix(const Matrix& a, const Matrix& b, const SEKernelParams& p);

/// Exact zero-mean GP regressor conditioned on (X, y).
struct GPRegressor {
  Matrix X;  ///< n x d training inputs, one row per point
  Vector y;
  SEKernelParams params;
  double noise_var = 0.0;
  double jitter = 0.0;  ///< diagonal jitter that made the factorization succeed
  Matrix chol;          ///< lower factor L of K + (noise_var + jitter) I
  Vector alpha;         ///< (K + (noise_var + jitter) I)^{-1} y
};

struct GPPrediction {
  Vector mean;
  Vector variance;  ///< latent-function variance (excludes observation noise)
};

/// Lower Cholesky factor of `k` with jitter escalation: tries 0, then
/// 1e-10 * trace(k)/n increased tenfold up to 1e-4 * trace(k)/n. Returns the
/// factor and the jitter used; throws NumericalError reporting the final
/// jitter if every attempt fails.
std::pair<Matrix, double> cholesky_with_jitter(const Matrix& k);

/// Factorizes K + noise_var I and solves for the weights. With zero noise,
/// duplicated input rows are rejected (the kernel matrix is singular).
GPRegressor gp_fit(const Matrix& X, const Vector& y, const SEKernelParams& p, double noise_var);

GPPrediction gp_predict(const GPRegressor& reg, const Matrix& Xs);

/// -1/2 y^T alpha - sum log L_ii - n/2 log 2 pi.
double log_marginal_likelihood(const GPRegressor& reg);

struct Hyperparams {
  SEKernelParams kernel;
  double noise_var = 0.1;
};

struct HyperparamBounds {
  Hyperparams lower{{1e-6, 1e-3}, 1e-8};
  Hyperparams upper{{1e3, 1e3}, 1e3};
};

struct HyperparamFit {
  Hyperparams params;
  double lml = 0.0;
  bool converged = false;  ///< true if the winning restart met the simplex-size test
  int evaluations = 0;
};

/// Maximizes the log marginal likelihood over (variance, lengthscale,
/// noise_var) with Nelder-Mead in log space, clamped to `bounds`. Runs three
/// restarts (from the initial guess and two scaled copies of it) and returns
/// the best vertex found.
HyperparamFit fit_hyperparams(const Matrix& X, const Vector& y, const Hyperparams& init,
                              const HyperparamBounds& bounds = {});

/// Draws one sample from N(0, K + jitter I) over the rows of `grid`.
Vector gp_sample_prior(const SEKernelParams& p, const Matrix& grid, std::uint64_t seed);

/// Posterior-mean block over 1-D inputs (input length d, output length 1).
core::Block gp_mean_block(GPRegressor reg, std::string name = "gp");

/// Single-column matrix from scalar inputs.
Matrix column(const std::vector<double>& xs);

}  // namespace hybrid::gp
