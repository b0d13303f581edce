#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/core/scan.hpp"
#include "hybrid/types.hpp"

#include <iosfwd>
#include <optional>

namespace hybrid::statespace {

/// exp(M) by scaling and squaring with a (6,6) Pade approximant.
/// Throws InvalidArgument for non-square or non-finite input.
Matrix matrix_exp(const Matrix& m);

/// Linear time-invariant SDE ds = F s dt + L dB (dB with spectral density
/// q_spectral), observed as y = Hobs s + v with v ~ N(0, R).
struct LinearSDEModel {
  Matrix F;
  Matrix L;
  Matrix q_spectral;
  Matrix Hobs;
  Matrix R;

  Eigen::Index state_dim() const { return F.rows(); }
  Eigen::Index obs_dim() const { return Hobs.rows(); }
  /// Checks shapes, symmetry of q_spectral and R, and R positive definite.
  void validate() const;
};

struct Discretization {
  Matrix A;  ///< exp(F dt)
  Matrix Q;  ///< integral of exp(F s) L q L^T exp(F s)^T over [0, dt]
};

/// Exact discretization over a step dt > 0 using the Van Loan block
/// matrix exponential.
Discretization discretize(const LinearSDEModel& model, double dt);

struct GaussianBelief {
  Vector mean;
  Matrix cov;
};

GaussianBelief kf_predict(const GaussianBelief& b, const Matrix& A, const Matrix& Q);

struct UpdateResult {
  GaussianBelief belief;
  double loglik = 0.0;  ///< log N(y; H mean, S)
};

/// Measurement update with Joseph-form covariance. Throws NumericalError if
/// the innovation covariance is not positive definite.
UpdateResult kf_update(const GaussianBelief& b, const Matrix& Hobs, const Matrix& R, const Vector& y);

struct FilterResult {
  std::vector<double> times;
  std::vector<GaussianBelief> predicted;
  std::vector<GaussianBelief> updated;
  std::vector<double> loglik;
  double total_loglik = 0.0;
};

/// Continuous-discrete filter over irregularly timed observations. The
/// initial belief holds at `init_time`, which must not come after the first
/// observation (if equal, the first prediction is skipped). Each raw
/// observation is passed through `encoder` (if given) before the update.
/// Step failures are rethrown naming the step index.
FilterResult kf_filter_irregular(const LinearSDEModel& model, const TimeSeries& obs,
                                 const std::optional<core::Block>& encoder, const GaussianBelief& init,
                                 double init_time);

/// Rauch-Tung-Striebel smoother over a complete filter result.
std::vector<GaussianBelief> rts_smooth(const LinearSDEModel& model, const FilterResult& fr);

/// Packs a belief as [mean; column-major cov].
Vector pack_belief(const GaussianBelief& b);
GaussianBelief unpack_belief(const Vector& packed, Eigen::Index n);

/// The filter's predict/encode/update step as a recurrent block over packed
/// beliefs, for use with core::scan.
core::RecurrentBlock kalman_recurrent_block(const LinearSDEModel& model, const std::optional<core::Block>& encoder,
                                            const GaussianBelief& init, Eigen::Index raw_obs_dim);

/// CSV with header `t,mean_1..mean_n,var_1..var_n,loglik` over updated beliefs.
void write_filter_csv(std::ostream& os, const FilterResult& fr);

}  // namespace hybrid::statespace
