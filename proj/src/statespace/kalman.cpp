#include "hybrid/statespace/kalman.hpp"

#include "hybrid/kv.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hybrid::statespace {

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("matrix_exp: matrix must be square");
  if (!m.allFinite()) throw InvalidArgument("matrix_exp: non-finite entries");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix x = m / std::ldexp(1.0, squarings);

  constexpr int q = 6;
  double c = 1.0;
  Matrix num = Matrix::Identity(n, n);
  Matrix den = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    power = power * x;
    num += c * power;
    den += (k % 2 ? -c : c) * power;
  }
  Matrix e = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

namespace {

bool symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void LinearSDEModel::validate() const {
  const auto n = F.rows();
  if (F.cols() != n) throw DimensionError("SDE model: F must be square");
  if (L.rows() != n) throw DimensionError("SDE model: L must have n rows");
  if (q_spectral.rows() != L.cols() || q_spectral.cols() != L.cols()) throw DimensionError("SDE model: q must be q x q");
  if (Hobs.cols() != n) throw DimensionError("SDE model: Hobs must have n columns");
  if (R.rows() != Hobs.rows() || R.cols() != Hobs.rows()) throw DimensionError("SDE model: R must be m x m");
  if (!symmetric(q_spectral, 1e-12) || !symmetric(R, 1e-12)) throw InvalidArgument("SDE model: q and R must be symmetric");
  if (Eigen::LLT<Matrix>(R).info() != Eigen::Success) throw InvalidArgument("SDE model: R must be positive definite");
}

Discretization discretize(const LinearSDEModel& model, double dt) {
  if (!(dt > 0)) throw InvalidArgument("discretize: dt must be positive");
  const auto n = model.state_dim();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -model.F;
  block.topRightCorner(n, n) = model.L * model.q_spectral * model.L.transpose();
  block.bottomRightCorner(n, n) = model.F.transpose();
  const Matrix e = matrix_exp(block * dt);
  Discretization d;
  d.A = e.bottomRightCorner(n, n).transpose();
  d.Q = symmetrize(d.A * e.topRightCorner(n, n));
  return d;
}

GaussianBelief kf_predict(const GaussianBelief& b, const Matrix& A, const Matrix& Q) {
  if (A.cols() != b.mean.size() || Q.rows() != A.rows()) throw DimensionError("kf_predict: dimension mismatch");
  return {A * b.mean, symmetrize(A * b.cov * A.transpose() + Q)};
}

UpdateResult kf_update(const GaussianBelief& b, const Matrix& Hobs, const Matrix& R, const Vector& y) {
  if (Hobs.cols() != b.mean.size() || Hobs.rows() != y.size() || R.rows() != y.size()) {
    throw DimensionError("kf_update: dimension mismatch");
  }
  if (!y.allFinite()) throw InvalidArgument("kf_update: non-finite observation");
  const Vector innovation = y - Hobs * b.mean;
  const Matrix s = symmetrize(Hobs * b.cov * Hobs.transpose() + R);
  const Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("kf_update: innovation covariance not positive definite");
  const Matrix gain = llt.solve(Hobs * b.cov).transpose();  // P H^T S^{-1}
  const Eigen::Index n = b.mean.size();
  const Matrix ikh = Matrix::Identity(n, n) - gain * Hobs;
  UpdateResult out;
  out.belief.mean = b.mean + gain * innovation;
  out.belief.cov = symmetrize(ikh * b.cov * ikh.transpose() + gain * R * gain.transpose());
  const Matrix lmat = llt.matrixL();
  const Vector whitened = lmat.triangularView<Eigen::Lower>().solve(innovation);
  const double logdet = 2.0 * lmat.diagonal().array().log().sum();
  out.loglik = -0.5 * (whitened.squaredNorm() + logdet + static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));
  return out;
}

FilterResult kf_filter_irregular(const LinearSDEModel& model, const TimeSeries& obs,
                                 const std::optional<core::Block>& encoder, const GaussianBelief& init,
                                 double init_time) {
  model.validate();
  obs.validate();
  if (!obs.empty() && obs.times.front() < init_time) {
    throw InvalidArgument("kf_filter_irregular: first observation precedes the initial belief");
  }
  FilterResult fr;
  GaussianBelief belief = init;
  double prev = init_time;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    try {
      const double dt = obs.times[k] - prev;
      GaussianBelief pred = belief;
      if (dt > 0) {
        const auto d = discretize(model, dt);
        pred = kf_predict(belief, d.A, d.Q);
      }
      const Vector y = encoder ? (*encoder)(obs.values[k]) : obs.values[k];
      auto up = kf_update(pred, model.Hobs, model.R, y);
      fr.times.push_back(obs.times[k]);
      fr.predicted.push_back(std::move(pred));
      fr.updated.push_back(up.belief);
      fr.loglik.push_back(up.loglik);
      fr.total_loglik += up.loglik;
      belief = std::move(up.belief);
      prev = obs.times[k];
    } catch (const Error& e) {
      throw NumericalError("filter step " + std::to_string(k) + ": " + e.what());
    }
  }
  return fr;
}

std::vector<GaussianBelief> rts_smooth(const LinearSDEModel& model, const FilterResult& fr) {
  const std::size_t n = fr.updated.size();
  if (fr.predicted.size() != n || fr.times.size() != n) throw InvalidArgument("rts_smooth: incomplete filter result");
  std::vector<GaussianBelief> smoothed(n);
  if (n == 0) return smoothed;
  smoothed[n - 1] = fr.updated[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    const auto d = discretize(model, fr.times[k + 1] - fr.times[k]);
    const auto& filt = fr.updated[k];
    const auto& pred = fr.predicted[k + 1];
    const Eigen::LLT<Matrix> llt(pred.cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("rts_smooth: predicted covariance at step " + std::to_string(k + 1) + " is singular");
    }
    const Matrix gain = llt.solve(d.A * filt.cov).transpose();  // P_f A^T P_p^{-1}
    smoothed[k].mean = filt.mean + gain * (smoothed[k + 1].mean - pred.mean);
    smoothed[k].cov = symmetrize(filt.cov + gain * (smoothed[k + 1].cov - pred.cov) * gain.transpose());
  }
  return smoothed;
}

Vector pack_belief(const GaussianBelief& b) {
  const auto n = b.mean.size();
  Vector v(n + n * n);
  v.head(n) = b.mean;
  v.tail(n * n) = Eigen::Map<const Vector>(b.cov.data(), n * n);
  return v;
}

GaussianBelief unpack_belief(const Vector& packed, Eigen::Index n) {
  if (packed.size() != n + n * n) throw DimensionError("unpack_belief: wrong packed length");
  return {packed.head(n), Eigen::Map<const Matrix>(packed.data() + n, n, n)};
}

core::RecurrentBlock kalman_recurrent_block(const LinearSDEModel& model, const std::optional<core::Block>& encoder,
                                            const GaussianBelief& init, Eigen::Index raw_obs_dim) {
  model.validate();
  const auto n = model.state_dim();
  if (encoder && (encoder->arity() != 1 || encoder->in_dims()[0] != raw_obs_dim || encoder->out_dim() != model.obs_dim())) {
    throw DimensionError("kalman_recurrent_block: encoder must map raw observations to obs_dim");
  }
  if (!encoder && raw_obs_dim != model.obs_dim()) throw DimensionError("kalman_recurrent_block: observation length mismatch");
  core::Block update("kalman_step", {n + n * n, raw_obs_dim, 1}, n + n * n,
                     [model, encoder, n](std::span<const Vector> in) {
                       GaussianBelief b = unpack_belief(in[0], n);
                       const double dt = in[2](0);
                       if (dt > 0) {
                         const auto d = discretize(model, dt);
                         b = kf_predict(b, d.A, d.Q);
                       }
                       const Vector y = encoder ? (*encoder)(in[1]) : in[1];
                       return pack_belief(kf_update(b, model.Hobs, model.R, y).belief);
                     });
  return core::RecurrentBlock(std::move(update), pack_belief(init));
}

void write_filter_csv(std::ostream& os, const FilterResult& fr) {
  const Eigen::Index n = fr.updated.empty() ? 0 : fr.updated.front().mean.size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",mean_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) os << ",var_" << i;
  os << ",loglik\n";
  for (std::size_t k = 0; k < fr.updated.size(); ++k) {
    os << format_double(fr.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(fr.updated[k].mean(i));
    for (Eigen::Index i = 0; i < n; ++i) os << "," << format_double(fr.updated[k].cov(i, i));
    os << "," << format_double(fr.loglik[k]) << "\n";
  }
}

}  // namespace hybrid::statespace
