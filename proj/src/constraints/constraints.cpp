#include "hybrid/constraints/constraints.hpp"

#include "hybrid/core/graph.hpp"
#include "hybrid/kv.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace hybrid::constraints {

namespace {

bool symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

std::string join(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (i + j ? "," : "") + format_double(m(i, j));
  return out;
}

Matrix row_major(const std::vector<double>& data, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ConfigError(what + ": expected rows*cols values");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), rows, cols);
}

const std::string& param(const std::map<std::string, std::string>& p, const std::string& key, const std::string& kind) {
  const auto it = p.find(key);
  if (it == p.end()) throw ConfigError("node kind '" + kind + "' requires parameter '" + key + "'");
  return it->second;
}

// Solves (N^T W N) c = N^T W (z* - z0) with a factorization reused across calls.
class MProjector {
 public:
  explicit MProjector(const DataDrivenCMProblem& p) : p_(p), wn_(p.W * p.N), gram_(p.N.transpose() * wn_) {
    if (p.N.cols() > 0 && (gram_.info() != Eigen::Success || gram_.rcond() < 1e-14)) {
      throw NumericalError("project_to_M: N^T W N is singular");
    }
  }
  Vector operator()(const Vector& z_star) const {
    if (z_star.size() != p_.dim()) throw DimensionError("project_to_M: point has wrong length");
    if (p_.N.cols() == 0) return p_.z0;
    const Vector c = gram_.solve(wn_.transpose() * (z_star - p_.z0));
    return p_.z0 + p_.N * c;
  }

 private:
  const DataDrivenCMProblem& p_;
  Matrix wn_;
  Eigen::LDLT<Matrix> gram_;
};

}  // namespace

Vector softmax(const Vector& v) {
  if (v.size() == 0) throw DimensionError("softmax: empty input");
  if (!v.allFinite()) throw InvalidArgument("softmax: non-finite input");
  const Vector e = (v.array() - v.maxCoeff()).exp().matrix();
  return e / e.sum();
}

void AffineConstraint::validate() const {
  if (A.rows() != b.size()) throw DimensionError("affine constraint: A rows must equal length of b");
  if (A.rows() == 0 || A.rows() > A.cols()) throw DimensionError("affine constraint: need 0 < rows(A) <= cols(A)");
  if (!A.allFinite() || !b.allFinite()) throw InvalidArgument("affine constraint: non-finite entries");
  if (W) {
    if (W->rows() != A.cols() || !symmetric(*W, 1e-12)) throw InvalidArgument("affine constraint: W must be symmetric n x n");
    if (Eigen::LLT<Matrix>(*W).info() != Eigen::Success) throw InvalidArgument("affine constraint: W must be positive definite");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() != A.rows()) {
    throw NumericalError("affine constraint: A is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(A.rows()) + ")");
  }
}

Vector project_affine(const Vector& z, const AffineConstraint& c) {
  c.validate();
  if (z.size() != c.A.cols()) throw DimensionError("project_affine: point has wrong length");
  // W^-1 A^T; for W = I this is just A^T.
  const Matrix winv_at = c.W ? Matrix(Eigen::LLT<Matrix>(*c.W).solve(c.A.transpose())) : Matrix(c.A.transpose());
  const Eigen::LLT<Matrix> schur(c.A * winv_at);
  if (schur.info() != Eigen::Success) throw NumericalError("project_affine: A W^-1 A^T not positive definite");
  Vector out = z - winv_at * schur.solve(c.A * z - c.b);
  // One refinement step removes the rounding left by the first solve.
  out -= winv_at * schur.solve(c.A * out - c.b);
  return out;
}

core::Block softmax_block(Eigen::Index dim) {
  if (dim <= 0) throw DimensionError("softmax block: dim must be positive");
  return core::Block("softmax", {dim}, dim, [](std::span<const Vector> in) { return softmax(in[0]); },
                     core::BlockSpec{"softmax", {{"dim", std::to_string(dim)}}});
}

core::Block affine_projection_block(const AffineConstraint& c) {
  c.validate();
  core::BlockSpec spec{"affine_projection",
                       {{"rows", std::to_string(c.A.rows())},
                        {"cols", std::to_string(c.A.cols())},
                        {"A", join(c.A)},
                        {"b", join(c.b.transpose())}}};
  if (c.W) spec.params["W"] = join(*c.W);
  const auto n = c.A.cols();
  return core::Block("affine_projection", {n}, n, [c](std::span<const Vector> in) { return project_affine(in[0], c); },
                     std::move(spec));
}

void CompositeLoss::validate() const {
  if (!(data_weight >= 0) || !(physics_weight >= 0)) throw InvalidArgument("composite loss: weights must be >= 0");
  if (data_weight == 0 && physics_weight == 0) throw InvalidArgument("composite loss: at least one weight must be > 0");
  if (physics_weight > 0 && !physics_residual) throw InvalidArgument("composite loss: physics weight needs a residual block");
}

double composite_loss(const Vector& pred, const Vector& target, const CompositeLoss& cl) {
  cl.validate();
  if (pred.size() != target.size() || pred.size() == 0) throw DimensionError("composite loss: pred/target length mismatch");
  double loss = cl.data_weight * (pred - target).squaredNorm() / static_cast<double>(pred.size());
  if (cl.physics_residual) {
    const Vector r = (*cl.physics_residual)(pred);
    if (r.size() > 0) loss += cl.physics_weight * r.squaredNorm() / static_cast<double>(r.size());
  }
  return loss;
}

void register_constraint_blocks(core::NodeRegistry& registry) {
  registry.add("softmax", [](const auto& p) {
    return softmax_block(static_cast<Eigen::Index>(parse_int(param(p, "dim", "softmax"), "softmax.dim")));
  });
  registry.add("affine_projection", [](const auto& p) {
    const auto rows = static_cast<Eigen::Index>(parse_int(param(p, "rows", "affine_projection"), "affine_projection.rows"));
    const auto cols = static_cast<Eigen::Index>(parse_int(param(p, "cols", "affine_projection"), "affine_projection.cols"));
    AffineConstraint c;
    c.A = row_major(parse_double_list(param(p, "A", "affine_projection"), "affine_projection.A"), rows, cols,
                    "affine_projection.A");
    c.b = row_major(parse_double_list(param(p, "b", "affine_projection"), "affine_projection.b"), rows, 1,
                    "affine_projection.b");
    if (auto it = p.find("W"); it != p.end()) {
      c.W = row_major(parse_double_list(it->second, "affine_projection.W"), cols, cols, "affine_projection.W");
    }
    return affine_projection_block(c);
  });
}

void DataDrivenCMProblem::validate() const {
  const auto n = dim();
  if (n == 0) throw DimensionError("data-driven problem: empty state");
  if (N.rows() != n || N.cols() > n) throw DimensionError("data-driven problem: N must be n x k with k <= n");
  if (W.rows() != n || !symmetric(W, 1e-12)) throw InvalidArgument("data-driven problem: W must be symmetric n x n");
  if (Eigen::LLT<Matrix>(W).info() != Eigen::Success) throw InvalidArgument("data-driven problem: W must be positive definite");
  if (local_dim < 0 || (local_dim > 0 && n % local_dim != 0)) {
    throw DimensionError("data-driven problem: local_dim must divide the state dimension");
  }
  if (dataset.empty()) throw InvalidArgument("data-driven problem: dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].size() != block_dim()) {
      throw DimensionError("data-driven problem: dataset entry " + std::to_string(i) + " has wrong length");
    }
  }
  if (local_dim > 0) {
    const auto d = local_dim;
    for (Eigen::Index bi = 0; bi < blocks(); ++bi)
      for (Eigen::Index bj = 0; bj < blocks(); ++bj)
        if (bi != bj && W.block(bi * d, bj * d, d, d).cwiseAbs().maxCoeff() != 0.0) {
          throw InvalidArgument("data-driven problem: W must be block diagonal when local_dim is set");
        }
  }
  if (N.cols() == 0) return;
  Eigen::ColPivHouseholderQR<Matrix> qr(N);
  qr.setThreshold(1e-12);
  if (qr.rank() != N.cols()) throw NumericalError("data-driven problem: N does not have full column rank");
}

double weighted_loss(const Vector& z, const Vector& z_star, const Matrix& W) {
  const Vector d = z - z_star;
  return d.dot(W * d);
}

NearestResult nearest_datapoint(const Vector& z, const DataDrivenCMProblem& p) {
  if (z.size() != p.dim()) throw DimensionError("nearest_datapoint: point has wrong length");
  if (p.dataset.empty()) throw InvalidArgument("nearest_datapoint: dataset is empty");
  const auto d = p.block_dim();
  NearestResult out;
  out.z_star.resize(p.dim());
  double total = 0.0;
  for (Eigen::Index b = 0; b < p.blocks(); ++b) {
    const auto zb = z.segment(b * d, d);
    const auto wb = p.W.block(b * d, b * d, d, d);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < p.dataset.size(); ++i) {
      const Vector diff = zb - p.dataset[i];
      const double dist = diff.dot(wb * diff);
      if (dist < best) {
        best = dist;
        best_i = i;
      }
    }
    out.z_star.segment(b * d, d) = p.dataset[best_i];
    out.indices.push_back(best_i);
    total += best;
  }
  out.distance = std::sqrt(std::max(total, 0.0));
  return out;
}

Vector project_to_M(const Vector& z_star, const DataDrivenCMProblem& p) { return MProjector(p)(z_star); }

DataDrivenResult solve_data_driven(const DataDrivenCMProblem& p, const Vector& init, int max_iter, double tol) {
  p.validate();
  if (max_iter <= 0) throw InvalidArgument("solve_data_driven: max_iter must be positive");
  if (!(tol > 0)) throw InvalidArgument("solve_data_driven: tol must be positive");
  const MProjector project(p);
  if (init.size() != p.dim()) throw DimensionError("solve_data_driven: init has wrong length");
  const double scale = std::max(1.0, init.cwiseAbs().maxCoeff());
  if ((project(init) - init).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw InvalidArgument("solve_data_driven: init does not lie in the constraint space");
  }

  DataDrivenResult res;
  std::deque<std::vector<std::size_t>> recent;  // last assignments, newest first
  Vector z = init;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    auto near = nearest_datapoint(z, p);
    z = project(near.z_star);
    const double loss = weighted_loss(z, near.z_star, p.W);
    res.loss_history.push_back(loss);
    res.iterations = it;
    if (loss < best) {
      best = loss;
      res.z = z;
      res.z_star = near.z_star;
    }
    // With M a single point the first projection is already final.
    if (p.N.cols() == 0 || (it > 1 && std::abs(loss - res.loss_history[it - 2]) < tol)) {
      res.converged = true;
      break;
    }
    for (std::size_t lag = 1; lag < recent.size() && lag < 4; ++lag) {
      if (recent[lag] == near.indices) res.cycle_detected = true;
    }
    if (res.cycle_detected) break;
    recent.push_front(std::move(near.indices));
    if (recent.size() > 4) recent.pop_back();
  }
  return res;
}

}  // namespace hybrid::constraints
