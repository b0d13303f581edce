#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/types.hpp"

#include <optional>

namespace hybrid::core {
class NodeRegistry;
}

namespace hybrid::constraints {

/// Max-subtracted softmax. Requires finite entries.
Vector softmax(const Vector& v);

/// The affine set {z : A z = b} with the metric W used for projection
/// (identity when absent).
struct AffineConstraint {
  Matrix A;
  Vector b;
  std::optional<Matrix> W;

  /// Shapes, W symmetric positive definite, A full row rank.
  void validate() const;
};

/// W-orthogonal projection onto {A z = b}:
/// z - W^-1 A^T (A W^-1 A^T)^-1 (A z - b).
Vector project_affine(const Vector& z, const AffineConstraint& c);

core::Block softmax_block(Eigen::Index dim);
core::Block affine_projection_block(const AffineConstraint& c);

/// data_weight * MSE(pred, target) + physics_weight * mean(residual(pred)^2).
struct CompositeLoss {
  double data_weight = 1.0;
  double physics_weight = 0.0;
  std::optional<core::Block> physics_residual;

  void validate() const;
};

double composite_loss(const Vector& pred, const Vector& target, const CompositeLoss& cl);

/// Adds `softmax` (dim) and `affine_projection` (rows, cols, A, b, optional
/// W, all row-major lists) to a graph node registry.
void register_constraint_blocks(core::NodeRegistry& registry);

/// Alternating projection problem between the affine space
/// M = {z0 + N c} and a finite data set. N may have zero columns, in which
/// case M is the single point z0.
///
/// With local_dim == 0 every dataset entry is a full n-vector. With
/// local_dim > 0 the state splits into n / local_dim consecutive blocks, the
/// dataset holds local_dim-vectors, and each block is matched independently
/// (this is the usual per-cell material data set). W must then be block
/// diagonal with matching blocks.
struct DataDrivenCMProblem {
  Matrix N;
  Vector z0;
  std::vector<Vector> dataset;
  Matrix W;
  Eigen::Index local_dim = 0;

  Eigen::Index dim() const { return z0.size(); }
  Eigen::Index block_dim() const { return local_dim == 0 ? z0.size() : local_dim; }
  Eigen::Index blocks() const { return dim() / block_dim(); }
  void validate() const;
};

struct NearestResult {
  Vector z_star;
  double distance = 0.0;             ///< sqrt((z - z*)^T W (z - z*))
  std::vector<std::size_t> indices;  ///< chosen dataset index per block
};

/// Closest data point (per block when local). Ties go to the lowest index.
NearestResult nearest_datapoint(const Vector& z, const DataDrivenCMProblem& p);

/// argmin over M of the W-distance to z_star.
Vector project_to_M(const Vector& z_star, const DataDrivenCMProblem& p);

/// W-weighted squared distance (z - z*)^T W (z - z*).
double weighted_loss(const Vector& z, const Vector& z_star, const Matrix& W);

struct DataDrivenResult {
  Vector z;       ///< best iterate, in M
  Vector z_star;  ///< data point paired with z
  std::vector<double> loss_history;
  int iterations = 0;
  bool converged = false;
  bool cycle_detected = false;
};

/// Alternates nearest_datapoint and project_to_M starting from init (which
/// must lie in M). Stops when the loss changes by less than tol, when an
/// assignment repeats with period 2 to 4, or after max_iter iterations.
DataDrivenResult solve_data_driven(const DataDrivenCMProblem& p, const Vector& init, int max_iter = 200,
                                   double tol = 1e-8);

}  // namespace hybrid::constraints
