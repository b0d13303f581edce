#pragma once

#include "hybrid/types.hpp"

#include <functional>

namespace hybrid::gp {

struct NelderMeadOptions {
  int max_iterations = 400;
  /// Stop once every vertex lies within this distance (max-norm) of the best.
  double diameter_tol = 1e-6;
  double initial_step = 0.5;
  /// Optional box; points are clamped into it before evaluation.
  Vector lower, upper;
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `f` from `x0`. Non-finite values count as +infinity. Accepted
/// moves never increase the best value. Throws NumericalError if every
/// initial vertex is non-finite.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts);

}  // namespace hybrid::gp
