#pragma once

#include "hybrid/constraints/constraints.hpp"

namespace hybrid::constraints {

/// A closed 1-D magnetic circuit split into cells in series. Each cell e has
/// a length l_e and cross-section A_e and carries a field H_e and flux
/// density B_e. The state is laid out per cell as (H_1, B_1, H_2, B_2, ...).
/// The constraint space M holds the two field laws of the circuit:
///   sum_e H_e l_e = NI        (Ampere's law around the loop)
///   B_e A_e = Phi for all e   (one flux through every cross-section)
struct MagneticCircuit {
  std::vector<double> lengths;
  std::vector<double> areas;
  double ampere_turns = 1.0;
  /// Metric constant C: the cell distance is V_e (C dH^2 + dB^2 / C) with
  /// V_e = l_e A_e.
  double stiffness = 1.0;

  std::size_t cells() const { return lengths.size(); }
  void validate() const;

  /// Problem over the shared per-cell material data set of (H, B) pairs.
  DataDrivenCMProblem problem(std::vector<Vector> material_data) const;

  /// Direct solution for the linear law B = mu H.
  Vector linear_solution(double mu) const;
  double flux(const Vector& z) const;
  /// Largest violation of the two circuit laws at z.
  double constraint_residual(const Vector& z) const;
};

}  // namespace hybrid::constraints
