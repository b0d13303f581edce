#include "hybrid/constraints/magnetic_circuit.hpp"

#include <cmath>
#include <numeric>

namespace hybrid::constraints {

void MagneticCircuit::validate() const {
  if (lengths.empty() || lengths.size() != areas.size()) throw DimensionError("magnetic circuit: need matching lengths and areas");
  for (std::size_t e = 0; e < cells(); ++e) {
    if (!(lengths[e] > 0) || !(areas[e] > 0)) throw InvalidArgument("magnetic circuit: lengths and areas must be positive");
  }
  if (!std::isfinite(ampere_turns)) throw InvalidArgument("magnetic circuit: ampere_turns must be finite");
  if (!(stiffness > 0)) throw InvalidArgument("magnetic circuit: stiffness must be positive");
}

DataDrivenCMProblem MagneticCircuit::problem(std::vector<Vector> material_data) const {
  validate();
  const auto c = static_cast<Eigen::Index>(cells());
  const double total_length = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  DataDrivenCMProblem p;
  p.local_dim = 2;
  p.dataset = std::move(material_data);
  p.z0 = Vector::Zero(2 * c);
  for (Eigen::Index e = 0; e < c; ++e) p.z0(2 * e) = ampere_turns / total_length;

  // H directions keeping sum H_e l_e fixed, then the single flux direction.
  p.N = Matrix::Zero(2 * c, c);
  for (Eigen::Index j = 0; j + 1 < c; ++j) {
    p.N(2 * j, j) = 1.0 / lengths[j];
    p.N(2 * (c - 1), j) = -1.0 / lengths[c - 1];
  }
  for (Eigen::Index e = 0; e < c; ++e) p.N(2 * e + 1, c - 1) = 1.0 / areas[e];

  p.W = Matrix::Zero(2 * c, 2 * c);
  for (Eigen::Index e = 0; e < c; ++e) {
    const double volume = lengths[e] * areas[e];
    p.W(2 * e, 2 * e) = volume * stiffness;
    p.W(2 * e + 1, 2 * e + 1) = volume / stiffness;
  }
  return p;
}

Vector MagneticCircuit::linear_solution(double mu) const {
  validate();
  if (!(mu > 0)) throw InvalidArgument("magnetic circuit: permeability must be positive");
  double reluctance = 0.0;
  for (std::size_t e = 0; e < cells(); ++e) reluctance += lengths[e] / (mu * areas[e]);
  const double phi = ampere_turns / reluctance;
  Vector z(2 * cells());
  for (std::size_t e = 0; e < cells(); ++e) {
    z(2 * e) = phi / (mu * areas[e]);
    z(2 * e + 1) = phi / areas[e];
  }
  return z;
}

double MagneticCircuit::flux(const Vector& z) const {
  double sum = 0.0;
  for (std::size_t e = 0; e < cells(); ++e) sum += z(2 * e + 1) * areas[e];
  return sum / static_cast<double>(cells());
}

double MagneticCircuit::constraint_residual(const Vector& z) const {
  if (z.size() != static_cast<Eigen::Index>(2 * cells())) throw DimensionError("magnetic circuit: state has wrong length");
  double mmf = 0.0;
  for (std::size_t e = 0; e < cells(); ++e) mmf += z(2 * e) * lengths[e];
  double worst = std::abs(mmf - ampere_turns);
  const double phi = flux(z);
  for (std::size_t e = 0; e < cells(); ++e) worst = std::max(worst, std::abs(z(2 * e + 1) * areas[e] - phi));
  return worst;
}

}  // namespace hybrid::constraints
