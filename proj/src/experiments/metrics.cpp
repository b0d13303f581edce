#include "hybrid/experiments/metrics.hpp"

#include "hybrid/types.hpp"

#include <cmath>

namespace hybrid::experiments {

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw DimensionError("rmse: length mismatch");
  if (pred.empty()) throw InvalidArgument("rmse: no points");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

Metrics compute_metrics(std::span<const double> pred, std::span<const double> truth, const std::vector<bool>& in_region) {
  if (pred.size() != truth.size() || in_region.size() != pred.size()) throw DimensionError("metrics: length mismatch");
  if (pred.empty()) throw InvalidArgument("metrics: no points");
  double all = 0.0, inside = 0.0, outside = 0.0;
  Metrics m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = (pred[i] - truth[i]) * (pred[i] - truth[i]);
    if (!std::isfinite(e)) throw NumericalError("metrics: non-finite error at point " + std::to_string(i));
    all += e;
    if (in_region[i]) {
      inside += e;
      ++m.n_blackout;
    } else {
      outside += e;
      ++m.n_nonblackout;
    }
  }
  m.rmse_overall = std::sqrt(all / static_cast<double>(pred.size()));
  if (m.n_blackout) m.rmse_blackout = std::sqrt(inside / static_cast<double>(m.n_blackout));
  if (m.n_nonblackout) m.rmse_nonblackout = std::sqrt(outside / static_cast<double>(m.n_nonblackout));
  return m;
}

nlohmann::ordered_json to_json(const Metrics& m) {
  return {{"rmse_overall", m.rmse_overall},
          {"rmse_blackout", m.rmse_blackout},
          {"rmse_nonblackout", m.rmse_nonblackout},
          {"n_blackout", m.n_blackout},
          {"n_nonblackout", m.n_nonblackout}};
}

}  // namespace hybrid::experiments
