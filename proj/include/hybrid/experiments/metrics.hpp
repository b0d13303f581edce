#pragma once

#include <json.hpp>

#include <span>

namespace hybrid::experiments {

double rmse(std::span<const double> pred, std::span<const double> truth);

/// RMSE overall and on the two halves of a partition of the points
/// (`in_region[i]` marks the blackout region). A region with no points
/// reports 0 and count 0.
struct Metrics {
  double rmse_overall = 0.0;
  double rmse_blackout = 0.0;
  double rmse_nonblackout = 0.0;
  std::size_t n_blackout = 0;
  std::size_t n_nonblackout = 0;
};

Metrics compute_metrics(std::span<const double> pred, std::span<const double> truth, const std::vector<bool>& in_region);

nlohmann::ordered_json to_json(const Metrics& m);

}  // namespace hybrid::experiments
