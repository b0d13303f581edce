#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hybrid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input shape or arity does not match what an operation declares.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on argument values was violated (e.g. a negative rate).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: non-convergence, loss of definiteness,
/// non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Strictly increasing timestamps with one vector sample per timestamp.
/// Used for ODE output, sensor data and filter input/output alike.
struct TimeSeries {
  std::vector<double> times;
  std::vector<Vector> values;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }

  /// Throws InvalidArgument unless lengths agree and times are strictly
  /// increasing.
  void validate() const;

  /// Builds a series of scalar samples.
  static TimeSeries scalar(std::vector<double> times, const std::vector<double>& samples);

  /// Extracts component `index` of every sample.
  std::vector<double> component(Eigen::Index index) const;
};

using Trajectory = TimeSeries;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace hybrid
