#include "hybrid/types.hpp"

namespace hybrid {

void TimeSeries::validate() const {
  if (times.size() != values.size()) {
    throw InvalidArgument("time series has " + std::to_string(times.size()) + " timestamps but " +
                          std::to_string(values.size()) + " samples");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw InvalidArgument("timestamps not strictly increasing at index " + std::to_string(k));
    }
  }
}

TimeSeries TimeSeries::scalar(std::vector<double> times, const std::vector<double>& samples) {
  TimeSeries ts;
  ts.times = std::move(times);
  ts.values.reserve(samples.size());
  for (double s : samples) ts.values.push_back(Vector::Constant(1, s));
  return ts;
}

std::vector<double> TimeSeries::component(Eigen::Index index) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (index >= v.size()) throw DimensionError("component index out of range");
    out.push_back(v(index));
  }
  return out;
}

}  // namespace hybrid
