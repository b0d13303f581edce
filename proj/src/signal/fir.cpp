#include "hybrid/signal/fir.hpp"

#include "hybrid/signal/stft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace hybrid::signal {

namespace {

void require_odd(std::size_t n) {
  if (n % 2 == 0) throw InvalidArgument("FIR filters need an odd number of taps, got " + std::to_string(n));
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

FIRFilter design_lowpass(double cutoff, std::size_t numtaps) {
  require_odd(numtaps);
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw InvalidArgument("lowpass cutoff must lie in (0, 0.5)");
  const auto window = hann(numtaps, false);
  const double center = static_cast<double>(numtaps - 1) / 2.0;
  FIRFilter f;
  f.kind = FilterKind::Lowpass;
  f.cutoff = cutoff;
  f.taps.resize(numtaps);
  // Computed on the first half and mirrored so the taps are exactly symmetric.
  for (std::size_t i = 0; i <= numtaps / 2; ++i) {
    f.taps[i] = 2.0 * cutoff * sinc(2.0 * cutoff * (static_cast<double>(i) - center)) * window[i];
    f.taps[numtaps - 1 - i] = f.taps[i];
  }
  // The symmetric Hann window zeroes the end taps of a length-1 filter.
  if (numtaps == 1) f.taps[0] = 1.0;
  const double sum = std::accumulate(f.taps.begin(), f.taps.end(), 0.0);
  for (auto& t : f.taps) t /= sum;
  return f;
}

FIRFilter design_highpass_complement(const FIRFilter& low) {
  require_odd(low.taps.size());
  FIRFilter high;
  high.kind = FilterKind::Highpass;
  high.cutoff = low.cutoff;
  high.taps.resize(low.taps.size());
  for (std::size_t i = 0; i < low.taps.size(); ++i) high.taps[i] = -low.taps[i];
  high.taps[low.group_delay()] += 1.0;
  return high;
}

double magnitude_response(std::span<const double> taps, double f) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k));
  }
  return std::abs(acc);
}

std::vector<double> convolve_causal(std::span<const double> taps, std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    const std::size_t kmax = std::min(taps.size() - 1, n);
    for (std::size_t k = 0; k <= kmax; ++k) acc += taps[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

std::vector<double> filter_aligned(const FIRFilter& f, std::span<const double> x) {
  require_odd(f.taps.size());
  const std::size_t len = x.size();
  const auto c = static_cast<std::ptrdiff_t>(f.group_delay());
  if (len == 0) return {};
  if (c > 0 && static_cast<std::ptrdiff_t>(len) <= c) {
    throw InvalidArgument("filter_aligned: signal of " + std::to_string(len) + " samples is shorter than the group delay");
  }
  const auto n_len = static_cast<std::ptrdiff_t>(len);
  auto at = [&](std::ptrdiff_t i) {
    if (i < 0) i = -i;
    if (i >= n_len) i = 2 * (n_len - 1) - i;
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> y(len);
  for (std::ptrdiff_t n = 0; n < n_len; ++n) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(f.taps.size()); ++k) acc += f.taps[static_cast<std::size_t>(k)] * at(n + c - k);
    y[static_cast<std::size_t>(n)] = acc;
  }
  return y;
}

TimeSeries apply_fir(const FIRFilter& f, const TimeSeries& series) {
  series.validate();
  if (series.size() >= 3) {
    const double dt = series.times[1] - series.times[0];
    for (std::size_t k = 2; k < series.size(); ++k) {
      const double d = series.times[k] - series.times[k - 1];
      if (std::abs(d - dt) > 1e-9 * std::abs(dt)) {
        throw InvalidArgument("apply_fir: non-uniform sampling at index " + std::to_string(k));
      }
    }
  }
  TimeSeries out;
  out.times = series.times;
  out.values.assign(series.size(), Vector());
  if (series.empty()) return out;
  const Eigen::Index dim = series.values.front().size();
  for (auto& v : out.values) v.resize(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const auto comp = series.component(c);
    const auto filtered = filter_aligned(f, comp);
    for (std::size_t k = 0; k < filtered.size(); ++k) out.values[k](c) = filtered[k];
  }
  return out;
}

core::Block fir_block(FIRFilter f, std::size_t len) {
  const auto n = static_cast<Eigen::Index>(len);
  return core::function_block(f.kind == FilterKind::Highpass ? "fir_high" : "fir_low", n, n, [f = std::move(f)](const Vector& x) {
    const auto y = filter_aligned(f, {x.data(), static_cast<std::size_t>(x.size())});
    return Vector(Eigen::Map<const Vector>(y.data(), x.size()));
  });
}

}  // namespace hybrid::signal
