#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/types.hpp"

#include <span>
#include <vector>

namespace hybrid::signal {

enum class FilterKind { Lowpass, Highpass, Custom };

/// Linear-phase FIR filter with an odd number of taps.
struct FIRFilter {
  std::vector<double> taps;
  FilterKind kind = FilterKind::Custom;
  double cutoff = 0.0;  ///< normalized frequency, cycles per sample

  std::size_t group_delay() const { return (taps.size() - 1) / 2; }
};

/// Hann-windowed sinc lowpass, rescaled so the taps sum to one.
/// cutoff in (0, 0.5) cycles/sample, numtaps odd.
FIRFilter design_lowpass(double cutoff, std::size_t numtaps);

/// Highpass whose taps are a centered unit impulse minus the lowpass taps, so
/// the pair sums to a pure delay of (N - 1) / 2 samples.
FIRFilter design_highpass_complement(const FIRFilter& low);

/// |H(f)| of the taps at normalized frequency f.
double magnitude_response(std::span<const double> taps, double f);

/// Causal convolution y[n] = sum_k h[k] x[n - k], zero initial conditions,
/// output length equal to input length.
std::vector<double> convolve_causal(std::span<const double> taps, std::span<const double> x);

/// Zero-phase filtering of a uniformly sampled signal: the group delay is
/// compensated and the edges are extended by reflection, so the output has
/// the input's length and alignment.
std::vector<double> filter_aligned(const FIRFilter& f, std::span<const double> x);

/// Applies filter_aligned to every component of a uniformly sampled series.
/// Throws InvalidArgument if sampling intervals differ by more than 1e-9
/// relative.
TimeSeries apply_fir(const FIRFilter& f, const TimeSeries& series);

/// Block filtering a whole length-`len` signal with filter_aligned.
core::Block fir_block(FIRFilter f, std::size_t len);

}  // namespace hybrid::signal
