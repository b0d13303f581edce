#pragma once

#include "hybrid/core/block.hpp"
#include "hybrid/types.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace hybrid::signal {

/// Hann window of length n. The periodic variant (denominator n) suits
/// spectral analysis; the symmetric one (denominator n - 1) suits filter
/// design.
std::vector<double> hann(std::size_t n, bool periodic);

/// One-sided magnitude spectrogram, frames as rows.
struct Spectrogram {
  std::size_t window_len = 0;
  std::size_t hop = 0;
  double sample_rate = 1.0;
  Matrix values;  ///< frames x (window_len / 2 + 1), nonnegative

  std::size_t frames() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t bins() const { return static_cast<std::size_t>(values.cols()); }
  double frame_start(std::size_t frame) const { return static_cast<double>(frame * hop) / sample_rate; }
  double bin_frequency(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate / static_cast<double>(window_len);
  }
};

/// Number of frames for a signal of `len` samples: 1 + (len - window_len) / hop.
std::size_t stft_frame_count(std::size_t len, std::size_t window_len, std::size_t hop);

/// Hann-windowed short-time Fourier transform magnitudes.
Spectrogram stft(std::span<const double> signal, std::size_t window_len, std::size_t hop, double sample_rate = 1.0);

/// Decibels relative to the spectrogram maximum, clamped below at floor_db
/// (< 0). An all-zero spectrogram maps to floor_db everywhere.
Matrix log_magnitude(const Spectrogram& s, double floor_db);

/// Block from a length-`signal_len` signal to its flattened (row-major)
/// log-magnitude spectrogram.
core::Block log_spectrogram_block(std::size_t signal_len, std::size_t window_len, std::size_t hop, double floor_db);

/// CSV with header `frame_start_s,<bin frequencies...>`, one row per frame.
void write_spectrogram_csv(std::ostream& os, const Spectrogram& s, const Matrix& values);

}  // namespace hybrid::signal
