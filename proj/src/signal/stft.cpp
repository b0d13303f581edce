#include "hybrid/signal/stft.hpp"

#include "hybrid/kv.hpp"
#include "hybrid/signal/fft.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hybrid::signal {

std::vector<double> hann(std::size_t n, bool periodic) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = static_cast<double>(periodic ? n : n - 1);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  return w;
}

std::size_t stft_frame_count(std::size_t len, std::size_t window_len, std::size_t hop) {
  if (hop == 0) throw InvalidArgument("stft: hop must be positive");
  if (len < window_len) throw InvalidArgument("stft: signal shorter than one window");
  return 1 + (len - window_len) / hop;
}

Spectrogram stft(std::span<const double> signal, std::size_t window_len, std::size_t hop, double sample_rate) {
  if (!is_power_of_two(window_len)) throw InvalidArgument("stft: window length must be a power of two");
  if (hop == 0 || hop > window_len) throw InvalidArgument("stft: hop must lie in (0, window_len]");
  if (!(sample_rate > 0)) throw InvalidArgument("stft: sample rate must be positive");
  const std::size_t frames = stft_frame_count(signal.size(), window_len, hop);
  const auto window = hann(window_len, true);
  Spectrogram s;
  s.window_len = window_len;
  s.hop = hop;
  s.sample_rate = sample_rate;
  s.values.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(window_len / 2 + 1));
  std::vector<Complex> buf(window_len);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < window_len; ++i) buf[i] = signal[f * hop + i] * window[i];
    const auto spec = fft(buf);
    for (std::size_t b = 0; b <= window_len / 2; ++b) {
      s.values(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = std::abs(spec[b]);
    }
  }
  return s;
}

Matrix log_magnitude(const Spectrogram& s, double floor_db) {
  if (!(floor_db < 0)) throw InvalidArgument("log_magnitude: floor_db must be negative");
  const double peak = s.values.size() ? s.values.maxCoeff() : 0.0;
  if (!(peak > 0)) return Matrix::Constant(s.values.rows(), s.values.cols(), floor_db);
  const double eps = std::pow(10.0, floor_db / 20.0) * peak;
  Matrix out(s.values.rows(), s.values.cols());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = std::max(floor_db, 20.0 * std::log10(std::max(s.values(i), eps) / peak));
  }
  return out;
}

core::Block log_spectrogram_block(std::size_t signal_len, std::size_t window_len, std::size_t hop, double floor_db) {
  const std::size_t frames = stft_frame_count(signal_len, window_len, hop);
  const auto out_dim = static_cast<Eigen::Index>(frames * (window_len / 2 + 1));
  return core::function_block("log_stft", static_cast<Eigen::Index>(signal_len), out_dim,
                              [=](const Vector& x) {
                                const Matrix lm = log_magnitude(stft({x.data(), signal_len}, window_len, hop), floor_db);
                                const Matrix rm = lm.transpose();  // column-major storage of the transpose = row-major lm
                                return Vector(Eigen::Map<const Vector>(rm.data(), rm.size()));
                              });
}

void write_spectrogram_csv(std::ostream& os, const Spectrogram& s, const Matrix& values) {
  os << "frame_start_s";
  for (std::size_t b = 0; b < s.bins(); ++b) os << ",f_" << format_double(s.bin_frequency(b));
  os << "\n";
  for (Eigen::Index f = 0; f < values.rows(); ++f) {
    os << format_double(s.frame_start(static_cast<std::size_t>(f)));
    for (Eigen::Index b = 0; b < values.cols(); ++b) os << "," << format_double(values(f, b));
    os << "\n";
  }
}

}  // namespace hybrid::signal
