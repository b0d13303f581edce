#include "hybrid/signal/fft.hpp"

#include "hybrid/types.hpp"

#include <cmath>
#include <numbers>

namespace hybrid::signal {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Complex> fft(std::span<const Complex> x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw InvalidArgument("fft: length " + std::to_string(n) + " is not a power of two");
  std::vector<Complex> a(x.begin(), x.end());

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly rather than by recurrence to keep the
      // error independent of n.
      const Complex w = std::polar(1.0, ang * static_cast<double>(k));
      for (std::size_t i = 0; i < n; i += len) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  return a;
}

std::vector<Complex> ifft(std::span<const Complex> x) {
  std::vector<Complex> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = std::conj(x[i]);
  auto out = fft(c);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v = std::conj(v) * scale;
  return out;
}

std::vector<Complex> fft_real(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  return fft(c);
}

}  // namespace hybrid::signal
