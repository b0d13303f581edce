#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hybrid::signal {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

/// Radix-2 decimation-in-time FFT, X_k = sum_j x_j exp(-2 pi i j k / n).
/// Throws InvalidArgument unless the length is a power of two.
std::vector<Complex> fft(std::span<const Complex> x);

/// Inverse transform via the conjugate method, including the 1/n scaling.
std::vector<Complex> ifft(std::span<const Complex> x);

/// FFT of a real signal.
std::vector<Complex> fft_real(std::span<const double> x);

}  // namespace hybrid::signal
