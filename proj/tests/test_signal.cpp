#include "hybrid/experiments/prng.hpp"
#include "hybrid/signal/fft.hpp"
#include "hybrid/signal/fir.hpp"
#include "hybrid/signal/stft.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace hybrid;
using namespace hybrid::signal;
using hybrid::experiments::Prng;

namespace {

std::vector<Complex> naive_dft(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce jk mod n before forming the angle to keep the oracle accurate.
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * std::polar(1.0, ang);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> noise(Prng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t from = 0) {
  double m = 0;
  for (std::size_t i = from; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double power(const std::vector<double>& x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("fft elementary spectra") {
  std::vector<Complex> impulse(8, 0.0);
  impulse[0] = 1.0;
  for (const auto& v : fft(impulse)) CHECK(std::abs(v - Complex(1.0)) < 1e-15);
  const auto dc = fft(std::vector<Complex>(8, 1.0));
  CHECK(std::abs(dc[0] - Complex(8.0)) < 1e-14);
  for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(dc[k]) < 1e-14);
  CHECK_THROWS_AS(fft(std::vector<Complex>(12)), InvalidArgument);
  CHECK_THROWS_AS(fft(std::vector<Complex>{}), InvalidArgument);
}

TEST_CASE("fft matches the naive DFT and inverts") {
  Prng rng(1);
  for (std::size_t n : {1u, 2u, 16u, 256u, 1024u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex(rng.normal(), rng.normal());
    const auto fast = fft(x);
    const auto slow = naive_dft(x);
    double err = 0, scale = 0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(fast[k] - slow[k]));
    CHECK(err < 1e-9);
    const auto back = ifft(fast);
    err = 0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(back[k] - x[k]));
      scale = std::max(scale, std::abs(x[k]));
    }
    CHECK(err / scale < 1e-10);
  }
}

TEST_CASE("stft shapes and frame count") {
  const auto zero = stft(std::vector<double>(1000, 0.0), 64, 16);
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.bins() == 33);
  Prng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t w = std::size_t{1} << (2 + rng.below(6));
    const std::size_t hop = 1 + rng.below(w);
    const std::size_t len = w + rng.below(500);
    const auto s = stft(std::vector<double>(len, 1.0), w, hop);
    CHECK(s.frames() == 1 + (len - w) / hop);
  }
  CHECK_THROWS_AS(stft(std::vector<double>(10, 0.0), 16, 4), InvalidArgument);
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), 24, 4), InvalidArgument);
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), 16, 17), InvalidArgument);
}

TEST_CASE("stft localizes a bin-centred sine and follows a chirp") {
  const double fs = 8000;
  const std::size_t w = 256;
  const int k = 20;
  std::vector<double> x(4096);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * k * fs / w * static_cast<double>(i) / fs);
  const auto s = stft(x, w, 128, fs);
  for (std::size_t f = 0; f < s.frames(); ++f) {
    Eigen::Index arg;
    s.values.row(static_cast<Eigen::Index>(f)).maxCoeff(&arg);
    CHECK(arg == k);
  }
  CHECK(s.bin_frequency(k) == doctest::Approx(625.0));

  // Linear chirp from 200 Hz to 3000 Hz.
  const double dur = static_cast<double>(x.size()) / fs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = std::sin(2 * std::numbers::pi * (200 * t + 0.5 * (2800 / dur) * t * t));
  }
  const auto c = stft(x, w, 128, fs);
  Eigen::Index prev = -1;
  for (std::size_t f = 0; f < c.frames(); ++f) {
    Eigen::Index arg;
    c.values.row(static_cast<Eigen::Index>(f)).maxCoeff(&arg);
    CHECK(arg >= prev);
    prev = arg;
  }
}

TEST_CASE("log_magnitude") {
  Spectrogram s;
  s.window_len = 4;
  s.hop = 4;
  s.values.resize(1, 3);
  s.values << 2.0, 0.0, 0.2;
  const Matrix lm = log_magnitude(s, -80);
  CHECK(lm(0, 0) == 0.0);
  CHECK(lm(0, 1) == -80.0);
  CHECK(std::abs(lm(0, 2) + 20.0) < 1e-12);
  s.values.setZero();
  CHECK((log_magnitude(s, -60).array() == -60.0).all());
  CHECK_THROWS_AS(log_magnitude(s, 0.0), InvalidArgument);
}

TEST_CASE("log spectrogram block flattens frames row by row") {
  std::vector<double> x(64);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * static_cast<double>(i)) + 0.01 * static_cast<double>(i);
  const auto block = log_spectrogram_block(64, 16, 8, -80);
  const Vector out = block(Eigen::Map<const Vector>(x.data(), 64));
  const Matrix direct = log_magnitude(stft(x, 16, 8), -80);
  CHECK(out.size() == direct.size());
  CHECK(out(9 + 2) == direct(1, 2));
}

TEST_CASE("spectrogram CSV has frame start column") {
  const auto s = stft(std::vector<double>(32, 1.0), 16, 16, 2.0);
  std::ostringstream os;
  write_spectrogram_csv(os, s, s.values);
  CHECK(os.str().rfind("frame_start_s,f_0,f_0.125,", 0) == 0);
  CHECK(os.str().find("\n8,") != std::string::npos);
}

TEST_CASE("design_lowpass") {
  const auto lp = design_lowpass(0.05, 101);
  CHECK(std::abs(std::accumulate(lp.taps.begin(), lp.taps.end(), 0.0) - 1.0) <= 1e-15);
  CHECK(std::abs(magnitude_response(lp.taps, 0.0) - 1.0) < 1e-14);
  CHECK(magnitude_response(lp.taps, 0.5) < 0.01);
  for (std::size_t i = 0; i < lp.taps.size(); ++i) CHECK(lp.taps[i] == lp.taps[lp.taps.size() - 1 - i]);
  CHECK_THROWS_AS(design_lowpass(0.05, 100), InvalidArgument);
  CHECK_THROWS_AS(design_lowpass(0.5, 101), InvalidArgument);
  CHECK_THROWS_AS(design_lowpass(0.0, 101), InvalidArgument);
}

TEST_CASE("complementary highpass") {
  const auto lp = design_lowpass(0.05, 101);
  const auto hp = design_highpass_complement(lp);
  CHECK(std::abs(std::accumulate(hp.taps.begin(), hp.taps.end(), 0.0)) <= 1e-15);

  Prng rng(7);
  const auto x = noise(rng, 3000);
  const auto lo = convolve_causal(lp.taps, x);
  const auto hi = convolve_causal(hp.taps, x);
  double err = 0;
  for (std::size_t n = lp.taps.size() - 1; n < x.size(); ++n) err = std::max(err, std::abs(lo[n] + hi[n] - x[n - 50]));
  CHECK(err < 1e-12);

  // Parseval bookkeeping: P(lo) + P(hi) + 2 <lo, hi> equals P(x) up to edge effects.
  const auto la = filter_aligned(lp, x);
  const auto ha = filter_aligned(hp, x);
  const double cross = std::inner_product(la.begin(), la.end(), ha.begin(), 0.0) / static_cast<double>(x.size());
  CHECK(std::abs(power(la) + power(ha) + 2 * cross - power(x)) < 0.02 * power(x));
  // For white noise the cross term is small and the split is roughly 2*cutoff : 1 - 2*cutoff.
  CHECK(power(la) / power(x) == doctest::Approx(0.1).epsilon(0.25));
}

TEST_CASE("apply_fir") {
  Prng rng(3);
  std::vector<double> t(400);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * static_cast<double>(i);
  const auto x = noise(rng, 400);
  FIRFilter id;
  id.taps = {1.0};
  const auto same = apply_fir(id, TimeSeries::scalar(t, x));
  CHECK(same.component(0) == x);

  const auto lp = design_lowpass(0.05, 101);
  for (double v : apply_fir(lp, TimeSeries::scalar(t, std::vector<double>(400, 3.25))).component(0)) {
    CHECK(std::abs(v - 3.25) < 1e-13);
  }

  std::vector<double> slow(400), fast(400);
  for (std::size_t i = 0; i < 400; ++i) {
    slow[i] = std::sin(2 * std::numbers::pi * 0.005 * static_cast<double>(i));
    fast[i] = std::cos(2 * std::numbers::pi * 0.5 * static_cast<double>(i));
  }
  const auto ys = apply_fir(lp, TimeSeries::scalar(t, slow)).component(0);
  const auto yf = apply_fir(lp, TimeSeries::scalar(t, fast)).component(0);
  double amp_s = 0, amp_f = 0;
  for (std::size_t i = 100; i < 300; ++i) {
    amp_s = std::max(amp_s, std::abs(ys[i]));
    amp_f = std::max(amp_f, std::abs(yf[i]));
  }
  CHECK(std::abs(amp_s - 1.0) < 0.02);
  CHECK(amp_f < 0.05);

  auto uneven = t;
  uneven[200] += 0.001;
  CHECK_THROWS_AS(apply_fir(lp, TimeSeries::scalar(uneven, x)), InvalidArgument);
}

TEST_CASE("apply_fir is linear and the aligned pair sums to the input") {
  Prng rng(9);
  const auto lp = design_lowpass(0.08, 31);
  const auto hp = design_highpass_complement(lp);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = noise(rng, 257);
    const auto y = noise(rng, 257);
    const double a = rng.normal(), b = rng.normal();
    std::vector<double> mix(257);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto fm = filter_aligned(lp, mix);
    const auto fx = filter_aligned(lp, x);
    const auto fy = filter_aligned(lp, y);
    std::vector<double> comb(257);
    for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = a * fx[i] + b * fy[i];
    CHECK(max_abs_diff(fm, comb) < 1e-12);

    const auto hx = filter_aligned(hp, x);
    std::vector<double> sum(257);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = fx[i] + hx[i];
    CHECK(max_abs_diff(sum, x) < 1e-12);
  }
}
