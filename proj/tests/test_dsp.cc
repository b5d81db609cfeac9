#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dsp/fft.h"
#include "dsp/stft.h"
#include "util/rng.h"

using namespace demist;

namespace {

std::vector<double> random_signal(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal(0.0, 0.3);
  return x;
}

double rel_linf(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(a[i]));
  }
  return den > 0 ? num / den : num;
}

}  // namespace

TEST_CASE("fft: impulse transforms to flat spectrum") {
  std::vector<std::complex<double>> a(8, 0.0);
  a[0] = 1.0;
  fft(a, false);
  for (const auto& z : a) {
    CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fft: forward/inverse round trip, pow2 and non-pow2 sizes") {
  for (size_t n : {8u, 16u, 12u, 7u}) {
    Rng rng(n);
    std::vector<std::complex<double>> a(n), orig;
    for (auto& z : a) z = {rng.normal(), rng.normal()};
    orig = a;
    fft(a, false);
    fft(a, true);
    for (size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - orig[i]) < 1e-10);
    }
  }
}

TEST_CASE("fft: naive DFT path matches radix-2 on zero-padded input") {
  // Same 12-sample signal transformed at n=12 (naive) and, zero-padded, at
  // n=16 (radix-2); both must agree with a direct O(n^2) sum evaluated here.
  Rng rng(99);
  std::vector<std::complex<double>> x12(12);
  for (auto& z : x12) z = {rng.normal(), rng.normal()};
  auto direct = [](const std::vector<std::complex<double>>& x, size_t k) {
    std::complex<double> acc = 0.0;
    for (size_t t = 0; t < x.size(); ++t) {
      double ang = -2.0 * std::numbers::pi * double(k * t) / double(x.size());
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return acc;
  };
  std::vector<std::complex<double>> a = x12;
  fft(a, false);
  for (size_t k = 0; k < 12; ++k) CHECK(std::abs(a[k] - direct(x12, k)) < 1e-10);
}

TEST_CASE("fft_convolve: hand example and length") {
  // conv([1,2],[3,4]) = [1*3, 1*4+2*3, 2*4] = [3, 10, 8]
  auto y = fft_convolve({1.0, 2.0}, {3.0, 4.0});
  REQUIRE(y.size() == 3);
  CHECK(y[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("fft_convolve: matches direct convolution on random signals") {
  Rng rng(7);
  std::vector<double> x(1000), h(37);
  for (auto& v : x) v = rng.normal();
  for (auto& v : h) v = rng.normal();
  auto fast = fft_convolve(x, h);
  REQUIRE(fast.size() == x.size() + h.size() - 1);
  for (size_t i : {0u, 17u, 36u, 500u, 1035u}) {
    double acc = 0.0;
    for (size_t j = 0; j < h.size(); ++j)
      if (i >= j && i - j < x.size()) acc += h[j] * x[i - j];
    CHECK(fast[i] == doctest::Approx(acc).epsilon(1e-9));
  }
}

TEST_CASE("window: tightness identity w[i]^2 + w[i+hop]^2 == 1") {
  auto w = make_tight_window(256, 128);
  REQUIRE(w.size() == 256);
  for (int i = 0; i < 128; ++i) {
    CHECK(w[i] * w[i] + w[i + 128] * w[i + 128] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("window: 4-sample case equals [0, sqrt(.5), 1, sqrt(.5)]") {
  auto w = make_tight_window(4, 2);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[3] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("stft: config validation rejects bad window/hop combinations") {
  CHECK_THROWS_AS(make_tight_window(256, 64), std::invalid_argument);
  StftConfig bad;
  bad.window_len = 250;  // not a power of two
  bad.hop = 125;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  StftConfig bad2;
  bad2.hop = 96;
  CHECK_THROWS_AS(stft(std::vector<double>(100, 0.0), bad2), std::invalid_argument);
}

TEST_CASE("stft: unit impulse at sample 0") {
  // The first frame starts window_len-hop samples before the signal, so the
  // impulse lands at in-frame position 128 where the window equals
  // sin(pi/2) = 1; |FFT| of a unit impulse is constant across bins.  Frame 1
  // sees the impulse at position 0 where the window is 0.
  StftConfig cfg;
  std::vector<double> x(512, 0.0);
  x[0] = 1.0;
  auto spec = stft(x, cfg);
  REQUIRE(spec.num_bins() == 129);
  for (int k = 0; k < spec.num_bins(); ++k) {
    CHECK(std::abs(spec.data(k, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(spec.data(k, 1)) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("stft: frame count covers every sample") {
  StftConfig cfg;
  // 1024 samples: front pad 128 -> frames at padded offsets 0,128,...,1152.
  auto spec = stft(random_signal(1024, 3), cfg);
  CHECK(spec.num_frames() == 9);
  CHECK(spec.original_len == 1024);
  // A signal shorter than one hop still gets full coverage.
  auto tiny = stft(random_signal(5, 4), cfg);
  CHECK(tiny.num_frames() == 2);
  CHECK(istft(tiny).size() == 5);
}

TEST_CASE("stft: zeros map to zeros, empty maps to empty") {
  StftConfig cfg;
  auto spec = stft(std::vector<double>(700, 0.0), cfg);
  CHECK(spec.data.cwiseAbs().maxCoeff() == 0.0);
  auto x = istft(spec);
  for (double v : x) CHECK(v == 0.0);
  auto empty = stft(std::vector<double>{}, cfg);
  CHECK(empty.num_frames() == 0);
  CHECK(istft(empty).empty());
}

TEST_CASE("stft: bin-center sinusoid concentrates energy at its bin") {
  // For the sqrt-Hann analysis window the mainlobe spans +-1 bin holding
  // >= 99% of frame energy; individual bins beyond +-2 sit below -30 dB
  // relative to the peak (the first sidelobe at +-2 bins is about -23.5 dB).
  StftConfig cfg;
  const int k0 = 32;
  const double f = k0 * 16000.0 / 256.0;
  std::vector<double> x(4096);
  for (size_t t = 0; t < x.size(); ++t)
    x[t] = std::cos(2.0 * std::numbers::pi * f * double(t) / 16000.0 + 0.7);
  auto spec = stft(x, cfg);
  for (int fr = 4; fr < spec.num_frames() - 4; ++fr) {
    double total = 0.0, inside = 0.0, peak = 0.0;
    int argmax = -1;
    for (int k = 0; k < spec.num_bins(); ++k) {
      const double p = std::norm(spec.data(k, fr));
      total += p;
      if (std::abs(k - k0) <= 1) inside += p;
      if (p > peak) {
        peak = p;
        argmax = k;
      }
    }
    CHECK(argmax == k0);
    CHECK(inside / total > 0.99);
    for (int k = 0; k < spec.num_bins(); ++k) {
      if (std::abs(k - k0) <= 2) continue;
      CHECK(std::norm(spec.data(k, fr)) / peak < std::pow(10.0, -30.0 / 10.0));
    }
  }
}

TEST_CASE("stft: linearity") {
  StftConfig cfg;
  auto x = random_signal(800, 11);
  auto y = random_signal(800, 12);
  std::vector<double> mix(800);
  for (size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * x[i] - 0.5 * y[i];
  auto sx = stft(x, cfg), sy = stft(y, cfg), sm = stft(mix, cfg);
  double err = (sm.data - 2.0 * sx.data + 0.5 * sy.data).cwiseAbs().maxCoeff();
  double scale = sm.data.cwiseAbs().maxCoeff();
  CHECK(err / scale < 1e-12);
}

TEST_CASE("stft: Parseval energy bookkeeping") {
  // With zero-padded full coverage and the tight window, summed spectral
  // power (Hermitian bins double-counted, divided by N) equals signal energy.
  StftConfig cfg;
  auto x = random_signal(5000, 21);
  auto spec = stft(x, cfg);
  double sig_energy = 0.0;
  for (double v : x) sig_energy += v * v;
  double spec_energy = 0.0;
  for (int fr = 0; fr < spec.num_frames(); ++fr)
    for (int k = 0; k < spec.num_bins(); ++k) {
      const double mult = (k == 0 || k == spec.num_bins() - 1) ? 1.0 : 2.0;
      spec_energy += mult * std::norm(spec.data(k, fr));
    }
  spec_energy /= cfg.window_len;
  CHECK(spec_energy == doctest::Approx(sig_energy).epsilon(1e-9));
}

TEST_CASE("stft/istft: round trip within 1e-6 relative Linf") {
  StftConfig cfg;
  for (uint64_t seed : {1u, 2u, 3u}) {
    for (size_t n : {16000u, 1234u, 128u, 257u}) {
      auto x = random_signal(n, seed * 100 + n);
      auto back = istft(stft(x, cfg));
      REQUIRE(back.size() == x.size());
      CHECK(rel_linf(x, back) < 1e-6);
    }
  }
}

TEST_CASE("istft: all-ones mask reproduces the unmasked reconstruction exactly") {
  StftConfig cfg;
  auto x = random_signal(3000, 31);
  auto spec = stft(x, cfg);
  ComplexSpectrogram masked = spec;
  masked.data = spec.data.cwiseProduct(Eigen::MatrixXcd::Ones(spec.data.rows(), spec.data.cols()));
  auto a = istft(spec);
  auto b = istft(masked);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("istft: zero spectrogram gives exact silence") {
  StftConfig cfg;
  auto spec = stft(random_signal(2000, 41), cfg);
  spec.data.setZero();
  for (double v : istft(spec)) CHECK(v == 0.0);
}
