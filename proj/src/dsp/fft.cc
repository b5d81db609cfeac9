#include "dsp/fft.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace demist {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

void dft_naive(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      const double ang =
          sign * 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : out) z *= inv;
  }
  a = std::move(out);
}

}  // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  if (a.empty()) throw std::invalid_argument("fft: empty input");
  if (a.size() == 1) return;
  if (is_pow2(a.size()))
    fft_radix2(a, inverse);
  else
    dft_naive(a, inverse);
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  if (!is_pow2(x.size())) throw std::invalid_argument("rfft: size must be a power of two");
  std::vector<std::complex<double>> a(x.begin(), x.end());
  fft(a, /*inverse=*/false);
  a.resize(x.size() / 2 + 1);
  return a;
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  const size_t out_len = x.size() + h.size() - 1;
  // Block size: at least 4x the kernel, and never pointlessly larger than the
  // whole output.
  const size_t nfft = next_pow2(std::min(out_len, std::max<size_t>(4 * h.size(), 4096)));
  const size_t chunk = nfft - h.size() + 1;

  std::vector<std::complex<double>> H(nfft, 0.0);
  std::copy(h.begin(), h.end(), H.begin());
  fft(H, false);

  std::vector<double> out(out_len, 0.0);
  std::vector<std::complex<double>> buf(nfft);
  for (size_t start = 0; start < x.size(); start += chunk) {
    const size_t len = std::min(chunk, x.size() - start);
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (size_t i = 0; i < len; ++i) buf[i] = x[start + i];
    fft(buf, false);
    for (size_t i = 0; i < nfft; ++i) buf[i] *= H[i];
    fft(buf, true);
    const size_t piece = std::min(nfft, out_len - start);
    for (size_t i = 0; i < piece; ++i) out[start + i] += buf[i].real();
  }
  return out;
}

}  // namespace demist
