#include "scene/rir.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "util/rng.h"

namespace demist {

int Rir::early_len() const {
  const int window = static_cast<int>(std::lround(early_boundary_ms * sample_rate / 1000.0));
  const int end = std::max(direct_index + window, direct_index + 1);
  return std::min<int>(end, static_cast<int>(taps.size()));
}

Rir Rir::from_taps(std::vector<double> taps, int sample_rate, double early_boundary_ms) {
  if (taps.empty()) throw std::invalid_argument("rir: empty tap vector");
  if (sample_rate <= 0) throw std::invalid_argument("rir: bad sample rate");
  if (early_boundary_ms < 0) throw std::invalid_argument("rir: negative early boundary");
  Rir rir;
  rir.sample_rate = sample_rate;
  rir.early_boundary_ms = early_boundary_ms;
  int best = 0;
  for (size_t i = 1; i < taps.size(); ++i)
    if (std::abs(taps[i]) > std::abs(taps[static_cast<size_t>(best)])) best = static_cast<int>(i);
  rir.direct_index = best;
  rir.taps = std::move(taps);
  return rir;
}

double rir_decay_envelope(double t_ms, double t60_ms) {
  return std::pow(10.0, -3.0 * t_ms / t60_ms);
}

Rir synth_rir(double t60_ms, double length_ms, double direct_delay_ms, uint64_t seed,
              int sample_rate, double early_boundary_ms) {
  if (t60_ms < 100.0 || t60_ms > 2000.0)
    throw std::invalid_argument("synth_rir: t60 " + std::to_string(t60_ms) +
                                " ms outside supported range [100, 2000]");
  if (length_ms < t60_ms)
    throw std::invalid_argument("synth_rir: response length " + std::to_string(length_ms) +
                                " ms shorter than t60 " + std::to_string(t60_ms) + " ms");
  const int len = static_cast<int>(std::lround(length_ms * sample_rate / 1000.0));
  const int direct = static_cast<int>(std::lround(direct_delay_ms * sample_rate / 1000.0));
  if (direct < 0 || direct >= len)
    throw std::invalid_argument("synth_rir: direct delay outside the response");

  std::vector<double> taps(static_cast<size_t>(len), 0.0);
  taps[static_cast<size_t>(direct)] = 1.0;

  Rng rng(seed);
  double tail_energy = 0.0;
  for (int i = direct + 1; i < len; ++i) {
    const double t_ms = (i - direct) * 1000.0 / sample_rate;
    const double v = rng.normal() * rir_decay_envelope(t_ms, t60_ms);
    taps[static_cast<size_t>(i)] = v;
    tail_energy += v * v;
  }
  if (tail_energy > 0.0) {
    // Unit tail energy == 0 dB direct-to-reverberant ratio.
    double scale = 1.0 / std::sqrt(tail_energy);
    double peak = 0.0;
    for (int i = direct + 1; i < len; ++i)
      peak = std::max(peak, std::abs(taps[static_cast<size_t>(i)]) * scale);
    // Keep the direct path the largest tap (it decides the early window).
    if (peak >= 1.0) scale *= 0.99 / peak;
    for (int i = direct + 1; i < len; ++i) taps[static_cast<size_t>(i)] *= scale;
  }

  Rir rir = Rir::from_taps(std::move(taps), sample_rate, early_boundary_ms);
  if (rir.direct_index != direct)
    throw std::logic_error("synth_rir: direct path is not the largest tap");
  return rir;
}

double estimate_t60_schroeder(const std::vector<double>& taps, int sample_rate) {
  const size_t n = taps.size();
  if (n == 0 || sample_rate <= 0) return std::numeric_limits<double>::quiet_NaN();
  // Backward-integrated energy decay curve.
  std::vector<double> edc(n, 0.0);
  double acc = 0.0;
  for (size_t i = n; i-- > 0;) {
    acc += taps[i] * taps[i];
    edc[i] = acc;
  }
  if (edc[0] <= 0.0) return std::numeric_limits<double>::quiet_NaN();

  const double total = edc[0];
  size_t i1 = n, i2 = n;
  for (size_t i = 0; i < n; ++i) {
    const double db = 10.0 * std::log10(edc[i] / total);
    if (i1 == n && db <= -5.0) i1 = i;
    if (db <= -25.0) {
      i2 = i;
      break;
    }
  }
  if (i1 >= i2 || i2 == n) return std::numeric_limits<double>::quiet_NaN();

  // Least squares fit of the EDC in dB over [i1, i2]; slope is dB/sample.
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double count = static_cast<double>(i2 - i1 + 1);
  for (size_t i = i1; i <= i2; ++i) {
    const double t = static_cast<double>(i);
    const double l = 10.0 * std::log10(edc[i] / total);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
  }
  const double denom = count * stt - st * st;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double slope = (count * stl - st * sl) / denom;  // dB per sample
  if (slope >= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -60.0 / slope / sample_rate * 1000.0;  // ms
}

}  // namespace demist
