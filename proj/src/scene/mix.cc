#include "scene/mix.h"

#include <cmath>
#include <stdexcept>

#include "dsp/fft.h"
#include "util/errors.h"
#include "util/rng.h"

namespace demist {

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::pair<std::vector<double>, std::vector<double>> split_convolve(
    const std::vector<double>& speech, const Rir& rir) {
  if (speech.empty()) throw std::invalid_argument("split_convolve: empty speech");
  const size_t n = speech.size();
  const size_t early_len = static_cast<size_t>(rir.early_len());

  std::vector<double> early_taps(rir.taps.begin(),
                                 rir.taps.begin() + static_cast<long>(early_len));
  std::vector<double> early = fft_convolve(speech, early_taps);
  early.resize(n);

  std::vector<double> late(n, 0.0);
  if (early_len < rir.taps.size()) {
    std::vector<double> late_taps(rir.taps.begin() + static_cast<long>(early_len),
                                  rir.taps.end());
    // Late taps start early_len samples into the response, so their
    // contribution is the convolution delayed by early_len.
    std::vector<double> conv = fft_convolve(speech, late_taps);
    for (size_t t = early_len; t < n; ++t) late[t] = conv[t - early_len];
  }
  return {std::move(early), std::move(late)};
}

std::vector<double> mix_at_snr(const std::vector<double>& reverberant,
                               const std::vector<double>& noise, double snr_db, uint64_t seed) {
  if (reverberant.empty()) throw std::invalid_argument("mix_at_snr: empty reverberant signal");
  if (noise.empty()) throw DataError("mix_at_snr: empty noise signal");

  // Circular read from a seeded offset covers both "crop a long recording"
  // and "loop a short one".
  Rng rng(Rng::derive(seed, 0x6e6f6973));  // per-purpose stream
  const size_t offset = static_cast<size_t>(rng.uniform_int(noise.size()));
  std::vector<double> segment(reverberant.size());
  for (size_t i = 0; i < segment.size(); ++i) segment[i] = noise[(offset + i) % noise.size()];

  const double p_rev = mean_power(reverberant);
  const double p_noise = mean_power(segment);
  if (p_rev <= 0.0) throw DataError("mix_at_snr: silent reverberant signal");
  if (p_noise <= 0.0) throw DataError("mix_at_snr: silent noise segment");

  const double gain = std::sqrt(p_rev / (p_noise * std::pow(10.0, snr_db / 10.0)));
  for (double& v : segment) v *= gain;
  return segment;
}

}  // namespace demist
