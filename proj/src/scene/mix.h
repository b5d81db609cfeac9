// scene/mix.h
//
// Scene assembly: convolving dry speech against the early/late parts of a
// RIR and adding noise at a prescribed SNR.  The additive decomposition
// y = x + r + n is the ground truth every training target is computed from:
//   x — direct + early speech (the desired signal),
//   r — late reverberation,
//   n — additive noise,
// with r + n acting as the interference.

#ifndef DEMIST_SCENE_MIX_H_
#define DEMIST_SCENE_MIX_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scene/rir.h"

namespace demist {

struct SceneComponents {
  std::vector<double> x, r, n, y;
  std::optional<double> snr_db;  // empty: reverberant-only scene (n == 0)
  double t60_ms = 0.0;
  int sample_rate = 16000;
  std::string id;
};

// Convolves speech against rir.taps split at rir.early_len(): returns
// (early, late), both trimmed to the speech length, with early + late equal
// to the full convolution over that range.
std::pair<std::vector<double>, std::vector<double>> split_convolve(
    const std::vector<double>& speech, const Rir& rir);

// Returns the noise segment scaled so that
// 10 log10(P(reverberant) / P(scaled noise)) == snr_db over the full length.
// Noise shorter than the target is looped; longer noise is read circularly
// from a seed-chosen offset.  Throws DataError on silent noise or speech.
std::vector<double> mix_at_snr(const std::vector<double>& reverberant,
                               const std::vector<double>& noise, double snr_db, uint64_t seed);

double mean_power(const std::vector<double>& x);

}  // namespace demist

#endif  // DEMIST_SCENE_MIX_H_
