// feat/cache.h
//
// Binary feature cache: precomputed network inputs and targets for one
// utterance, so repeated sweeps over the same data skip the STFT/target
// math.  Layout (all integers little-endian):
//
//   "DMFC" | u32 version=1 | u32 K | u32 T | u32 target kind | u64 frames
//   then frames rows of K(2T+1) input floats, row-major f32 LE,
//   then frames rows of K target floats.

#ifndef DEMIST_FEAT_CACHE_H_
#define DEMIST_FEAT_CACHE_H_

#include <Eigen/Dense>
#include <string>

#include "feat/features.h"

namespace demist {

struct FeatureCache {
  int num_bins = 0;  // K
  int context = 0;   // T
  TargetKind kind = TargetKind::Magnitude;
  // inputs: K(2T+1) x frames, targets: K x frames (frames as columns).
  Eigen::MatrixXf inputs, targets;
};

void write_feature_cache(const std::string& path, const FeatureCache& cache);
FeatureCache read_feature_cache(const std::string& path);

}  // namespace demist

#endif  // DEMIST_FEAT_CACHE_H_
