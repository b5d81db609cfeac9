// scene/manifest.h
//
// Dataset manifests: a sectioned text file naming the dry speech files,
// noise sources, and RIRs for each split, plus the SNR grid.  Scenes are
// planned as the Cartesian product speech x RIR x SNR x noise per split,
// each with a seed derived from the dataset seed, so the same manifest
// always expands to the same dataset.
//
//   [dataset]
//   seed = 42
//   sample_rate = 16000
//   early_boundary_ms = 50
//   [speech]
//   train = dry/a.wav            # repeated keys accumulate
//   train = gen:speech:1         # or a synthesized utterance (see speechgen)
//   validation = dry/b.wav
//   test = gen:speech:2          # variants must differ across splits
//   gen_seconds = 4              # length of each synthesized utterance
//   [noise]
//   train = gen:white            # "gen:<kind>" synthesizes, else a wav path
//   test = recorded/fan.wav
//   [rir]
//   train_t60_ms = 480 560       # one synthetic RIR per value
//   test_t60_ms = 500
//   length_ms = 700
//   direct_delay_ms = 2
//   train = measured/room1.wav   # measured responses may be mixed in
//   [mix]
//   snr_db = -5 0 5              # or "none" for reverberant-only scenes

#ifndef DEMIST_SCENE_MANIFEST_H_
#define DEMIST_SCENE_MANIFEST_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "util/config.h"

namespace demist {

struct RirSpec {
  enum class Kind { File, Synth };
  Kind kind = Kind::Synth;
  std::string path;  // File: resolved wav path
  double t60_ms = 0, length_ms = 0, direct_delay_ms = 0;
  uint64_t seed = 0;  // Synth: derived per entry
  std::string label() const;
};

struct ManifestSplit {
  std::vector<std::string> speech;  // resolved paths
  std::vector<std::string> noise;   // resolved paths or "gen:<kind>"
  std::vector<RirSpec> rirs;
};

struct Manifest {
  uint64_t seed = 0;
  int sample_rate = 16000;
  double early_boundary_ms = 50;
  double gen_speech_seconds = 5.0;  // length of gen:speech:<n> utterances
  std::vector<double> snr_grid;  // empty iff reverberant_only
  bool reverberant_only = false;
  ManifestSplit train, validation, test;

  // seed_override replaces the [dataset] seed before any per-entry seeds are
  // derived, so one flag re-seeds the whole dataset.
  static Manifest load(const std::string& path, std::optional<uint64_t> seed_override = {});
  static Manifest parse(const Config& cfg, const std::string& base_dir,
                        std::optional<uint64_t> seed_override = {});

  const ManifestSplit& split(const std::string& name) const;
};

struct SceneSpec {
  std::string id, split;
  std::string speech;  // resolved path
  RirSpec rir;
  std::string noise;  // resolved path / "gen:<kind>"; empty when reverberant-only
  std::optional<double> snr_db;
  uint64_t seed = 0;
};

// Deterministic expansion of the manifest into per-scene work orders,
// ordered train, validation, test.
std::vector<SceneSpec> plan_scenes(const Manifest& m);

extern const char* const kSplitNames[3];

}  // namespace demist

#endif  // DEMIST_SCENE_MANIFEST_H_
