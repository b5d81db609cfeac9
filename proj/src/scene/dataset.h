// scene/dataset.h
//
// Turning planned scenes into audio on disk and back.  Each scene is stored
// as four mono wavs — <id>_x (direct+early speech), <id>_r (late reverb),
// <id>_n (noise), <id>_y (microphone) — quantized so that the 16-bit
// samples satisfy y == x + r + n exactly, plus one scenes.tsv index.

#ifndef DEMIST_SCENE_DATASET_H_
#define DEMIST_SCENE_DATASET_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scene/manifest.h"
#include "scene/mix.h"
#include "scene/rir.h"

namespace demist {

// Loads and caches audio shared across scenes.  Generated noise ("gen:<kind>")
// is synthesized once per (split, kind) with a split-distinct seed, so test
// noise is never the same realization as train noise.  Generated speech
// ("gen:speech:<n>") is one synthesized utterance per variant number; the
// manifest's split-overlap check keeps variants from being shared.
class AudioPool {
 public:
  AudioPool(int sample_rate, uint64_t master_seed, double gen_noise_seconds = 30.0,
            double gen_speech_seconds = 5.0);

  const std::vector<double>& speech(const std::string& path);
  const std::vector<double>& noise(const std::string& ref, const std::string& split);
  const Rir& rir(const RirSpec& spec, double early_boundary_ms);

 private:
  int sample_rate_;
  uint64_t master_seed_;
  double gen_noise_seconds_;
  double gen_speech_seconds_;
  std::map<std::string, std::vector<double>> speech_, noise_;
  std::map<std::string, Rir> rirs_;
};

// Assembles the time-domain components for one scene; y = x + r + n holds
// exactly in doubles.
SceneComponents build_scene(const SceneSpec& spec, const Manifest& m, AudioPool& pool);

struct SceneIndexRow {
  std::string id, split;
  std::string speech, rir_label, noise;  // provenance
  double t60_ms = 0;
  std::optional<double> snr_db;
  uint64_t seed = 0;
  long num_samples = 0;
  int sample_rate = 16000;
  double scale = 1.0;  // common gain applied before quantization
  long clipped = 0;
};

// Writes <id>_{x,r,n,y}.wav under dir.  One common scale keeps every
// component in range; y is written as the saturated integer sum of the
// quantized components so the on-disk decomposition is exact.
SceneIndexRow write_scene_wavs(const SceneComponents& scene, const std::string& dir,
                               const SceneSpec& spec);

void write_scene_index(const std::string& path, const std::vector<SceneIndexRow>& rows);
std::vector<SceneIndexRow> read_scene_index(const std::string& path);

SceneComponents load_scene(const std::string& dir, const SceneIndexRow& row);

}  // namespace demist

#endif  // DEMIST_SCENE_DATASET_H_
