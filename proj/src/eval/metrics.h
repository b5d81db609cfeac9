// eval/metrics.h
//
// Frequency-weighted segmental SNR (fwSSNR) and plain segmental SNR against
// the direct+early speech reference, plus the per-scene improvement deltas
// and a delimited report format.
//
// fwSSNR: 256-sample Hann frames at 50% overlap; per frame, 25 mel-spaced
// triangular bands over [0, fs/2]; band SNR = 10 log10(Bx^2 / (Bx - Bt)^2)
// on band magnitudes, clamped to [-10, 35] dB and averaged with weights
// Bx^0.2; utterance score = mean over frames whose reference energy lies
// within 35 dB of the loudest frame.  Frame scores are assembled in the
// ceiling-anchored form  35 - sum(w * (35 - snr)) / sum(w),  algebraically
// the weighted mean but exact at the ceiling, so identical signals score
// exactly 35.0.

#ifndef DEMIST_EVAL_METRICS_H_
#define DEMIST_EVAL_METRICS_H_

#include <string>
#include <vector>

#include "scene/mix.h"

namespace demist {

struct MetricConfig {
  int frame_len = 256;
  int hop = 128;
  int num_bands = 25;
  double weight_exponent = 0.2;
  double snr_floor_db = -10.0;
  double snr_ceil_db = 35.0;
  double active_range_db = 35.0;  // keep frames within this of the max energy
  void validate() const;
};

double fwssnr(const std::vector<double>& reference, const std::vector<double>& test,
              int sample_rate, const MetricConfig& cfg = {});

double segsnr(const std::vector<double>& reference, const std::vector<double>& test,
              const MetricConfig& cfg = {});

struct EvalRow {
  std::string id;
  std::string condition;
  double fwssnr_in = 0, fwssnr_out = 0, delta_fwssnr = 0;
  double segsnr_in = 0, segsnr_out = 0, delta_segsnr = 0;
};

struct EvalSummary {
  std::size_t count = 0;
  double fwssnr_in = 0, fwssnr_out = 0, delta_fwssnr = 0;
  double segsnr_in = 0, segsnr_out = 0, delta_segsnr = 0;
};

// Scores `enhanced` against the scene's direct+early reference, with the
// unprocessed microphone signal as the baseline.  Lengths may differ by at
// most one hop (trimmed to the common minimum before scoring).
EvalRow evaluate_scene(const SceneComponents& scene, const std::vector<double>& enhanced,
                       const MetricConfig& cfg = {});

// Human-readable condition label ("t60=500ms,snr=0dB" or "t60=500ms,rev-only").
std::string scene_condition(const SceneComponents& scene);

EvalSummary summarize(const std::vector<EvalRow>& rows);

// Tab-separated report: one row per utterance plus a trailing aggregate.
void write_report(const std::string& path, const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_report(const std::string& path, EvalSummary* summary = nullptr);

}  // namespace demist

#endif  // DEMIST_EVAL_METRICS_H_
