// enhance/enhance.h
//
// Spectral enhancement: turn a trained model's per-bin predictions into an
// enhanced waveform.  Four strategies, dispatched on the model's target:
//
//   magnitude  scale each bin of Y to the predicted |X|, keeping Y's phase
//   gain       multiply Y by the predicted Wiener gain in [0,1]
//   psd        predicted interference PSD -> decision-directed a priori SIR
//              (sequential over frames, seeded by the previous enhanced
//              frame's magnitude) -> Wiener gain
//   sir        predicted a priori SIR (clamped >= 0) -> Wiener gain
//
// All strategies reuse the microphone phase.  Gain-mask paths never amplify
// (gains clamped to [floor, 1]); the magnitude path may amplify by design.
// An optional gain floor keeps masks from fully zeroing bins; it applies to
// the gain, psd, and sir paths and defaults to 0.

#ifndef DEMIST_ENHANCE_ENHANCE_H_
#define DEMIST_ENHANCE_ENHANCE_H_

#include <Eigen/Dense>
#include <vector>

#include "dsp/stft.h"
#include "net/mlp.h"

namespace demist {

struct EnhanceConfig {
  double gain_floor = 0.0;  // lower bound on gain masks, in [0, 1)
  double beta = 0.98;       // decision-directed smoothing (psd path)
  int chunk_frames = 4096;  // frames per network batch
  void validate() const;
};

// ---- Matrix-level primitives (K bins x L frames), usable with oracle
// ---- tracks as well as network predictions.

// X = clamp(gain, [max(floor,0), 1]) .* Y, entry-wise.
ComplexSpectrogram apply_gain(const ComplexSpectrogram& y, const Eigen::MatrixXd& gain,
                              double gain_floor = 0.0);

// Rescales each bin of Y to the target magnitude, keeping Y's phase; bins
// with |Y| <= eps get scale 0.
ComplexSpectrogram apply_magnitude(const ComplexSpectrogram& y, const Eigen::MatrixXd& magnitude,
                                   double eps = 1e-10);

// Wiener gains from an a priori SIR track; negative predictions clamp to 0.
Eigen::MatrixXd gains_from_sir(const Eigen::MatrixXd& xi);

// Wiener gains from a predicted interference-PSD track via the sequential
// decision-directed recursion (the previous frame's masked magnitude feeds
// the next frame's a priori SIR).
Eigen::MatrixXd gains_from_interference_psd(const Eigen::MatrixXd& phi_i,
                                            const ComplexSpectrogram& y, double beta,
                                            double psd_floor_rel, double gain_floor = 0.0);

// The model's primary-head prediction for a whole signal, one column per
// frame (stacked context handled internally from the model's stored
// feature configuration).
Eigen::MatrixXd predict_track(const Mlp<float>& model, const std::vector<double>& y,
                              int chunk_frames = 4096);

// ---- Signal-level strategies.  Each checks the model's target kind.

std::vector<double> enhance_magnitude(const Mlp<float>& model, const std::vector<double>& y,
                                      const EnhanceConfig& cfg = {});
std::vector<double> enhance_gain(const Mlp<float>& model, const std::vector<double>& y,
                                 const EnhanceConfig& cfg = {});
std::vector<double> enhance_psd(const Mlp<float>& model, const std::vector<double>& y,
                                const EnhanceConfig& cfg = {});
std::vector<double> enhance_sir(const Mlp<float>& model, const std::vector<double>& y,
                                const EnhanceConfig& cfg = {});

// Dispatches on the model's target kind.
std::vector<double> enhance_signal(const Mlp<float>& model, const std::vector<double>& y,
                                   const EnhanceConfig& cfg = {});

// Masks y with an explicit gain track and reconstructs (oracle runs, tests).
std::vector<double> resynthesize_with_gain(const std::vector<double>& y,
                                           const Eigen::MatrixXd& gain, const StftConfig& stft,
                                           double gain_floor = 0.0);

}  // namespace demist

#endif  // DEMIST_ENHANCE_ENHANCE_H_
