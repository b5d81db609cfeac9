// feat/features.h
//
// Per-bin training targets and network inputs derived from a scene's exact
// decomposition y = x + r + n (interference i = r + n):
//
//   mag   |X(k,l)|                     clean magnitude
//   gain  G = xi / (xi + 1)            Wiener gain, xi = Phi2_x / Phi2_i
//   psd   Phi2_i(k,l)                  interference PSD
//   sir   xi clipped to [0, xi_max]    a priori signal-to-interference ratio
//   spp   speech presence probability  from |Y|^2 / Phi2_i (secondary task)
//
// PSDs are first-order recursive smoothings of the per-frame periodograms,
// initialized with the first frame.  Inputs are K x L tracks of |Y| (or the
// smoothed microphone PSD when the primary target is the interference PSD),
// stacked with +-context frames of edge-replicated context at training time.

#ifndef DEMIST_FEAT_FEATURES_H_
#define DEMIST_FEAT_FEATURES_H_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dsp/stft.h"
#include "scene/mix.h"

namespace demist {

enum class TargetKind { Magnitude, WienerGain, InterferencePsd, AprioriSir, Spp };

TargetKind parse_target_kind(const std::string& name);  // mag|gain|psd|sir|spp
std::string target_kind_name(TargetKind kind);
// Targets bounded in [0,1] get sigmoid output heads; the rest are linear.
bool bounded_output(TargetKind kind);

struct SppParams {
  double p_h1 = 0.5;        // speech-presence prior; P(H0) = 1 - p_h1
  double xi_h1_db = 15.0;   // fixed a priori SIR under H1
  double xi_h1() const;
  void validate() const;
};

struct FeatureConfig {
  StftConfig stft;
  double alpha = 0.85;         // PSD recursive smoothing constant
  int context = 3;             // +-frames stacked into the input
  double psd_floor_rel = 1e-10;  // floor relative to mean microphone PSD
  double xi_max = 1e3;         // SIR target clip (30 dB)
  SppParams spp;

  int input_dim() const { return stft.num_bins() * (2 * context + 1); }
};

// phi(k,0) = p(k,0); phi(k,l) = alpha*phi(k,l-1) + (1-alpha)*p(k,l).
Eigen::MatrixXd smooth_psd_from_power(const Eigen::MatrixXd& power, double alpha);
Eigen::MatrixXd smooth_psd(const ComplexSpectrogram& spec, double alpha);

// K x L -> K(2T+1) x L; column l holds frames l-T .. l+T (edge-replicated),
// each contributing its K bins in order.
Eigen::MatrixXd stack_context(const Eigen::MatrixXd& track, int context);

double wiener_gain_of_sir(double xi);

// Conditional speech presence probability given the a posteriori SIR
// |Y|^2 / Phi2_i.
double speech_presence_prob(double posterior, const SppParams& params);

// Floor used before dividing by interference/microphone PSDs.
double psd_floor(const Eigen::MatrixXd& phi_y, double rel);

// Formula layer on explicit PSD tracks (testable without audio).  x_mag is
// required for Magnitude, y_power for Spp; pass empty otherwise.
Eigen::MatrixXd targets_from_psds(const Eigen::MatrixXd& phi_x, const Eigen::MatrixXd& phi_i,
                                  const Eigen::MatrixXd& phi_y, const Eigen::MatrixXd& x_mag,
                                  const Eigen::MatrixXd& y_power, TargetKind kind,
                                  const FeatureConfig& cfg);

Eigen::MatrixXd compute_targets(const SceneComponents& scene, TargetKind kind,
                                const FeatureConfig& cfg);

// K x L input track before context stacking: |Y|, or the smoothed microphone
// PSD when the primary target is the interference PSD.
Eigen::MatrixXd input_track(const std::vector<double>& y, TargetKind primary,
                            const FeatureConfig& cfg);

// One decision-directed update: xi = beta * prev_xhat_power/phi_i
//                                  + (1-beta) * max(y_power/phi_i - 1, 0),
// with phi_i floored; prev_xhat_power is |X^(k,l-1)|^2 (zeros at l = 0).
Eigen::VectorXd decision_directed(const Eigen::VectorXd& prev_xhat_power,
                                  const Eigen::VectorXd& phi_i, const Eigen::VectorXd& y_power,
                                  double beta, double floor);

// One frame of network input/target(s), as assembled for training.
struct TrainingPair {
  Eigen::VectorXd input;                   // K(2T+1)
  Eigen::VectorXd primary;                 // K
  std::optional<Eigen::VectorXd> secondary;  // K (SPP) under multi-task losses
  int frame = 0;
  std::string utterance;
};

std::vector<TrainingPair> make_training_pairs(const SceneComponents& scene, TargetKind primary,
                                              bool with_spp_secondary, const FeatureConfig& cfg);

}  // namespace demist

#endif  // DEMIST_FEAT_FEATURES_H_
