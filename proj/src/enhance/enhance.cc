// enhance/enhance.cc

#include "enhance/enhance.h"

#include <algorithm>
#include <stdexcept>

#include "feat/features.h"
#include "util/errors.h"

namespace demist {

void EnhanceConfig::validate() const {
  if (gain_floor < 0.0 || gain_floor >= 1.0)
    throw UsageError("gain floor must lie in [0, 1)");
  if (beta < 0.0 || beta >= 1.0)
    throw UsageError("decision-directed beta must lie in [0, 1)");
  if (chunk_frames <= 0) throw UsageError("chunk size must be positive");
}

namespace {

void check_track_shape(const ComplexSpectrogram& y, const Eigen::MatrixXd& track,
                       const char* what) {
  if (track.rows() != y.data.rows() || track.cols() != y.data.cols())
    throw std::invalid_argument(std::string(what) + ": track shape " +
                                std::to_string(track.rows()) + "x" +
                                std::to_string(track.cols()) +
                                " does not match the spectrogram");
}

void check_model_kind(const Mlp<float>& model, TargetKind expected,
                      const char* op) {
  if (model.meta_.target != expected)
    throw DataError(std::string(op) + " requires a " +
                    target_kind_name(expected) + " model, got " +
                    target_kind_name(model.meta_.target));
}

void require_signal(const std::vector<double>& y) {
  if (y.empty()) throw DataError("cannot enhance an empty signal");
}

std::vector<double> mask_and_resynthesize(const ComplexSpectrogram& y,
                                          const Eigen::MatrixXd& gain,
                                          double gain_floor) {
  return istft(apply_gain(y, gain, gain_floor));
}

}  // namespace

ComplexSpectrogram apply_gain(const ComplexSpectrogram& y, const Eigen::MatrixXd& gain,
                              double gain_floor) {
  check_track_shape(y, gain, "apply_gain");
  const double lo = std::max(gain_floor, 0.0);
  ComplexSpectrogram out = y;
  out.data = y.data.cwiseProduct(
      gain.cwiseMax(lo).cwiseMin(1.0).cast<std::complex<double>>());
  return out;
}

ComplexSpectrogram apply_magnitude(const ComplexSpectrogram& y,
                                   const Eigen::MatrixXd& target_mag, double eps) {
  check_track_shape(y, target_mag, "apply_magnitude");
  ComplexSpectrogram out = y;
  const Eigen::MatrixXd ymag = magnitude(y);
  Eigen::MatrixXd scale(ymag.rows(), ymag.cols());
  for (Eigen::Index j = 0; j < ymag.cols(); ++j)
    for (Eigen::Index i = 0; i < ymag.rows(); ++i) {
      const double m = ymag(i, j);
      scale(i, j) = m > eps ? std::max(target_mag(i, j), 0.0) / m : 0.0;
    }
  out.data = y.data.cwiseProduct(scale.cast<std::complex<double>>());
  return out;
}

Eigen::MatrixXd gains_from_sir(const Eigen::MatrixXd& xi) {
  Eigen::MatrixXd g(xi.rows(), xi.cols());
  for (Eigen::Index j = 0; j < xi.cols(); ++j)
    for (Eigen::Index i = 0; i < xi.rows(); ++i)
      g(i, j) = wiener_gain_of_sir(std::max(xi(i, j), 0.0));
  return g;
}

Eigen::MatrixXd gains_from_interference_psd(const Eigen::MatrixXd& phi_i,
                                            const ComplexSpectrogram& y, double beta,
                                            double psd_floor_rel, double gain_floor) {
  check_track_shape(y, phi_i, "gains_from_interference_psd");
  const Eigen::MatrixXd y_power = power(y);
  // Floor derived from the observed microphone PSD so that a predicted
  // interference PSD of ~0 yields gain -> 1 instead of dividing by zero.
  const double floor = psd_floor(smooth_psd_from_power(y_power, 0.85), psd_floor_rel);
  const double lo = std::max(gain_floor, 0.0);
  Eigen::MatrixXd gains(phi_i.rows(), phi_i.cols());
  Eigen::VectorXd prev_xhat_power = Eigen::VectorXd::Zero(phi_i.rows());
  for (Eigen::Index l = 0; l < phi_i.cols(); ++l) {
    const Eigen::VectorXd xi = decision_directed(
        prev_xhat_power, phi_i.col(l).cwiseMax(0.0), y_power.col(l), beta, floor);
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
      const double g =
          std::min(std::max(wiener_gain_of_sir(xi[k]), lo), 1.0);
      gains(k, l) = g;
      const double xhat = g * std::sqrt(y_power(k, l));
      prev_xhat_power[k] = xhat * xhat;
    }
  }
  return gains;
}

Eigen::MatrixXd predict_track(const Mlp<float>& model, const std::vector<double>& y,
                              int chunk_frames) {
  if (y.empty()) throw DataError("cannot enhance an empty signal");
  if (chunk_frames <= 0) throw UsageError("chunk size must be positive");
  const FeatureConfig& feat = model.feat_;
  const int bins = feat.stft.num_bins();
  if (model.arch_.input_dim != feat.input_dim() ||
      model.arch_.output_dim != bins)
    throw DataError("model dimensions disagree with its feature configuration");
  const Eigen::MatrixXd track = input_track(y, model.meta_.target, feat);
  const Eigen::MatrixXf stacked = stack_context(track, feat.context).cast<float>();
  Eigen::MatrixXd prediction(bins, stacked.cols());
  for (Eigen::Index beg = 0; beg < stacked.cols(); beg += chunk_frames) {
    const Eigen::Index len = std::min<Eigen::Index>(chunk_frames, stacked.cols() - beg);
    prediction.middleCols(beg, len) =
        model.forward(stacked.middleCols(beg, len)).cast<double>();
  }
  return prediction;
}

std::vector<double> enhance_magnitude(const Mlp<float>& model,
                                      const std::vector<double>& y,
                                      const EnhanceConfig& cfg) {
  cfg.validate();
  check_model_kind(model, TargetKind::Magnitude, "magnitude enhancement");
  require_signal(y);
  const ComplexSpectrogram spec = stft(y, model.feat_.stft);
  return istft(apply_magnitude(spec, predict_track(model, y, cfg.chunk_frames)));
}

std::vector<double> enhance_gain(const Mlp<float>& model, const std::vector<double>& y,
                                 const EnhanceConfig& cfg) {
  cfg.validate();
  check_model_kind(model, TargetKind::WienerGain, "gain enhancement");
  require_signal(y);
  const ComplexSpectrogram spec = stft(y, model.feat_.stft);
  return mask_and_resynthesize(spec, predict_track(model, y, cfg.chunk_frames),
                               cfg.gain_floor);
}

std::vector<double> enhance_psd(const Mlp<float>& model, const std::vector<double>& y,
                                const EnhanceConfig& cfg) {
  cfg.validate();
  check_model_kind(model, TargetKind::InterferencePsd, "interference-PSD enhancement");
  require_signal(y);
  const ComplexSpectrogram spec = stft(y, model.feat_.stft);
  const Eigen::MatrixXd phi_i = predict_track(model, y, cfg.chunk_frames);
  const Eigen::MatrixXd gains = gains_from_interference_psd(
      phi_i, spec, cfg.beta, model.feat_.psd_floor_rel, cfg.gain_floor);
  return mask_and_resynthesize(spec, gains, cfg.gain_floor);
}

std::vector<double> enhance_sir(const Mlp<float>& model, const std::vector<double>& y,
                                const EnhanceConfig& cfg) {
  cfg.validate();
  check_model_kind(model, TargetKind::AprioriSir, "a priori SIR enhancement");
  require_signal(y);
  const ComplexSpectrogram spec = stft(y, model.feat_.stft);
  return mask_and_resynthesize(spec, gains_from_sir(predict_track(model, y, cfg.chunk_frames)),
                               cfg.gain_floor);
}

std::vector<double> enhance_signal(const Mlp<float>& model, const std::vector<double>& y,
                                   const EnhanceConfig& cfg) {
  switch (model.meta_.target) {
    case TargetKind::Magnitude: return enhance_magnitude(model, y, cfg);
    case TargetKind::WienerGain: return enhance_gain(model, y, cfg);
    case TargetKind::InterferencePsd: return enhance_psd(model, y, cfg);
    case TargetKind::AprioriSir: return enhance_sir(model, y, cfg);
    case TargetKind::Spp:
      throw DataError("a speech-presence model has no enhancement strategy");
  }
  throw std::logic_error("enhance_signal: unreachable");
}

std::vector<double> resynthesize_with_gain(const std::vector<double>& y,
                                           const Eigen::MatrixXd& gain,
                                           const StftConfig& stft_cfg, double gain_floor) {
  return mask_and_resynthesize(stft(y, stft_cfg), gain, gain_floor);
}

}  // namespace demist
