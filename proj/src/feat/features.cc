#include "feat/features.h"

#include <cmath>
#include <stdexcept>

#include "util/errors.h"

namespace demist {

TargetKind parse_target_kind(const std::string& name) {
  if (name == "mag") return TargetKind::Magnitude;
  if (name == "gain") return TargetKind::WienerGain;
  if (name == "psd") return TargetKind::InterferencePsd;
  if (name == "sir") return TargetKind::AprioriSir;
  if (name == "spp") return TargetKind::Spp;
  throw UsageError("unknown target '" + name + "' (expected mag|gain|psd|sir|spp)");
}

std::string target_kind_name(TargetKind kind) {
  switch (kind) {
    case TargetKind::Magnitude: return "mag";
    case TargetKind::WienerGain: return "gain";
    case TargetKind::InterferencePsd: return "psd";
    case TargetKind::AprioriSir: return "sir";
    case TargetKind::Spp: return "spp";
  }
  throw std::logic_error("bad TargetKind");
}

bool bounded_output(TargetKind kind) {
  return kind == TargetKind::WienerGain || kind == TargetKind::Spp;
}

double SppParams::xi_h1() const { return std::pow(10.0, xi_h1_db / 10.0); }

void SppParams::validate() const {
  if (!(p_h1 > 0.0 && p_h1 < 1.0))
    throw std::invalid_argument("spp: speech presence prior must lie in (0,1)");
  if (xi_h1_db < 0.0) throw std::invalid_argument("spp: xi_h1_db must be >= 0");
}

Eigen::MatrixXd smooth_psd_from_power(const Eigen::MatrixXd& power, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("smooth_psd: alpha must lie in [0,1)");
  Eigen::MatrixXd phi(power.rows(), power.cols());
  if (power.cols() == 0) return phi;
  phi.col(0) = power.col(0);  // initialized with the first periodogram
  for (Eigen::Index l = 1; l < power.cols(); ++l)
    phi.col(l) = alpha * phi.col(l - 1) + (1.0 - alpha) * power.col(l);
  return phi;
}

Eigen::MatrixXd smooth_psd(const ComplexSpectrogram& spec, double alpha) {
  return smooth_psd_from_power(power(spec), alpha);
}

Eigen::MatrixXd stack_context(const Eigen::MatrixXd& track, int context) {
  if (context < 0) throw std::invalid_argument("stack_context: negative context");
  const Eigen::Index K = track.rows();
  const Eigen::Index L = track.cols();
  Eigen::MatrixXd out(K * (2 * context + 1), L);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (int d = -context; d <= context; ++d) {
      Eigen::Index src = std::clamp<Eigen::Index>(l + d, 0, L - 1);  // edge replication
      out.block((d + context) * K, l, K, 1) = track.col(src);
    }
  }
  return out;
}

double wiener_gain_of_sir(double xi) {
  if (xi < 0.0) throw std::invalid_argument("wiener_gain_of_sir: negative SIR");
  return xi / (xi + 1.0);
}

double speech_presence_prob(double posterior, const SppParams& params) {
  params.validate();
  const double xi = params.xi_h1();
  const double prior_ratio = (1.0 - params.p_h1) / params.p_h1;
  const double t = prior_ratio * (1.0 + xi) * std::exp(-posterior * xi / (1.0 + xi));
  return 1.0 / (1.0 + t);
}

double psd_floor(const Eigen::MatrixXd& phi_y, double rel) {
  // The absolute term keeps all-silent inputs from dividing by zero.
  const double mean = phi_y.size() > 0 ? phi_y.mean() : 0.0;
  return std::max(rel * mean, 1e-30);
}

Eigen::MatrixXd targets_from_psds(const Eigen::MatrixXd& phi_x, const Eigen::MatrixXd& phi_i,
                                  const Eigen::MatrixXd& phi_y, const Eigen::MatrixXd& x_mag,
                                  const Eigen::MatrixXd& y_power, TargetKind kind,
                                  const FeatureConfig& cfg) {
  const double floor = psd_floor(phi_y, cfg.psd_floor_rel);
  switch (kind) {
    case TargetKind::Magnitude:
      return x_mag;
    case TargetKind::InterferencePsd:
      return phi_i;
    case TargetKind::WienerGain:
    case TargetKind::AprioriSir: {
      Eigen::MatrixXd xi =
          phi_x.array() / phi_i.array().max(floor);
      if (kind == TargetKind::AprioriSir) return xi.array().min(cfg.xi_max).matrix();
      return (xi.array() / (xi.array() + 1.0)).matrix();
    }
    case TargetKind::Spp: {
      Eigen::MatrixXd out(y_power.rows(), y_power.cols());
      for (Eigen::Index l = 0; l < y_power.cols(); ++l)
        for (Eigen::Index k = 0; k < y_power.rows(); ++k)
          out(k, l) = speech_presence_prob(
              y_power(k, l) / std::max(phi_i(k, l), floor), cfg.spp);
      return out;
    }
  }
  throw std::logic_error("bad TargetKind");
}

Eigen::MatrixXd compute_targets(const SceneComponents& scene, TargetKind kind,
                                const FeatureConfig& cfg) {
  std::vector<double> interference(scene.r.size());
  for (size_t t = 0; t < interference.size(); ++t) interference[t] = scene.r[t] + scene.n[t];

  ComplexSpectrogram sy = stft(scene.y, cfg.stft);
  Eigen::MatrixXd phi_y = smooth_psd(sy, cfg.alpha);
  ComplexSpectrogram si = stft(interference, cfg.stft);
  Eigen::MatrixXd phi_i = smooth_psd(si, cfg.alpha);

  Eigen::MatrixXd phi_x, x_mag, y_power;
  if (kind == TargetKind::WienerGain || kind == TargetKind::AprioriSir) {
    ComplexSpectrogram sx = stft(scene.x, cfg.stft);
    phi_x = smooth_psd(sx, cfg.alpha);
  } else {
    phi_x.resize(phi_i.rows(), phi_i.cols());
    phi_x.setZero();
  }
  if (kind == TargetKind::Magnitude) x_mag = magnitude(stft(scene.x, cfg.stft));
  if (kind == TargetKind::Spp) y_power = power(sy);

  return targets_from_psds(phi_x, phi_i, phi_y, x_mag, y_power, kind, cfg);
}

Eigen::MatrixXd input_track(const std::vector<double>& y, TargetKind primary,
                            const FeatureConfig& cfg) {
  ComplexSpectrogram sy = stft(y, cfg.stft);
  if (primary == TargetKind::InterferencePsd) return smooth_psd(sy, cfg.alpha);
  return magnitude(sy);
}

Eigen::VectorXd decision_directed(const Eigen::VectorXd& prev_xhat_power,
                                  const Eigen::VectorXd& phi_i, const Eigen::VectorXd& y_power,
                                  double beta, double floor) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("decision_directed: beta must lie in [0,1]");
  if (prev_xhat_power.size() != phi_i.size() || y_power.size() != phi_i.size())
    throw std::invalid_argument("decision_directed: size mismatch");
  Eigen::ArrayXd denom = phi_i.array().max(std::max(floor, 1e-300));
  Eigen::ArrayXd ml = (y_power.array() / denom - 1.0).max(0.0);
  return (beta * prev_xhat_power.array() / denom + (1.0 - beta) * ml).matrix();
}

std::vector<TrainingPair> make_training_pairs(const SceneComponents& scene, TargetKind primary,
                                              bool with_spp_secondary, const FeatureConfig& cfg) {
  const Eigen::MatrixXd inputs = stack_context(input_track(scene.y, primary, cfg), cfg.context);
  const Eigen::MatrixXd targets = compute_targets(scene, primary, cfg);
  Eigen::MatrixXd secondary;
  if (with_spp_secondary) secondary = compute_targets(scene, TargetKind::Spp, cfg);

  std::vector<TrainingPair> pairs;
  pairs.reserve(static_cast<size_t>(inputs.cols()));
  for (Eigen::Index l = 0; l < inputs.cols(); ++l) {
    TrainingPair p;
    p.input = inputs.col(l);
    p.primary = targets.col(l);
    if (with_spp_secondary) p.secondary = secondary.col(l);
    p.frame = static_cast<int>(l);
    p.utterance = scene.id;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace demist
