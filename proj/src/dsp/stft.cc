#include "dsp/stft.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "dsp/fft.h"

namespace demist {

void StftConfig::validate() const {
  if (window_len < 4 || (window_len & (window_len - 1)) != 0)
    throw std::invalid_argument("stft: window_len must be a power of two >= 4, got " +
                                std::to_string(window_len));
  if (hop != window_len / 2)
    throw std::invalid_argument("stft: hop must equal window_len/2 (50% overlap), got hop=" +
                                std::to_string(hop) + " for window_len=" +
                                std::to_string(window_len));
  if (sample_rate <= 0)
    throw std::invalid_argument("stft: sample_rate must be positive");
}

std::vector<double> make_tight_window(int window_len, int hop) {
  StftConfig cfg;
  cfg.window_len = window_len;
  cfg.hop = hop;
  cfg.validate();
  std::vector<double> w(window_len);
  for (int i = 0; i < window_len; ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(window_len));
    w[i] = std::sqrt(hann);
  }
  return w;
}

ComplexSpectrogram stft(const std::vector<double>& signal, const StftConfig& cfg) {
  cfg.validate();
  const int wl = cfg.window_len;
  const int hop = cfg.hop;
  const int K = cfg.num_bins();
  const std::vector<double> window = make_tight_window(wl, hop);

  // Zero-pad wl-hop samples in front so sample 0 already sees a full frame;
  // enough frames at the end so the last sample is covered too.
  const long n = static_cast<long>(signal.size());
  const long pad_front = wl - hop;
  const long num_frames = n == 0 ? 0 : (pad_front + n - 1) / hop + 1;

  ComplexSpectrogram spec;
  spec.config = cfg;
  spec.original_len = n;
  spec.data.resize(K, num_frames);

  std::vector<std::complex<double>> frame(wl);
  for (long f = 0; f < num_frames; ++f) {
    const long start = f * hop - pad_front;  // frame offset in unpadded signal
    for (int i = 0; i < wl; ++i) {
      const long t = start + i;
      const double s = (t >= 0 && t < n) ? signal[static_cast<size_t>(t)] : 0.0;
      frame[static_cast<size_t>(i)] = s * window[static_cast<size_t>(i)];
    }
    fft(frame, /*inverse=*/false);
    for (int k = 0; k < K; ++k) spec.data(k, f) = frame[static_cast<size_t>(k)];
  }
  return spec;
}

std::vector<double> istft(const ComplexSpectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  const int wl = cfg.window_len;
  const int hop = cfg.hop;
  const int K = cfg.num_bins();
  if (spec.num_bins() != K)
    throw std::invalid_argument("istft: spectrogram has " + std::to_string(spec.num_bins()) +
                                " bins, config expects " + std::to_string(K));
  const std::vector<double> window = make_tight_window(wl, hop);
  const long pad_front = wl - hop;
  const long num_frames = spec.num_frames();
  const long padded_len = num_frames == 0 ? 0 : (num_frames - 1) * hop + wl;

  std::vector<double> out(static_cast<size_t>(padded_len), 0.0);
  std::vector<std::complex<double>> frame(wl);
  for (long f = 0; f < num_frames; ++f) {
    // Rebuild the full Hermitian spectrum from the K stored bins.
    for (int k = 0; k < K; ++k) frame[static_cast<size_t>(k)] = spec.data(k, f);
    for (int k = 1; k < wl / 2; ++k)
      frame[static_cast<size_t>(wl - k)] = std::conj(spec.data(k, f));
    fft(frame, /*inverse=*/true);
    const long base = f * hop;
    for (int i = 0; i < wl; ++i)
      out[static_cast<size_t>(base + i)] +=
          frame[static_cast<size_t>(i)].real() * window[static_cast<size_t>(i)];
  }

  const long n = spec.original_len;
  if (n < 0 || pad_front + n > padded_len + hop)
    throw std::invalid_argument("istft: original_len inconsistent with frame count");
  std::vector<double> trimmed(static_cast<size_t>(n), 0.0);
  for (long t = 0; t < n && pad_front + t < padded_len; ++t)
    trimmed[static_cast<size_t>(t)] = out[static_cast<size_t>(pad_front + t)];
  return trimmed;
}

Eigen::MatrixXd magnitude(const ComplexSpectrogram& spec) { return spec.data.cwiseAbs(); }

Eigen::MatrixXd power(const ComplexSpectrogram& spec) { return spec.data.cwiseAbs2(); }

}  // namespace demist
