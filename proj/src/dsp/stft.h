// dsp/stft.h
//
// Short-time Fourier analysis/synthesis with a tight (self-inverting)
// square-root periodic-Hann window at 50% overlap.  Frames are columns of a
// K x L complex matrix, K = window_len/2 + 1.  The signal is zero-padded at
// both ends so that every sample is covered by a full complement of frames;
// istft() trims the padding, returning exactly the original length.

#ifndef DEMIST_DSP_STFT_H_
#define DEMIST_DSP_STFT_H_

#include <Eigen/Dense>
#include <vector>

namespace demist {

struct StftConfig {
  int window_len = 256;
  int hop = 128;
  int sample_rate = 16000;

  int num_bins() const { return window_len / 2 + 1; }
  // Throws std::invalid_argument unless window_len is an even power of two
  // and hop == window_len/2 (the tight-window reconstruction identity relies
  // on 50% overlap).
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

struct ComplexSpectrogram {
  Eigen::MatrixXcd data;  // num_bins x num_frames
  StftConfig config;
  long original_len = 0;  // samples in the analyzed signal

  int num_bins() const { return static_cast<int>(data.rows()); }
  int num_frames() const { return static_cast<int>(data.cols()); }
};

// w[i] = sqrt(0.5 - 0.5 cos(2 pi i / window_len)); satisfies
// w[i]^2 + w[i+hop]^2 == 1, which makes analysis window == synthesis window
// an exact reconstruction pair at 50% overlap.
std::vector<double> make_tight_window(int window_len, int hop);

ComplexSpectrogram stft(const std::vector<double>& signal, const StftConfig& cfg);

std::vector<double> istft(const ComplexSpectrogram& spec);

Eigen::MatrixXd magnitude(const ComplexSpectrogram& spec);
Eigen::MatrixXd power(const ComplexSpectrogram& spec);

}  // namespace demist

#endif  // DEMIST_DSP_STFT_H_
