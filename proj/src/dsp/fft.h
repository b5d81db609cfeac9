// dsp/fft.h
//
// Minimal complex FFT and FFT-based linear convolution.  Radix-2 iterative
// transform for power-of-two sizes, O(n^2) DFT fallback otherwise.  Forward
// transform is unnormalized; the inverse scales by 1/n.

#ifndef DEMIST_DSP_FFT_H_
#define DEMIST_DSP_FFT_H_

#include <complex>
#include <vector>

namespace demist {

// In-place transform of a.size() points (any n >= 1).
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Real FFT convenience: forward transform of a real signal, returning the
// n/2+1 non-redundant bins (n must be a power of two).
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

// Full linear convolution, length x.size()+h.size()-1, via overlap-add with
// power-of-two blocks (memory stays bounded for long signals).
std::vector<double> fft_convolve(const std::vector<double>& x, const std::vector<double>& h);

size_t next_pow2(size_t n);

}  // namespace demist

#endif  // DEMIST_DSP_FFT_H_
