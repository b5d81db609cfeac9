// io/wav.h
//
// Minimal RIFF/WAVE reader and writer.  Reads mono 16-bit PCM and 32-bit
// IEEE float files; writes 16-bit PCM.  Every other layout is rejected
// loudly — there is no resampling or channel mixing anywhere in the toolkit.

#ifndef DEMIST_IO_WAV_H_
#define DEMIST_IO_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

namespace demist {

struct WavData {
  std::vector<double> samples;  // 16-bit PCM scaled to [-1, 1) by 1/32768
  int sample_rate = 0;
};

WavData read_wav(const std::string& path);

// Quantize to int16 with round-to-nearest and saturation; *clipped (if
// non-null) counts samples that hit the rails.
std::vector<int16_t> quantize16(const std::vector<double>& samples, long* clipped);

void write_wav16(const std::string& path, const std::vector<int16_t>& samples, int sample_rate);

// Convenience: quantize + write, returning the clip count.
long write_wav16(const std::string& path, const std::vector<double>& samples, int sample_rate);

}  // namespace demist

#endif  // DEMIST_IO_WAV_H_
