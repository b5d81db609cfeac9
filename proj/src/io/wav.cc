#include "io/wav.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "util/errors.h"

namespace demist {

namespace {

uint32_t rd_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t rd_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void wr_u32(std::ofstream& out, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& out, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    const uint32_t chunk_len = rd_u32(hdr + 4);
    const size_t body = pos + 8;
    if (body + chunk_len > bytes.size())
      throw DataError("truncated wav chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("malformed fmt chunk in " + path);
      format = rd_u16(bytes.data() + body);
      channels = rd_u16(bytes.data() + body + 2);
      rate = rd_u32(bytes.data() + body + 4);
      bits = rd_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr) throw DataError("wav file missing fmt/data chunk: " + path);
  if (channels != 1)
    throw DataError(path + ": expected mono, got " + std::to_string(channels) +
                    " channels (split or downmix upstream)");

  WavData wav;
  wav.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    const size_t n = data_len / 2;
    wav.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const int16_t s = static_cast<int16_t>(rd_u16(data + 2 * i));
      wav.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const size_t n = data_len / 4;
    wav.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = rd_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      wav.samples[i] = static_cast<double>(f);
    }
  } else {
    throw DataError(path + ": unsupported wav encoding (format=" + std::to_string(format) +
                    ", bits=" + std::to_string(bits) +
                    "); only 16-bit PCM and 32-bit float are read");
  }
  return wav;
}

std::vector<int16_t> quantize16(const std::vector<double>& samples, long* clipped) {
  std::vector<int16_t> out(samples.size());
  long clips = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double v = std::nearbyint(samples[i] * 32768.0);
    if (v > 32767.0) {
      v = 32767.0;
      ++clips;
    } else if (v < -32768.0) {
      v = -32768.0;
      ++clips;
    }
    out[i] = static_cast<int16_t>(v);
  }
  if (clipped != nullptr) *clipped = clips;
  return out;
}

void write_wav16(const std::string& path, const std::vector<int16_t>& samples, int sample_rate) {
  if (sample_rate <= 0) throw DataError("write_wav16: bad sample rate");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot create wav file: " + path);
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  wr_u32(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  wr_u32(out, 16);
  wr_u16(out, 1);  // PCM
  wr_u16(out, 1);  // mono
  wr_u32(out, static_cast<uint32_t>(sample_rate));
  wr_u32(out, static_cast<uint32_t>(sample_rate) * 2);  // byte rate
  wr_u16(out, 2);                                       // block align
  wr_u16(out, 16);                                      // bits
  out.write("data", 4);
  wr_u32(out, data_len);
  for (int16_t s : samples) wr_u16(out, static_cast<uint16_t>(s));
  if (!out) throw DataError("short write: " + path);
}

long write_wav16(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  long clipped = 0;
  write_wav16(path, quantize16(samples, &clipped), sample_rate);
  return clipped;
}

}  // namespace demist
