#include "feat/cache.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "util/errors.h"

namespace demist {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'F', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}
void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}
uint32_t get_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint64_t get_u64(const uint8_t* p) {
  return uint64_t(get_u32(p)) | uint64_t(get_u32(p + 4)) << 32;
}
void put_f32_col_rows(std::string& buf, const Eigen::MatrixXf& m) {
  // Columns are frames; a "row" in the file is one frame's vector.
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      float f = m(r, c);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(buf, u);
    }
}

}  // namespace

void write_feature_cache(const std::string& path, const FeatureCache& cache) {
  if (cache.inputs.cols() != cache.targets.cols())
    throw std::invalid_argument("feature cache: input/target frame counts disagree");
  if (cache.num_bins <= 0 || cache.context < 0)
    throw std::invalid_argument("feature cache: bad dimensions");
  if (cache.inputs.rows() != Eigen::Index(cache.num_bins) * (2 * cache.context + 1) ||
      cache.targets.rows() != cache.num_bins)
    throw std::invalid_argument("feature cache: matrix shapes inconsistent with K/T");

  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(cache.num_bins));
  put_u32(buf, static_cast<uint32_t>(cache.context));
  put_u32(buf, static_cast<uint32_t>(cache.kind));
  put_u64(buf, static_cast<uint64_t>(cache.inputs.cols()));
  put_f32_col_rows(buf, cache.inputs);
  put_f32_col_rows(buf, cache.targets);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot create feature cache: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write: " + path);
}

FeatureCache read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature cache: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a feature cache file: " + path);
  const uint32_t version = get_u32(bytes.data() + 4);
  if (version != kVersion)
    throw DataError(path + ": unsupported feature cache version " + std::to_string(version));
  FeatureCache cache;
  cache.num_bins = static_cast<int>(get_u32(bytes.data() + 8));
  cache.context = static_cast<int>(get_u32(bytes.data() + 12));
  const uint32_t kind = get_u32(bytes.data() + 16);
  if (kind > 4) throw DataError(path + ": bad target kind in feature cache");
  cache.kind = static_cast<TargetKind>(kind);
  const uint64_t frames = get_u64(bytes.data() + 20);

  const uint64_t in_dim = uint64_t(cache.num_bins) * (2 * uint64_t(cache.context) + 1);
  // 28-byte header: 4 magic + 4 version + 4 K + 4 T + 4 kind + 8 frames.
  const uint64_t expected = 28 + 4 * frames * (in_dim + uint64_t(cache.num_bins));
  if (bytes.size() != expected)
    throw DataError(path + ": truncated or oversized feature cache (expected " +
                    std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()) +
                    ")");

  cache.inputs.resize(static_cast<Eigen::Index>(in_dim), static_cast<Eigen::Index>(frames));
  cache.targets.resize(cache.num_bins, static_cast<Eigen::Index>(frames));
  const uint8_t* p = bytes.data() + 28;
  auto read_mat = [&p](Eigen::MatrixXf& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        uint32_t u = get_u32(p);
        p += 4;
        float f;
        std::memcpy(&f, &u, 4);
        m(r, c) = f;
      }
  };
  read_mat(cache.inputs);
  read_mat(cache.targets);
  return cache;
}

}  // namespace demist
