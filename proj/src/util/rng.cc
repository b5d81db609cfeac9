#include "util/rng.h"

#include <cmath>
#include <numbers>

namespace demist {

uint64_t Rng::uniform_int(uint64_t n) {
  // (2^64 - n) % n: the smallest r such that [r, 2^64) holds a whole number
  // of copies of [0, n).
  const uint64_t threshold = (~n + 1) % n;
  for (;;) {
    const uint64_t r = gen_();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1] so the log stays finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

uint64_t Rng::derive(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace demist
