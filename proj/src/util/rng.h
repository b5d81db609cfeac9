// util/rng.h
//
// Deterministic random number generation.  std::mt19937_64 is bit-exact
// across platforms, but the <random> distributions are not (the standard
// leaves their algorithms unspecified), so the distributions used here are
// spelled out explicitly.  Every consumer derives its own child seed with
// Rng::derive so that adding a draw in one component never shifts the
// sequence seen by another.

#ifndef DEMIST_UTIL_RNG_H_
#define DEMIST_UTIL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace demist {

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); rejection sampling, no modulo bias.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent child seed (splitmix64 finalizer over the
  // combined state); decorrelates children even for adjacent inputs.
  static uint64_t derive(uint64_t seed, uint64_t stream);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace demist

#endif  // DEMIST_UTIL_RNG_H_
