#pragma once

#include <cstdint>
#include <random>

namespace t3dp {

// Portable seeded generator. Raw bits come from std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the real-valued conversions below are
// written out here (std::*_distribution is implementation-defined), so streams
// are reproducible across compilers and languages:
//   uniform():  (next() >> 11) * 2^-53                      in [0, 1)
//   normal():   Box-Muller on u1 = 1 - uniform(), u2 = uniform(),
//               sqrt(-2 ln u1) * cos(2 pi u2); one normal per two draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer over seed ^ tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace t3dp
