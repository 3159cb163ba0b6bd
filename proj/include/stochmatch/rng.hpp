#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "stochmatch/rational.hpp"

namespace stochmatch {

/// Independent draw streams of one trial.
enum class StreamKind : std::uint64_t {
  Arrival = 1,      // t_a per left vertex
  Permutation = 2,  // atom of D_a per left vertex
  EdgeOutcome = 3,  // realization of one edge
  Generator = 4,    // instance generators
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: output n of stream (seed, trial, kind, index) is
/// mix64(key + n * golden), where key chains mix64 over the four coordinates.
/// Any draw can be recomputed independently of every other draw, which is what
/// makes lazily sampled and pre-drawn realizations identical.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial, StreamKind kind, std::uint64_t index);

  std::uint64_t next() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }
  /// Uniform on [0, 1) with a 53-bit mantissa.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound), bound > 0, by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Exact inverse-CDF sampling from a finite distribution with rational masses
/// summing to at most one: the masses are put over a common denominator D and
/// a uniform integer in [0, D) selects the outcome. Index size() is returned
/// for the leftover mass.
class ExactSampler {
 public:
  ExactSampler() = default;
  explicit ExactSampler(std::span<const Rational> probs);

  std::size_t size() const { return count_; }
  std::size_t sample(CounterRng& rng) const;

 private:
  std::size_t count_ = 0;
  bool small_ = true;
  std::uint64_t denom64_ = 1;
  std::vector<std::uint64_t> cum64_;
  mpz_class denom_;
  std::vector<mpz_class> cum_;
  std::size_t bits_ = 0;
};

}  // namespace stochmatch
