#include "stochmatch/rng.hpp"

#include <algorithm>

#include "stochmatch/error.hpp"

namespace stochmatch {

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, StreamKind kind, std::uint64_t index) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ trial);
  k = mix64(k ^ static_cast<std::uint64_t>(kind));
  key_ = mix64(k ^ index);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t skip = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= skip) return r % bound;
  }
}

ExactSampler::ExactSampler(std::span<const Rational> probs) : count_(probs.size()) {
  mpz_class d = 1;
  Rational total;
  for (const Rational& p : probs) {
    if (p.is_negative()) throw InvalidInput("negative probability in sampler");
    total += p;
    mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), p.gmp().get_den_mpz_t());
  }
  if (total > Rational(1)) throw InvalidInput("sampler masses exceed one");
  denom_ = d;
  mpz_class acc = 0;
  for (const Rational& p : probs) {
    acc += p.gmp().get_num() * (d / p.gmp().get_den());
    cum_.push_back(acc);
  }
  bits_ = mpz_sizeinbase(d.get_mpz_t(), 2);
  small_ = bits_ <= 64;
  if (small_) {
    auto to64 = [](const mpz_class& z) {
      std::uint64_t v = 0;
      mpz_export(&v, nullptr, -1, sizeof v, 0, 0, z.get_mpz_t());
      return v;
    };
    denom64_ = to64(d);
    for (const auto& c : cum_) cum64_.push_back(to64(c));
  }
}

std::size_t ExactSampler::sample(CounterRng& rng) const {
  if (count_ == 0) return 0;
  if (small_) {
    const std::uint64_t u = rng.below(denom64_);
    return static_cast<std::size_t>(std::upper_bound(cum64_.begin(), cum64_.end(), u) - cum64_.begin());
  }
  const std::size_t words = (bits_ + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  mpz_class u;
  for (;;) {
    for (auto& w : buf) w = rng.next();
    const std::size_t extra = words * 64 - bits_;
    if (extra != 0) buf.back() >>= extra;
    mpz_import(u.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
    if (u < denom_) break;
  }
  return static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
}

}  // namespace stochmatch
