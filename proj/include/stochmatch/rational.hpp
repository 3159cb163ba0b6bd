#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace stochmatch {

/// Exact rational scalar, always stored in canonical reduced form.
///
/// Thin value wrapper over GMP's mpq_class. It exists so the rest of the code
/// never sees GMP expression templates, and so parsing/printing of the
/// "num/den" and decimal literal formats lives in one place.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(long num, long den);
  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
  Rational(const mpz_class& num, const mpz_class& den);

  /// Parses "n", "-n", "n/d", or a decimal literal "1.25" (exactly: d digits
  /// after the point give denominator 10^d). Throws ParseError.
  static Rational parse(std::string_view text);

  /// "n" for integers, "n/d" otherwise.
  std::string str() const;
  /// Fixed-point rendering with the given number of digits after the point,
  /// rounded half away from zero using exact arithmetic.
  std::string decimal(int digits) const;
  double to_double() const { return q_.get_d(); }

  const mpq_class& gmp() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_positive() const { return sign() > 0; }
  bool is_negative() const { return sign() < 0; }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class q_;
};

Rational abs(const Rational& r);
Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace stochmatch

template <>
struct std::hash<stochmatch::Rational> {
  std::size_t operator()(const stochmatch::Rational& r) const noexcept {
    return std::hash<std::string>{}(r.str());
  }
};
