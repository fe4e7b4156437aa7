#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace phk {

namespace detail {

using i128 = __int128;
using u128 = unsigned __int128;

inline u128 uabs128(i128 v) {
  return v < 0 ? u128(0) - u128(v) : u128(v);
}

inline u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline int bit_length(u128 v) {
  int n = 0;
  while (v != 0) {
    v >>= 1;
    ++n;
  }
  return n;
}

}  // namespace detail

// Exact rational with int64 numerator/denominator, always reduced, den > 0.
// E-values and post-hoc levels are ratios of small integer counts; keeping
// them exact makes boundary comparisons (stopping conditions, e-BH index
// rules) deterministic. Intermediates use 128-bit; a reduced value that does
// not fit in int64 throws, which is unreachable at the scales this library
// supports (p <= ~1000, k <= ~64).
class Rational {
 public:
  constexpr Rational() = default;

  Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    assign(detail::i128(num), detail::i128(den));
  }

  explicit Rational(std::int64_t num) : num_(num), den_(1) {}

  static Rational from_i128(detail::i128 num, detail::i128 den) {
    Rational r;
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    r.assign(num, den);
    return r;
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  Rational operator+(const Rational& o) const {
    detail::i128 n = detail::i128(num_) * o.den_ + detail::i128(o.num_) * den_;
    detail::i128 d = detail::i128(den_) * o.den_;
    return from_i128(n, d);
  }

  Rational& operator+=(const Rational& o) {
    *this = *this + o;
    return *this;
  }

  Rational operator*(const Rational& o) const {
    return from_i128(detail::i128(num_) * o.num_, detail::i128(den_) * o.den_);
  }

  Rational operator*(std::int64_t s) const {
    return from_i128(detail::i128(num_) * s, detail::i128(den_));
  }

  Rational operator/(std::int64_t s) const {
    if (s == 0) throw std::invalid_argument("Rational: divide by zero");
    return from_i128(detail::i128(num_), detail::i128(den_) * s);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

 private:
  void assign(detail::i128 n, detail::i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    detail::u128 g = detail::gcd128(detail::uabs128(n), detail::u128(d));
    if (g > 1) {
      n /= detail::i128(g);
      d /= detail::i128(g);
    }
    constexpr detail::i128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr detail::i128 hi = std::numeric_limits<std::int64_t>::max();
    if (n < lo || n > hi || d > hi)
      throw std::overflow_error("Rational: value outside int64 range");
    num_ = static_cast<std::int64_t>(n);
    den_ = static_cast<std::int64_t>(d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Sign of a - b, exact.
inline int cmp(const Rational& a, const Rational& b) {
  detail::i128 lhs = detail::i128(a.num()) * b.den();
  detail::i128 rhs = detail::i128(b.num()) * a.den();
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
inline bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
inline bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
inline bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

// Sign of num/den - x, exact. A finite double is itself a rational
// mant * 2^exp with a 53-bit mantissa, so the comparison reduces to integer
// shifts. Requires den > 0 and |num|, den < 2^72 (counts and their small
// products in this library stay far below that).
inline int cmp_ratio_to_double(detail::i128 num, detail::i128 den, double x) {
  if (den <= 0) throw std::invalid_argument("cmp_ratio_to_double: den <= 0");
  if (std::isnan(x)) throw std::invalid_argument("cmp_ratio_to_double: NaN");
  if (std::isinf(x)) return x > 0 ? -1 : 1;
  constexpr detail::i128 cap = detail::i128(1) << 72;
  if (num >= cap || -num >= cap || den >= cap)
    throw std::overflow_error("cmp_ratio_to_double: operands too large");

  int lsign = num < 0 ? -1 : (num > 0 ? 1 : 0);
  int rsign = x < 0 ? -1 : (x > 0 ? 1 : 0);
  if (lsign != rsign) return lsign < rsign ? -1 : 1;
  if (lsign == 0) return 0;

  int e = 0;
  double f = std::frexp(std::fabs(x), &e);  // |x| = f * 2^e, f in [0.5, 1)
  auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
  int exp2 = e - 53;  // |x| = mant * 2^exp2 exactly

  detail::u128 L = detail::uabs128(num);
  detail::u128 R = detail::u128(mant) * detail::u128(den);  // < 2^(53+72)

  int magcmp;
  if (exp2 >= 0) {
    // L vs R << exp2
    if (exp2 >= 128 || detail::bit_length(R) + exp2 > 127) {
      magcmp = -1;  // rhs overflows 128 bits, lhs < 2^127
    } else {
      detail::u128 rs = R << exp2;
      magcmp = L < rs ? -1 : (L > rs ? 1 : 0);
    }
  } else {
    int s = -exp2;
    // L << s vs R
    if (s >= 128 || detail::bit_length(L) + s > 127) {
      magcmp = 1;
    } else {
      detail::u128 ls = L << s;
      magcmp = ls < R ? -1 : (ls > R ? 1 : 0);
    }
  }
  return lsign > 0 ? magcmp : -magcmp;
}

// Sign of r - x for a Rational and a double, exact.
inline int cmp(const Rational& r, double x) {
  return cmp_ratio_to_double(r.num(), r.den(), x);
}

// A significance level, either an exact rational (derived from counts) or a
// plain double (user input, compared against exactly as the dyadic rational
// it is). Used by the closure-set membership tests.
class Level {
 public:
  explicit Level(double d) : rational_(false), d_(d) {}
  explicit Level(const Rational& r) : rational_(true), r_(r) {}

  // true iff level >= num/den with num >= 0, den > 0.
  bool at_least(detail::i128 num, detail::i128 den) const {
    if (num < 0 || den <= 0) throw std::invalid_argument("Level::at_least: bad ratio");
    if (rational_) {
      // rn/rd >= num/den  <=>  rn*den >= num*rd. Cancel factors shared
      // across the two sides so the 128-bit products keep headroom.
      detail::i128 rn = r_.num();
      detail::i128 rd = r_.den();
      if (rn < 0) return false;
      if (rn == 0) return num == 0;
      detail::u128 g0 = detail::gcd128(detail::u128(num), detail::u128(den));
      if (g0 > 1) {
        num /= detail::i128(g0);
        den /= detail::i128(g0);
      }
      detail::u128 g1 = detail::gcd128(detail::u128(rn), detail::u128(num));
      rn /= detail::i128(g1);
      num /= detail::i128(g1);
      detail::u128 g2 = detail::gcd128(detail::u128(den), detail::u128(rd));
      den /= detail::i128(g2);
      rd /= detail::i128(g2);
      if (detail::bit_length(detail::u128(rn)) + detail::bit_length(detail::u128(den)) > 126 ||
          detail::bit_length(detail::uabs128(num)) + detail::bit_length(detail::u128(rd)) > 126)
        throw std::overflow_error("Level::at_least: operands too large");
      return rn * den >= num * rd;
    }
    return cmp_ratio_to_double(num, den, d_) <= 0;
  }

  double to_double() const { return rational_ ? r_.to_double() : d_; }

 private:
  bool rational_ = false;
  double d_ = 0.0;
  Rational r_;
};

}  // namespace phk
