#pragma once

// Exact arithmetic substrate: GMP-backed integers and rationals, the
// quadratic extension Q(sqrt 2), fractional parts, modular inverses and
// the base-3 exponent used throughout the grid computations.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "peano/errors.hpp"

namespace peano {

using Integer = mpz_class;
using Rational = mpq_class;

enum class Ordering { Less, Equal, Greater };

inline Ordering to_ordering(int c) noexcept {
  return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw Error(Errc::invalid_argument, "zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Integer floor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer ceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Rational frac(const Rational& q) { return q - Rational(floor(q)); }

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline Integer pow_int(unsigned long base, unsigned long exp) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
  return r;
}

inline Integer pow3(unsigned long exp) { return pow_int(3, exp); }

/// 3^e for any integer e.
inline Rational pow3q(long e) {
  if (e >= 0) return Rational(pow3(static_cast<unsigned long>(e)));
  return Rational(Integer(1), pow3(static_cast<unsigned long>(-e)));
}

/// Largest e with 3^e | n, for n != 0.
inline unsigned long multiplicity3(const Integer& n) {
  if (n == 0) throw Error(Errc::invalid_argument, "multiplicity of zero");
  Integer m = abs(n);
  unsigned long e = 0;
  while (mpz_divisible_ui_p(m.get_mpz_t(), 3) != 0) {
    m /= 3;
    ++e;
  }
  return e;
}

/// Returns e when the reduced denominator of q is exactly 3^e.
inline std::optional<unsigned long> triadic_exponent(const Rational& q) {
  Integer d = q.get_den();
  unsigned long e = 0;
  while (d != 1) {
    if (mpz_divisible_ui_p(d.get_mpz_t(), 3) == 0) return std::nullopt;
    d /= 3;
    ++e;
  }
  return e;
}

inline std::int64_t to_int64(const Integer& v) {
  if (!v.fits_slong_p()) throw Error(Errc::invalid_argument, "integer exceeds 64-bit range");
  return v.get_si();
}

/// Number of the form rat + surd * sqrt(2), rat and surd rational.
class ExactReal {
 public:
  ExactReal() = default;
  ExactReal(const Rational& rat) : rat_(rat) {}  // NOLINT(google-explicit-constructor)
  ExactReal(const Integer& n) : rat_(n) {}       // NOLINT(google-explicit-constructor)
  ExactReal(long n) : rat_(n) {}                 // NOLINT(google-explicit-constructor)
  ExactReal(int n) : rat_(n) {}                  // NOLINT(google-explicit-constructor)
  ExactReal(const Rational& rat, const Rational& surd) : rat_(rat), surd_(surd) {}

  static ExactReal sqrt2_times(const Rational& coefficient) { return {Rational(0), coefficient}; }

  const Rational& rat() const noexcept { return rat_; }
  const Rational& surd() const noexcept { return surd_; }
  bool is_rational() const noexcept { return sgn(surd_) == 0; }
  bool is_zero() const noexcept { return sgn(rat_) == 0 && sgn(surd_) == 0; }

  /// Exact sign; when rat and surd have opposite signs, compares rat^2
  /// against 2*surd^2, which can never tie.
  int sign() const {
    const int a = sgn(rat_);
    const int b = sgn(surd_);
    if (b == 0) return a;
    if (a == 0 || a == b) return b;
    const Rational lhs = rat_ * rat_;
    const Rational rhs = 2 * surd_ * surd_;
    return lhs > rhs ? a : b;
  }

  ExactReal operator-() const { return {Rational(-rat_), Rational(-surd_)}; }

  ExactReal& operator+=(const ExactReal& o) {
    rat_ += o.rat_;
    surd_ += o.surd_;
    return *this;
  }
  ExactReal& operator-=(const ExactReal& o) {
    rat_ -= o.rat_;
    surd_ -= o.surd_;
    return *this;
  }
  ExactReal& operator*=(const Rational& k) {
    rat_ *= k;
    surd_ *= k;
    return *this;
  }
  ExactReal& operator/=(const Rational& k) {
    if (sgn(k) == 0) throw Error(Errc::invalid_argument, "division by zero");
    rat_ /= k;
    surd_ /= k;
    return *this;
  }
  ExactReal& operator*=(const ExactReal& o) {
    Rational r = rat_ * o.rat_ + 2 * surd_ * o.surd_;
    Rational s = rat_ * o.surd_ + surd_ * o.rat_;
    rat_ = std::move(r);
    surd_ = std::move(s);
    return *this;
  }
  ExactReal& operator/=(const ExactReal& o) {
    if (o.is_zero()) throw Error(Errc::invalid_argument, "division by zero");
    // multiply by the conjugate; the norm a^2 - 2b^2 is a nonzero rational
    const Rational norm = o.rat_ * o.rat_ - 2 * o.surd_ * o.surd_;
    *this *= ExactReal(o.rat_, Rational(-o.surd_));
    return *this /= norm;
  }

  friend ExactReal operator+(ExactReal a, const ExactReal& b) { return a += b; }
  friend ExactReal operator-(ExactReal a, const ExactReal& b) { return a -= b; }
  friend ExactReal operator*(ExactReal a, const ExactReal& b) { return a *= b; }
  friend ExactReal operator/(ExactReal a, const ExactReal& b) { return a /= b; }

  friend bool operator==(const ExactReal& a, const ExactReal& b) {
    return a.rat_ == b.rat_ && a.surd_ == b.surd_;
  }
  friend std::strong_ordering operator<=>(const ExactReal& a, const ExactReal& b) {
    const int s = (a - b).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  double to_double() const { return rat_.get_d() + surd_.get_d() * std::sqrt(2.0); }

 private:
  Rational rat_{0};
  Rational surd_{0};
};

inline Ordering cmp(const ExactReal& a, const ExactReal& b) { return to_ordering((a - b).sign()); }

/// Exact floor. For a nonzero surd the value is irrational, so the integer
/// square root of 2*B^2 brackets it in an open interval of length 1/D.
inline Integer floor(const ExactReal& a) {
  if (a.is_rational()) return floor(a.rat());
  Integer d;
  mpz_lcm(d.get_mpz_t(), a.rat().get_den_mpz_t(), a.surd().get_den_mpz_t());
  const Integer num_a = a.rat().get_num() * (d / a.rat().get_den());
  const Integer num_b = a.surd().get_num() * (d / a.surd().get_den());
  Integer s = sqrt(Integer(2 * num_b * num_b));
  if (num_b < 0) s = -s - 1;  // floor(-y) = -floor(y) - 1 for irrational y
  Integer n;
  const Integer lo = num_a + s;
  mpz_fdiv_q(n.get_mpz_t(), lo.get_mpz_t(), d.get_mpz_t());
  while (cmp(a, ExactReal(Integer(n + 1))) != Ordering::Less) ++n;
  while (cmp(a, ExactReal(n)) == Ordering::Less) --n;
  return n;
}

inline Integer ceil(const ExactReal& a) {
  Integer f = floor(a);
  if (a.is_rational() && is_integer(a.rat())) return f;
  return f + 1;
}

/// a - floor(a), always in [0, 1).
inline ExactReal frac(const ExactReal& a) { return a - ExactReal(floor(a)); }

inline bool is_integer(const ExactReal& a) { return a.is_rational() && is_integer(a.rat()); }

/// Q in {1, ..., m-1} with a*Q = 1 (mod m).
inline Integer mod_inverse(const Integer& a, const Integer& m) {
  if (m < 2) throw Error(Errc::invalid_argument, "modulus must be at least 2");
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  if (g != 1) throw Error(Errc::not_coprime, "mod_inverse: " + a.get_str() + " and " + m.get_str() + " share a factor");
  Integer q;
  mpz_invert(q.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return q;
}

/// floor(-log_3 p), i.e. the unique e with 3^e * p in (1/3, 1].
inline long floor_neg_log3(const Rational& p) {
  if (sgn(p) <= 0) throw Error(Errc::invalid_argument, "floor_neg_log3 needs p > 0");
  long e = 0;
  Rational u = p;
  const Rational third(1, 3);
  while (u > 1) {
    u /= 3;
    --e;
  }
  while (u <= third) {
    u *= 3;
    ++e;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Text format: sums of terms, each term a product/quotient of integers,
// integer powers B^E and the symbol sqrt2. Decimal literals are rejected.

namespace detail {

class ExactParser {
 public:
  explicit ExactParser(std::string_view text) {
    for (char ch : text) {
      if (std::isspace(static_cast<unsigned char>(ch)) == 0) src_.push_back(ch);
    }
  }

  ExactReal parse() {
    if (src_.empty()) fail("empty number");
    if (src_.find('.') != std::string::npos) fail("decimal literals are not exact; use P/Q");
    ExactReal sum;
    bool first = true;
    while (pos_ < src_.size() || first) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = get() == '-' ? -1 : 1;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      ExactReal term = parse_term();
      sum += sign < 0 ? -term : term;
      first = false;
    }
    return sum;
  }

 private:
  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char get() { return src_[pos_++]; }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::parse_error, "cannot parse '" + src_ + "': " + why);
  }

  ExactReal parse_term() {
    Rational coeff(1);
    long sqrt2_power = 0;
    bool divide = false;
    for (;;) {
      if (src_.compare(pos_, 5, "sqrt2") == 0) {
        pos_ += 5;
        sqrt2_power += divide ? -1 : 1;
      } else {
        Integer v = parse_power();
        if (divide) {
          if (v == 0) fail("division by zero");
          coeff /= Rational(v);
        } else {
          coeff *= Rational(v);
        }
      }
      if (peek() == '*') {
        get();
        divide = false;
      } else if (peek() == '/') {
        get();
        divide = true;
      } else {
        break;
      }
    }
    coeff.canonicalize();
    // sqrt2^(2j) = 2^j, sqrt2^(2j+1) = 2^j sqrt2
    const long half = sqrt2_power >= 0 ? sqrt2_power / 2 : -((-sqrt2_power + 1) / 2);
    const long odd = sqrt2_power - 2 * half;
    if (half >= 0) {
      coeff *= Rational(pow_int(2, static_cast<unsigned long>(half)));
    } else {
      coeff /= Rational(pow_int(2, static_cast<unsigned long>(-half)));
    }
    return odd == 0 ? ExactReal(coeff) : ExactReal::sqrt2_times(coeff);
  }

  Integer parse_power() {
    Integer base = parse_digits();
    if (peek() == '^') {
      get();
      Integer e = parse_digits();
      if (!e.fits_ulong_p() || e > 4096) fail("exponent too large");
      Integer r;
      mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e.get_ui());
      return r;
    }
    return base;
  }

  Integer parse_digits() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0) ++pos_;
    if (start == pos_) fail("expected digits at position " + std::to_string(start));
    return Integer(src_.substr(start, pos_ - start));
  }

  std::string src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExactReal parse_exact_real(std::string_view text) { return detail::ExactParser(text).parse(); }

inline Rational parse_rational(std::string_view text) {
  ExactReal v = parse_exact_real(text);
  if (!v.is_rational()) throw Error(Errc::parse_error, "expected a rational, got a sqrt2 term in '" + std::string(text) + "'");
  return v.rat();
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline std::string to_string(const ExactReal& a) {
  if (a.is_rational()) return to_string(a.rat());
  const std::string surd = to_string(Rational(abs(a.surd()))) + "*sqrt2";
  if (sgn(a.rat()) == 0) return (sgn(a.surd()) < 0 ? "-" : "") + surd;
  return to_string(a.rat()) + (sgn(a.surd()) < 0 ? "-" : "+") + surd;
}

/// Decimal rendering rounded half away from zero; output only.
inline std::string to_decimal(const Rational& q, unsigned digits) {
  const Integer scale = pow_int(10, digits);
  const Rational scaled = Rational(abs(q)) * Rational(scale);
  Integer rounded = floor(Rational(scaled + Rational(1, 2)));
  std::string body = rounded.get_str();
  if (digits > 0) {
    if (body.size() <= digits) body.insert(0, digits + 1 - body.size(), '0');
    body.insert(body.size() - digits, ".");
  }
  const bool negative = sgn(q) < 0 && rounded != 0;
  return (negative ? "-" : "") + body;
}

inline std::ostream& operator<<(std::ostream& os, const ExactReal& a) { return os << to_string(a); }

}  // namespace peano
