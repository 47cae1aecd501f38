#pragma once

#include <cstdint>
#include <vector>

#include "peano/errors.hpp"
#include "peano/exact.hpp"

namespace peano {

/// A time t in [0,1] with a finite base-3 expansion.
///
/// `digits()` holds t_1 t_2 ... t_L with the trailing zeros trimmed, so the
/// value is sum t_j 3^-j. The point t = 1 has no finite expansion of that
/// form and is flagged separately (its digits are empty).
class TernaryTime {
 public:
  static constexpr unsigned kMaxDigits = 80;

  TernaryTime() = default;

  static TernaryTime one() {
    TernaryTime t;
    t.value_ = 1;
    t.is_one_ = true;
    return t;
  }

  static TernaryTime from_rational(const Rational& t) {
    if (sgn(t) < 0 || t > 1) throw Error(Errc::invalid_argument, "time " + t.get_str() + " is outside [0,1]");
    if (t == 1) return one();
    const auto exponent = triadic_exponent(t);
    if (!exponent) throw Error(Errc::invalid_argument, "time " + t.get_str() + " has no finite ternary expansion");
    if (*exponent > kMaxDigits) throw Error(Errc::depth_too_large, "time " + t.get_str() + " is too fine");
    TernaryTime out;
    out.value_ = t;
    out.digits_.assign(*exponent, 0);
    Integer k = t.get_num();
    for (unsigned long j = *exponent; j-- > 0;) {
      out.digits_[j] = static_cast<std::uint8_t>(mpz_fdiv_ui(k.get_mpz_t(), 3));
      k /= 3;
    }
    return out;
  }

  static TernaryTime from_digits(const std::vector<std::uint8_t>& digits) {
    if (digits.size() > kMaxDigits) throw Error(Errc::depth_too_large, "too many ternary digits");
    Integer k = 0;
    for (std::uint8_t d : digits) {
      if (d > 2) throw Error(Errc::invalid_argument, "ternary digit out of range");
      k = 3 * k + d;
    }
    return from_rational(make_rational(k, pow3(digits.size())));
  }

  /// k / 9^n, 0 <= k <= 9^n.
  static TernaryTime from_ratio(const Integer& k, unsigned n) {
    return from_rational(make_rational(k, pow_int(9, n)));
  }

  const Rational& value() const noexcept { return value_; }
  const std::vector<std::uint8_t>& digits() const noexcept { return digits_; }
  bool is_one() const noexcept { return is_one_; }
  bool is_zero() const noexcept { return !is_one_ && digits_.empty(); }

  unsigned digit_count() const noexcept { return static_cast<unsigned>(digits_.size()); }

  /// Smallest N with t * 9^N an integer.
  unsigned block_depth() const noexcept { return (digit_count() + 1) / 2; }

  friend bool operator==(const TernaryTime& a, const TernaryTime& b) { return a.value_ == b.value_; }
  friend bool operator<(const TernaryTime& a, const TernaryTime& b) { return a.value_ < b.value_; }

 private:
  Rational value_{0};
  std::vector<std::uint8_t> digits_;
  bool is_one_ = false;
};

inline TernaryTime parse_time(std::string_view text) { return TernaryTime::from_rational(parse_rational(text)); }

}  // namespace peano
