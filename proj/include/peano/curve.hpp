#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "peano/blocks.hpp"
#include "peano/errors.hpp"
#include "peano/exact.hpp"
#include "peano/ternary.hpp"

namespace peano {

struct CurvePoint {
  Rational x;
  Rational y;
};

namespace detail {

constexpr std::uint8_t flip(std::uint8_t d, unsigned parity) noexcept {
  return parity ? static_cast<std::uint8_t>(2 - d) : d;
}

/// Digit rule for t = 0.t_1 t_2 ... t_L (tail tail tail ...) in base 3:
///   x_i = k^(t_2 + ... + t_{2i-2})(t_{2i-1}),  y_i = k^(t_1 + ... + t_{2i-1})(t_{2i})
/// with k(d) = 2 - d. Past the explicit prefix every digit equals `tail`
/// (0 or 2), so both parities freeze and the remaining digits of x and y are
/// constant, giving a geometric tail.
inline CurvePoint evaluate(std::span<const std::uint8_t> digits, std::uint8_t tail) {
  const std::size_t length = digits.size();
  auto digit = [&](std::size_t j) { return j <= length ? digits[j - 1] : tail; };
  const std::size_t explicit_pairs = (length + 1) / 2;

  Integer x_num = 0;
  Integer y_num = 0;
  unsigned even_parity = 0;  // t_2 + t_4 + ...
  unsigned odd_parity = 0;   // t_1 + t_3 + ...
  for (std::size_t i = 1; i <= explicit_pairs; ++i) {
    const std::uint8_t odd = digit(2 * i - 1);
    const std::uint8_t even = digit(2 * i);
    x_num = 3 * x_num + flip(odd, even_parity);
    odd_parity = (odd_parity + odd) & 1U;
    y_num = 3 * y_num + flip(even, odd_parity);
    even_parity = (even_parity + even) & 1U;
  }
  // tail digits d repeated forever contribute (d/2) * 3^-explicit_pairs
  const Integer scale = pow3(explicit_pairs);
  const Integer two_scale = 2 * scale;
  return {make_rational(2 * x_num + flip(tail, even_parity), two_scale), make_rational(2 * y_num + flip(tail, odd_parity), two_scale)};
}

}  // namespace detail

inline CurvePoint curve_point(const TernaryTime& t) {
  if (t.is_one()) return {Rational(1), Rational(1)};
  return detail::evaluate(t.digits(), 0);
}

inline Rational x_eval(const TernaryTime& t) { return curve_point(t).x; }
inline Rational y_eval(const TernaryTime& t) { return curve_point(t).y; }

/// Evaluation on the expansion that ends in an infinite run of 2s: the last
/// nonzero digit is lowered by one. Used to check well-definedness.
inline CurvePoint curve_point_trailing_twos(const TernaryTime& t) {
  if (t.is_zero()) throw Error(Errc::invalid_argument, "t = 0 has no expansion ending in 2s");
  if (t.is_one()) return detail::evaluate({}, 2);
  std::vector<std::uint8_t> digits = t.digits();
  --digits.back();
  return detail::evaluate(digits, 2);
}

/// Numerators of (x, y) over 3^m at the lattice time k / 9^m, m <= 20.
inline std::pair<std::uint64_t, std::uint64_t> vertex_numerators(std::uint64_t k, unsigned m) {
  const std::uint64_t side = pow3_u64(m);
  if (k == side * side) return {side, side};
  std::array<unsigned, 20> slots{};
  std::uint64_t rest = k;
  for (unsigned i = m; i-- > 0;) {
    slots[i] = static_cast<unsigned>(rest % 9);
    rest /= 9;
  }
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  unsigned even_parity = 0;
  unsigned odd_parity = 0;
  for (unsigned i = 0; i < m; ++i) {
    const auto odd = static_cast<std::uint8_t>(slots[i] / 3);
    const auto even = static_cast<std::uint8_t>(slots[i] % 3);
    x = 3 * x + detail::flip(odd, even_parity);
    odd_parity = (odd_parity + odd) & 1U;
    y = 3 * y + detail::flip(even, odd_parity);
    even_parity = (even_parity + even) & 1U;
  }
  // trailing zeros read as flipped digits 2 when the parity is odd: tail 1 unit
  return {x + even_parity, y + odd_parity};
}

enum class PolygonKind { x_graph, xy_curve };

struct Polygon {
  PolygonKind kind = PolygonKind::x_graph;
  unsigned depth = 0;
  std::vector<std::pair<Rational, Rational>> vertices;
};

inline constexpr unsigned kDefaultPolygonDepthCap = 7;

/// Vertices at t = i/9^m: (t, x(t)) for the graph or (x(t), y(t)) for the curve.
inline Polygon polygon(unsigned m, PolygonKind kind, unsigned depth_cap = kDefaultPolygonDepthCap) {
  if (m < 1) throw Error(Errc::invalid_argument, "polygon depth must be at least 1");
  if (m > depth_cap || m > 12) throw Error(Errc::depth_too_large, "polygon depth " + std::to_string(m) + " exceeds the cap");
  const std::uint64_t count = pow3_u64(2 * m);
  const Integer side = pow3(m);
  const Integer time_den = side * side;
  Polygon out{kind, m, {}};
  out.vertices.reserve(count + 1);
  for (std::uint64_t i = 0; i <= count; ++i) {
    const auto [xn, yn] = vertex_numerators(i, m);
    const Rational x = make_rational(Integer(static_cast<unsigned long>(xn)), side);
    if (kind == PolygonKind::x_graph) {
      out.vertices.emplace_back(make_rational(Integer(static_cast<unsigned long>(i)), time_den), x);
    } else {
      out.vertices.emplace_back(x, make_rational(Integer(static_cast<unsigned long>(yn)), side));
    }
  }
  return out;
}

namespace detail {

struct OccupationPolicy {
  using value_type = Rational;
  Rational a;
  Rational b;

  Rational identity() const { return 0; }
  Rational combine(const Rational& earlier, const Rational& later) const { return earlier + later; }
  // Valid once 3^-depth divides a and b: the range is then inside [a,b] or
  // meets it in at most one point.
  Rational leaf(unsigned depth, std::uint64_t base, bool) const {
    const Integer den = pow3(depth);
    const Rational lo = make_rational(Integer(static_cast<unsigned long>(base)), den);
    const Rational hi = make_rational(Integer(static_cast<unsigned long>(base + 1)), den);
    if (a <= lo && hi <= b) return Rational(1, 1) / (den * den);
    return 0;
  }
};

}  // namespace detail

/// Lebesgue measure of {s in [0, t] : a <= x(s) <= b}.
inline Rational occupation(const TernaryTime& t, const Rational& a, const Rational& b) {
  if (a >= b) throw Error(Errc::invalid_argument, "occupation needs a < b");
  const auto ea = triadic_exponent(a);
  const auto eb = triadic_exponent(b);
  if (!ea || !eb) throw Error(Errc::non_triadic_bounds, "occupation bounds must be triadic rationals");
  const Rational lo = std::max(a, Rational(0));
  const Rational hi = std::min(b, Rational(1));
  if (lo >= hi) return 0;
  const auto depth = static_cast<unsigned>(std::max(*ea, *eb));
  const BlockFold<detail::OccupationPolicy> fold(detail::OccupationPolicy{lo, hi}, depth);
  return fold.interval(0, t.value());
}

}  // namespace peano
