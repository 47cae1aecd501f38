#pragma once

// Local time of x: the piecewise-constant density z -> L_t^z of the
// occupation measure at t = k/9^N, and its approximation by normalized
// interval-crossing counts.

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "peano/curve.hpp"
#include "peano/errors.hpp"
#include "peano/exact.hpp"
#include "peano/lebesgue.hpp"
#include "peano/limits.hpp"
#include "peano/ternary.hpp"

namespace peano {

inline constexpr unsigned kDefaultLocalTimeCap = 9;

/// L_t^z on the open cells (i/3^N, (i+1)/3^N); zero outside (0,1).
struct LocalTimeProfile {
  TernaryTime t;
  unsigned depth = 0;
  std::vector<Rational> cells;

  Rational cell_width() const { return pow3q(-static_cast<long>(depth)); }

  /// Exact integral of the profile over [a, b].
  Rational integral(const Rational& a, const Rational& b) const {
    if (a >= b) return 0;
    const Rational w = cell_width();
    Rational total = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (sgn(cells[i]) == 0) continue;
      const Rational lo = w * static_cast<unsigned long>(i);
      const Rational hi = lo + w;
      const Rational from = std::max(lo, a);
      const Rational to = std::min(hi, b);
      if (from < to) total += cells[i] * (to - from);
    }
    return total;
  }

  Rational mass() const { return integral(0, 1); }
};

namespace detail {

// Profiles of t = j/9 on the thirds of (0,1).
inline const std::array<std::array<Rational, 3>, 10>& first_level_profiles() {
  static const std::array<std::array<Rational, 3>, 10> table = [] {
    std::array<std::array<Rational, 3>, 10> out{};
    const Rational third(1, 3);
    const Rational two_thirds(2, 3);
    out[0] = {0, 0, 0};
    out[1] = {third, 0, 0};
    out[2] = {two_thirds, 0, 0};
    out[3] = {1, 0, 0};
    out[4] = {1, third, 0};
    out[5] = {1, two_thirds, 0};
    out[6] = {1, 1, 0};
    out[7] = {1, 1, third};
    out[8] = {1, 1, two_thirds};
    out[9] = {1, 1, 1};
    return out;
  }();
  return table;
}

/// Inner cell index read by outer cell i in slot j (a z-map 3z - a or a' - 3z),
/// or -1 when the image leaves (0,1).
inline std::int64_t inner_cell(unsigned slot, std::int64_t i, std::int64_t inner_cells) {
  std::int64_t idx = 0;
  switch (slot) {
    case 0:
    case 2: idx = i; break;                        // 3z
    case 1: idx = inner_cells - 1 - i; break;      // 1 - 3z
    case 3:
    case 5: idx = i - inner_cells; break;          // 3z - 1
    case 4: idx = 2 * inner_cells - 1 - i; break;  // 2 - 3z
    case 6:
    case 8: idx = i - 2 * inner_cells; break;      // 3z - 2
    case 7: idx = 3 * inner_cells - 1 - i; break;  // 3 - 3z
    default: break;
  }
  return (idx >= 0 && idx < inner_cells) ? idx : -1;
}

inline std::vector<Rational> profile_cells(const Integer& k, unsigned n) {
  if (n == 0) return {Rational(k)};  // k in {0, 1}
  if (n == 1) {
    const auto& row = first_level_profiles()[k.get_ui()];
    return {row.begin(), row.end()};
  }
  const Integer inner_count = pow_int(9, n - 1);
  // t = k/9^n lies in slot j: (j 9^(n-1), (j+1) 9^(n-1)]
  Integer j_big = (k - 1) / inner_count;
  if (k == 0) j_big = 0;
  const unsigned slot = static_cast<unsigned>(j_big.get_ui());
  const Integer inner_k = k - j_big * inner_count;
  const std::vector<Rational> inner = profile_cells(inner_k, n - 1);
  const auto inner_cells = static_cast<std::int64_t>(pow3_u64(n - 1));
  const auto outer_cells = 3 * inner_cells;
  const auto& base = first_level_profiles()[slot];
  std::vector<Rational> out(static_cast<std::size_t>(outer_cells));
  for (std::int64_t i = 0; i < outer_cells; ++i) {
    Rational v = base[static_cast<std::size_t>(i / inner_cells)];
    const std::int64_t src = inner_cell(slot, i, inner_cells);
    if (src >= 0) v += inner[static_cast<std::size_t>(src)] / 3;
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

}  // namespace detail

/// Profile at t = k/9^N built by the nine-slot recursion on N.
inline LocalTimeProfile local_time_profile(const Integer& k, unsigned n, unsigned depth_cap = kDefaultLocalTimeCap) {
  if (n > depth_cap) throw Error(Errc::depth_too_large, "local-time depth " + std::to_string(n) + " exceeds the cap " + std::to_string(depth_cap));
  if (k < 0 || k > pow_int(9, n)) throw Error(Errc::invalid_argument, "k must lie in [0, 9^N]");
  LocalTimeProfile out;
  out.t = TernaryTime::from_ratio(k, n);
  out.depth = n;
  out.cells = detail::profile_cells(k, n);
  return out;
}

inline LocalTimeProfile local_time_profile(const TernaryTime& t, unsigned depth_cap = kDefaultLocalTimeCap) {
  const unsigned n = t.block_depth();
  return local_time_profile(Integer(t.value() * Rational(pow_int(9, n))), n, depth_cap);
}

struct OccupationCheck {
  Rational occupation;
  Rational profile_integral;
  Rational residual;
  bool equal() const { return sgn(residual) == 0; }
};

inline OccupationCheck occupation_identity_check(const LocalTimeProfile& profile, const Rational& a, const Rational& b) {
  OccupationCheck out;
  out.occupation = occupation(profile.t, a, b);
  out.profile_integral = profile.integral(a, b);
  out.residual = out.occupation - out.profile_integral;
  return out;
}

inline OccupationCheck occupation_identity_check(const TernaryTime& t, const Rational& a, const Rational& b) {
  return occupation_identity_check(local_time_profile(t), a, b);
}

/// phi(c) = c / C_c, with C from the limit-constant formula applied to c.
inline Rational phi(const Rational& c) {
  if (sgn(c) <= 0 || c > 1) throw Error(Errc::invalid_argument, "phi needs 0 < c <= 1");
  return c / limit_constant(c);
}

/// Polynomial test function with ascending coefficients g(z) = sum a_j z^j.
class Polynomial {
 public:
  static constexpr std::size_t kMaxDegree = 6;

  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coefficients) : coef_(std::move(coefficients)) {
    if (coef_.empty()) coef_.emplace_back(0);
    if (coef_.size() > kMaxDegree + 1) throw Error(Errc::invalid_argument, "test functions have degree at most 6");
  }

  /// "poly:a0,a1,..." (ascending powers); each entry is an exact number.
  static Polynomial parse(std::string_view text) {
    constexpr std::string_view prefix = "poly:";
    if (text.substr(0, prefix.size()) != prefix) throw Error(Errc::parse_error, "test function must look like poly:a0,a1,...");
    text.remove_prefix(prefix.size());
    std::vector<Rational> coefficients;
    while (true) {
      const auto comma = text.find(',');
      coefficients.push_back(parse_rational(text.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    return Polynomial(std::move(coefficients));
  }

  const std::vector<Rational>& coefficients() const noexcept { return coef_; }

  Rational operator()(const Rational& z) const {
    Rational v = 0;
    for (std::size_t j = coef_.size(); j-- > 0;) v = v * z + coef_[j];
    return v;
  }

  /// Exact integral over [a, b].
  Rational integral(const Rational& a, const Rational& b) const {
    Rational total = 0;
    Rational pa = a;
    Rational pb = b;
    for (std::size_t j = 0; j < coef_.size(); ++j) {
      total += coef_[j] * (pb - pa) / static_cast<unsigned long>(j + 1);
      pa *= a;
      pb *= b;
    }
    return total;
  }

  std::string to_string() const {
    std::string s = "poly:";
    for (std::size_t j = 0; j < coef_.size(); ++j) {
      if (j) s += ',';
      s += peano::to_string(coef_[j]);
    }
    return s;
  }

 private:
  std::vector<Rational> coef_{Rational(0)};
};

/// Integral of g against the local time profile.
inline Rational profile_integral(const LocalTimeProfile& profile, const Polynomial& g) {
  const Rational w = profile.cell_width();
  Rational total = 0;
  for (std::size_t i = 0; i < profile.cells.size(); ++i) {
    if (sgn(profile.cells[i]) == 0) continue;
    const Rational lo = w * static_cast<unsigned long>(i);
    total += profile.cells[i] * g.integral(lo, lo + w);
  }
  return total;
}

struct CrossingIntegral {
  Rational exact;
  std::size_t pieces = 0;  // constant pieces with nonzero count
  double value() const { return exact.get_d(); }
};

/// Integral over z of the crossing count of [z - c/2, z + c/2] on [0, t]
/// times g(z). The count only changes where z +- c/2 meets a cell boundary
/// k/3^D' (D' the finest depth the fold inspects), so it is summed exactly
/// over those pieces.
inline CrossingIntegral crossing_integral(const Rational& c, const Polynomial& g, const TernaryTime& t) {
  if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "crossing width must be positive");
  CrossingIntegral out;
  if (t.is_zero()) return out;
  const Rational half = c / 2;
  const Rational z_lo = half;
  const Rational z_hi = 1 - half;
  if (z_lo >= z_hi) return out;  // no full crossing can fit inside [0,1]
  const unsigned depth = std::max(leaf_depth(c), t.block_depth());
  if (depth > kDefaultCrossingLeafCap) throw Error(Errc::depth_too_large, "crossing integral needs depth " + std::to_string(depth));
  const Integer cells = pow3(depth);
  std::set<Rational> cuts{z_lo, z_hi};
  for (Integer i = 0; i <= cells; ++i) {
    const Rational v = make_rational(i, cells);
    for (const Rational& z : {Rational(v - half), Rational(v + half)}) {
      if (z > z_lo && z < z_hi) cuts.insert(z);
    }
  }
  auto it = cuts.begin();
  Rational prev = *it;
  for (++it; it != cuts.end(); ++it) {
    const Rational mid = (prev + *it) / 2;
    const std::uint64_t n = crossings(ExactReal(mid), c, t).total();
    if (n > 0) {
      out.exact += g.integral(prev, *it) * static_cast<unsigned long>(n);
      ++out.pieces;
    }
    prev = *it;
  }
  return out;
}

struct WeakLimitRow {
  Rational c;
  Rational phi;
  Rational crossing_integral;
  Rational normalized;
  Rational target;
  double abs_error = 0;
  double rel_error = 0;
};

/// phi(c) * crossing_integral(c, g, t) against the profile integral of g.
inline std::vector<WeakLimitRow> weak_limit_check(const Polynomial& g, const TernaryTime& t, const std::vector<Rational>& c_list) {
  for (std::size_t i = 1; i < c_list.size(); ++i) {
    if (!(c_list[i] < c_list[i - 1])) throw Error(Errc::invalid_argument, "c list must be strictly decreasing");
  }
  const Rational target = profile_integral(local_time_profile(t), g);
  std::vector<WeakLimitRow> rows;
  for (const Rational& c : c_list) {
    WeakLimitRow row;
    row.c = c;
    row.phi = phi(c);
    row.crossing_integral = crossing_integral(c, g, t).exact;
    row.normalized = row.phi * row.crossing_integral;
    row.target = target;
    row.abs_error = std::abs(Rational(row.normalized - target).get_d());
    row.rel_error = relative_error(row.normalized, target);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace peano
