#pragma once

// Lebesgue partitions of x for grids cZ + r: hit sequences, quadratic
// variation, interval crossings and truncated variation.
//
// All fast paths are folds over the block tree (blocks.hpp) whose leaves sit
// at the first depth D with 3^-D < c, where a block's value range can hold at
// most one grid point and cannot reach both crossing thresholds.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "peano/blocks.hpp"
#include "peano/curve.hpp"
#include "peano/errors.hpp"
#include "peano/exact.hpp"
#include "peano/ternary.hpp"

namespace peano {

/// Levels {c q + r : q in Z}.
struct Grid {
  Rational c;
  ExactReal r;

  Grid(Rational spacing, ExactReal offset) : c(std::move(spacing)), r(std::move(offset)) {
    if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "grid spacing must be positive");
  }

  ExactReal normalized_offset() const { return r / ExactReal(c); }
  ExactReal theta() const { return frac(normalized_offset()); }
  /// Level q + shift has value c (q' + theta) where q' is the theta-relative index.
  Integer index_shift() const { return floor(normalized_offset()); }
  ExactReal level(const Integer& q) const { return ExactReal(c) * (ExactReal(q) + normalized_offset()); }
};

/// Smallest m >= 0 with 3^-m < c.
inline unsigned leaf_depth(const Rational& c) {
  if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "spacing must be positive");
  unsigned m = 0;
  Rational w = 1;
  while (w >= c) {
    w /= 3;
    ++m;
    if (m > 60) throw Error(Errc::depth_too_large, "spacing too small");
  }
  return m;
}

inline constexpr unsigned kDefaultQvLeafCap = 13;

namespace detail {

inline constexpr std::int64_t kNoLevel = std::numeric_limits<std::int64_t>::min();

/// Theta-relative level in the closed range [i/3^d, (i+1)/3^d], exact.
inline std::int64_t level_in_range(const Rational& c, const ExactReal& theta, unsigned d, const Integer& i) {
  const Rational lo = make_rational(i, pow3(d));
  const Rational hi = lo + pow3q(-static_cast<long>(d));
  const Integer q = ceil(ExactReal(lo / c) - theta);
  if (ExactReal(c) * (ExactReal(q) + theta) <= ExactReal(hi)) return to_int64(q);
  return kNoLevel;
}

/// Level for every range [i/3^D, (i+1)/3^D], by sweeping the grid once.
inline std::vector<std::int64_t> level_table(const Rational& c, const ExactReal& theta, unsigned depth) {
  const std::uint64_t cells = pow3_u64(depth);
  std::vector<std::int64_t> table(cells, kNoLevel);
  const Integer scale = pow3(depth);
  const Rational step = c * scale;
  const ExactReal start = theta * ExactReal(step);
  const ExactReal top(scale);
  for (std::int64_t q = 0;; ++q) {
    const ExactReal y = start + ExactReal(Rational(step * q));
    if (y > top) break;
    const Integer idx = floor(y);
    const auto cell = static_cast<std::int64_t>(idx.get_si());
    if (cell < static_cast<std::int64_t>(cells)) table[cell] = q;
    if (is_integer(y) && cell >= 1) table[cell - 1] = q;
  }
  return table;
}

struct LevelSummary {
  bool empty = true;
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::uint64_t transitions = 0;
};

struct QvPolicy {
  using value_type = LevelSummary;
  Rational c;
  ExactReal theta;
  unsigned depth;
  std::vector<std::int64_t> table;

  LevelSummary identity() const { return {}; }
  LevelSummary combine(const LevelSummary& a, const LevelSummary& b) const {
    if (a.empty) return b;
    if (b.empty) return a;
    return {false, a.first, b.last, a.transitions + b.transitions + (a.last != b.first ? 1U : 0U)};
  }
  LevelSummary leaf(unsigned d, std::uint64_t base, bool) const {
    const std::int64_t q = d == depth ? table[base] : level_in_range(c, theta, d, Integer(static_cast<unsigned long>(base)));
    if (q == kNoLevel) return {};
    return {false, q, q, 0};
  }
};

}  // namespace detail

/// Consecutive distinct grid levels hit by x on a time interval.
struct HitSequence {
  std::vector<Integer> levels;  // q with level value c q + r
  std::size_t k_index = 0;      // 1 once a level is hit, else 0
  std::size_t l_index = 0;      // index of the last hit level

  bool empty() const noexcept { return levels.empty(); }
};

/// Fast engine: level summaries of every block down to the leaf depth are
/// tabulated once per grid, then any triadic interval folds in O(depth).
class QuadraticVariation {
 public:
  explicit QuadraticVariation(const Grid& grid, unsigned leaf_cap = kDefaultQvLeafCap)
      : grid_(grid), shift_(grid.index_shift()), fold_(make_policy(grid, leaf_cap), leaf_depth(grid.c)) {}

  const Grid& grid() const noexcept { return grid_; }
  unsigned depth() const noexcept { return fold_.memo_depth(); }

  detail::LevelSummary summary(const Rational& s, const Rational& t) const { return fold_.interval(s, t); }

  /// Number of level changes on [s, t] (the partition restarted at s).
  std::uint64_t transitions(const Rational& s, const Rational& t) const { return summary(s, t).transitions; }

  Rational qv(const TernaryTime& t) const { return qv_interval(TernaryTime(), t); }

  Rational qv_interval(const TernaryTime& s, const TernaryTime& t) const {
    if (t < s) throw Error(Errc::invalid_argument, "qv_interval needs s <= t");
    return Rational(grid_.c * grid_.c) * static_cast<unsigned long>(transitions(s.value(), t.value()));
  }

  /// 1 when the last level hit on [s,t] differs from the first level hit on
  /// [t,u]; then the concatenated partition gains one extra step at the join.
  int join_correction(const TernaryTime& s, const TernaryTime& t, const TernaryTime& u) const {
    const auto left = summary(s.value(), t.value());
    const auto right = summary(t.value(), u.value());
    return (!left.empty && !right.empty && left.last != right.first) ? 1 : 0;
  }

  std::optional<Integer> first_level(const Rational& s, const Rational& t) const {
    const auto sum = summary(s, t);
    if (sum.empty) return std::nullopt;
    return Integer(static_cast<long>(sum.first)) + shift_;
  }
  std::optional<Integer> last_level(const Rational& s, const Rational& t) const {
    const auto sum = summary(s, t);
    if (sum.empty) return std::nullopt;
    return Integer(static_cast<long>(sum.last)) + shift_;
  }

 private:
  static detail::QvPolicy make_policy(const Grid& grid, unsigned leaf_cap) {
    const unsigned d = leaf_depth(grid.c);
    if (d > leaf_cap) {
      throw Error(Errc::depth_too_large, "grid spacing needs leaf depth " + std::to_string(d) + " above the cap " + std::to_string(leaf_cap));
    }
    const ExactReal theta = grid.theta();
    return {grid.c, theta, d, detail::level_table(grid.c, theta, d)};
  }

  Grid grid_;
  Integer shift_;
  BlockFold<detail::QvPolicy> fold_;
};

inline Rational qv(const Grid& grid, const TernaryTime& t) { return QuadraticVariation(grid).qv(t); }

inline Rational qv_interval(const Grid& grid, const TernaryTime& s, const TernaryTime& t) {
  return QuadraticVariation(grid).qv_interval(s, t);
}

inline constexpr unsigned kReferenceDepthCap = 8;

/// Reference path: walk the lattice polygon at depth max(D, depth of t)
/// vertex by vertex. Consecutive vertices differ by exactly one cell, so each
/// segment's value range is a full cell and the segment holds the same
/// levels as the time block it spans.
inline HitSequence hit_sequence(const Grid& grid, const TernaryTime& t, unsigned depth_cap = kReferenceDepthCap) {
  HitSequence out;
  if (t.is_zero()) return out;
  const unsigned m = std::max({leaf_depth(grid.c), t.block_depth(), 1U});
  if (m > depth_cap) throw Error(Errc::depth_too_large, "reference hit sequence needs depth " + std::to_string(m));
  const ExactReal theta = grid.theta();
  const Integer shift = grid.index_shift();
  const std::uint64_t cells = pow3_u64(m);
  std::vector<std::int64_t> cell_level(cells);
  for (std::uint64_t i = 0; i < cells; ++i) {
    cell_level[i] = detail::level_in_range(grid.c, theta, m, Integer(static_cast<unsigned long>(i)));
  }
  const Integer steps_big(t.value() * Rational(pow_int(9, m)));
  const auto steps = steps_big.get_ui();
  std::uint64_t prev = vertex_numerators(0, m).first;
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const std::uint64_t cur = vertex_numerators(k, m).first;
    const std::int64_t q = cell_level[std::min(prev, cur)];
    prev = cur;
    if (q == detail::kNoLevel) continue;
    const Integer level = Integer(static_cast<long>(q)) + shift;
    if (out.levels.empty() || out.levels.back() != level) out.levels.push_back(level);
  }
  if (!out.levels.empty()) {
    out.k_index = 1;
    out.l_index = out.levels.size();
  }
  return out;
}

/// Quadratic variation read off a hit sequence: (l - k) c^2.
inline Rational qv_from_hits(const Grid& grid, const HitSequence& hits) {
  if (hits.empty()) return 0;
  return Rational(grid.c * grid.c) * static_cast<unsigned long>(hits.l_index - hits.k_index);
}

// ---------------------------------------------------------------------------
// Interval crossings of [z - c/2, z + c/2].

struct CrossingCounts {
  std::uint64_t down = 0;
  std::uint64_t up = 0;
  std::uint64_t total() const noexcept { return down + up; }
  friend bool operator==(const CrossingCounts&, const CrossingCounts&) = default;
};

namespace detail {

/// Two-state counter as a function of its start state.
struct Transducer {
  std::array<std::uint8_t, 2> next{0, 1};
  std::array<std::uint64_t, 2> count{0, 0};

  Transducer then(const Transducer& later) const {
    Transducer out;
    for (unsigned s = 0; s < 2; ++s) {
      const std::uint8_t mid = next[s];
      out.next[s] = later.next[mid];
      out.count[s] = count[s] + later.count[mid];
    }
    return out;
  }
};

struct CrossingState {
  Transducer down;  // 0: waiting for x >= z + c/2, 1: waiting for x < z - c/2
  Transducer up;    // 0: waiting for x <= z - c/2, 1: waiting for x > z + c/2
};

/// Events a block with value range [lo, hi] can trigger.
struct RangeFlags {
  bool hi_reaches_top;     // hi >= z + c/2
  bool lo_below_bottom;    // lo <  z - c/2
  bool lo_reaches_bottom;  // lo <= z - c/2
  bool hi_above_top;       // hi >  z + c/2
};

inline CrossingState crossing_leaf(const RangeFlags& f) {
  CrossingState s;
  s.down.next = {static_cast<std::uint8_t>(f.hi_reaches_top ? 1 : 0), static_cast<std::uint8_t>(f.lo_below_bottom ? 0 : 1)};
  s.down.count = {0, f.lo_below_bottom ? 1U : 0U};
  s.up.next = {static_cast<std::uint8_t>(f.lo_reaches_bottom ? 1 : 0), static_cast<std::uint8_t>(f.hi_above_top ? 0 : 1)};
  s.up.count = {0, f.hi_above_top ? 1U : 0U};
  return s;
}

struct CrossingPolicy {
  using value_type = CrossingState;
  ExactReal top;     // z + c/2
  ExactReal bottom;  // z - c/2
  unsigned depth;
  // Integer thresholds at the table depth, clamped to the cell index range.
  std::int64_t top_ceil;
  std::int64_t top_floor;
  std::int64_t bottom_ceil;
  std::int64_t bottom_floor;

  CrossingPolicy(const ExactReal& z, const Rational& c, unsigned d)
      : top(z + ExactReal(Rational(c / 2))), bottom(z - ExactReal(Rational(c / 2))), depth(d) {
    const ExactReal scale(pow3(d));
    const std::int64_t bound = static_cast<std::int64_t>(pow3_u64(d)) + 2;
    auto clamp = [bound](const Integer& v) {
      if (v < -2) return std::int64_t{-2};
      if (v > bound) return bound;
      return static_cast<std::int64_t>(v.get_si());
    };
    const ExactReal t = top * scale;
    const ExactReal b = bottom * scale;
    top_ceil = clamp(ceil(t));
    top_floor = clamp(floor(t));
    bottom_ceil = clamp(ceil(b));
    bottom_floor = clamp(floor(b));
  }

  CrossingState identity() const { return {}; }
  CrossingState combine(const CrossingState& a, const CrossingState& b) const {
    return {a.down.then(b.down), a.up.then(b.up)};
  }
  CrossingState leaf(unsigned d, std::uint64_t base, bool) const {
    const auto i = static_cast<std::int64_t>(base);
    if (d == depth) {
      return crossing_leaf({i + 1 >= top_ceil, i < bottom_ceil, i <= bottom_floor, i + 1 > top_floor});
    }
    const Integer den = pow3(d);
    const ExactReal lo(make_rational(Integer(static_cast<unsigned long>(base)), den));
    const ExactReal hi(make_rational(Integer(static_cast<unsigned long>(base + 1)), den));
    return crossing_leaf({hi >= top, lo < bottom, lo <= bottom, hi > top});
  }
};

}  // namespace detail

inline constexpr unsigned kDefaultCrossingLeafCap = 13;

/// Crossing counter for one (z, c); reusable across time horizons.
class CrossingCounter {
 public:
  CrossingCounter(const ExactReal& z, const Rational& c, unsigned leaf_cap = kDefaultCrossingLeafCap)
      : fold_(make_policy(z, c, leaf_cap), leaf_depth(c)) {}

  CrossingCounts counts(const TernaryTime& t) const {
    const auto state = fold_.interval(0, t.value());
    return {state.down.count[0], state.up.count[0]};
  }

 private:
  static detail::CrossingPolicy make_policy(const ExactReal& z, const Rational& c, unsigned leaf_cap) {
    if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "crossing width must be positive");
    const unsigned d = leaf_depth(c);
    if (d > leaf_cap) throw Error(Errc::depth_too_large, "crossing width needs leaf depth " + std::to_string(d));
    return {z, c, d};
  }

  BlockFold<detail::CrossingPolicy> fold_;
};

inline CrossingCounts crossings(const ExactReal& z, const Rational& c, const TernaryTime& t) {
  return CrossingCounter(z, c).counts(t);
}

// ---------------------------------------------------------------------------
// Truncated variation: sup over partitions of sum max(|dx| - c, 0).
//
// A left-to-right scan over candidate points keeps three numbers: the best
// total M, and the best total plus or minus the value of its last point (A,
// B). Appending a point f or a block of width < c with values [lo, hi]
// updates (M, A, B) max-plus linearly, so blocks fold as 3x3 matrices.

namespace detail {

using Wide = __int128;
inline constexpr Wide kMinusInf = std::numeric_limits<Wide>::min() / 4;

struct MaxPlus {
  std::array<Wide, 9> m;

  static MaxPlus identity() {
    MaxPlus out;
    out.m.fill(kMinusInf);
    out.m[0] = out.m[4] = out.m[8] = 0;
    return out;
  }

  /// Apply `this` first, then `later`.
  MaxPlus then(const MaxPlus& later) const {
    MaxPlus out;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        Wide best = kMinusInf;
        for (int k = 0; k < 3; ++k) {
          const Wide a = later.m[3 * r + k];
          const Wide b = m[3 * k + c];
          if (a == kMinusInf || b == kMinusInf) continue;
          best = std::max(best, a + b);
        }
        out.m[3 * r + c] = best;
      }
    }
    return out;
  }

  static MaxPlus block(Wide lo, Wide hi, Wide c) {
    return {{0, -lo - c, hi - c,  //
             hi, 0, 2 * hi - c,   //
             -lo, -2 * lo - c, 0}};
  }
};

struct TtvPolicy {
  using value_type = MaxPlus;
  unsigned polygon_depth;
  Integer scale;  // common denominator of c and every touched cell boundary
  Wide c_scaled;

  MaxPlus identity() const { return MaxPlus::identity(); }
  MaxPlus combine(const MaxPlus& a, const MaxPlus& b) const { return a.then(b); }
  MaxPlus leaf(unsigned d, std::uint64_t base, bool reflected) const {
    const Integer unit = scale / pow3(d);
    const Wide lo = to_wide(unit * static_cast<unsigned long>(base));
    const Wide hi = to_wide(unit * static_cast<unsigned long>(base + 1));
    if (d < polygon_depth) return MaxPlus::block(lo, hi, c_scaled);
    // a polygon segment contributes only its exit vertex
    const Wide exit = reflected ? lo : hi;
    return MaxPlus::block(exit, exit, c_scaled);
  }

  static Wide to_wide(const Integer& v) {
    if (!v.fits_slong_p()) throw Error(Errc::depth_too_large, "truncated variation scale overflow");
    return static_cast<Wide>(v.get_si());
  }
};

inline Rational wide_to_rational(Wide v, const Integer& scale) {
  const bool negative = v < 0;
  unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  const auto hi = static_cast<unsigned long>(mag >> 64);
  const auto lo = static_cast<unsigned long>(mag & 0xFFFFFFFFFFFFFFFFULL);
  Integer n = Integer(hi);
  n <<= 64;
  n += Integer(lo);
  if (negative) n = -n;
  return make_rational(n, scale);
}

}  // namespace detail

/// TTV^c of the depth-m polygon on [0, t]; t must be a depth-m vertex time.
inline Rational polygon_truncated_variation(const Rational& c, const TernaryTime& t, unsigned m) {
  if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "truncation must be positive");
  if (t.block_depth() > m) throw Error(Errc::invalid_argument, "t is not a vertex of the depth-" + std::to_string(m) + " polygon");
  if (m > kMaxBlockDepth) throw Error(Errc::depth_too_large, "polygon depth too large");
  const unsigned memo = std::min(m, leaf_depth(c));
  const unsigned finest = std::max(memo, t.block_depth());
  Integer scale;
  const Integer cells = pow3(finest);
  mpz_lcm(scale.get_mpz_t(), cells.get_mpz_t(), c.get_den_mpz_t());
  const detail::Wide c_scaled = detail::TtvPolicy::to_wide(c.get_num() * (scale / c.get_den()));
  const BlockFold<detail::TtvPolicy> fold(detail::TtvPolicy{m, scale, c_scaled}, memo);
  const detail::MaxPlus path = fold.interval(0, t.value());
  // start state after the vertex x(0) = 0: (M, A, B) = (0, 0, 0)
  const detail::Wide total = std::max({path.m[0], path.m[1], path.m[2]});
  return detail::wide_to_rational(std::max<detail::Wide>(total, 0), scale);
}

struct TruncatedVariationResult {
  Rational value;  // TTV^c of the final polygon
  unsigned depth;  // final polygon depth
  Rational bracket_lo;
  std::optional<Rational> bracket_hi;  // TTV^(c - 2*3^-m) of the same polygon
  bool converged = false;
};

inline constexpr unsigned kDefaultTtvDepthCap = 24;

/// Refines the polygon until successive values agree to rel_tol. Since
/// |x - P_m| <= 3^-m, TTV^c(x) lies between TTV^c(P_m) and TTV^(c-2*3^-m)(P_m).
inline TruncatedVariationResult truncated_variation(const Rational& c, const TernaryTime& t, const Rational& rel_tol,
                                                    unsigned depth_cap = kDefaultTtvDepthCap) {
  if (sgn(c) <= 0) throw Error(Errc::invalid_argument, "truncation must be positive");
  if (sgn(rel_tol) < 0) throw Error(Errc::invalid_argument, "tolerance must be non-negative");
  auto bracket = [&](TruncatedVariationResult& r) {
    r.bracket_lo = r.value;
    const Rational slack = 2 * pow3q(-static_cast<long>(r.depth));
    if (c > slack) r.bracket_hi = polygon_truncated_variation(c - slack, t, r.depth);
  };
  // TTV^c(P_m) is exact from m = D + 1 on (D the leaf depth of c), so the
  // stopping test is only trusted from D + 2.
  const unsigned settled = leaf_depth(c) + 2;
  unsigned m = std::max(1U, t.block_depth());
  if (m > depth_cap) throw Error(Errc::depth_too_large, "time is finer than the depth cap");
  Rational prev = polygon_truncated_variation(c, t, m);
  for (++m; m <= depth_cap; ++m) {
    const Rational cur = polygon_truncated_variation(c, t, m);
    const Rational diff = abs(cur - prev);
    if (m >= settled && diff <= rel_tol * abs(cur)) {
      TruncatedVariationResult out{cur, m, {}, std::nullopt, true};
      bracket(out);
      return out;
    }
    prev = cur;
  }
  TruncatedVariationResult out{prev, depth_cap, {}, std::nullopt, false};
  bracket(out);
  throw Error(Errc::no_convergence, "truncated variation did not settle by depth " + std::to_string(depth_cap) + "; bracket [" +
                                        to_string(out.bracket_lo) + ", " + (out.bracket_hi ? to_string(*out.bracket_hi) : "inf") + "]");
}

}  // namespace peano
