#pragma once

// Nine-fold self-similar block structure of the horizontal component.
//
// On the time block [j/9^m, (j+1)/9^m] the path is an affine copy of the
// whole curve with value range [a, a + 3^-m], possibly traversed backwards.
// A block is identified by (depth, base index i with a = i/3^m, reflected).
// Child time-slots 0..8 of an unreflected block sit at value offsets
// 0,0,0,1,1,1,2,2,2 (in units of the child width) and slots 1, 4, 7 run
// backwards. A reflected block visits the same children in reverse order.

#include <array>
#include <cstdint>
#include <vector>

#include "peano/errors.hpp"
#include "peano/exact.hpp"

namespace peano {

inline constexpr unsigned kMaxBlockDepth = 40;  // 3^40 < 2^64

inline constexpr std::array<unsigned, 9> kChildValueOffset{0, 0, 0, 1, 1, 1, 2, 2, 2};
inline constexpr std::array<bool, 9> kChildReflected{false, true, false, false, true, false, false, true, false};

struct ChildStep {
  unsigned value_offset;
  bool reflected;
};

constexpr ChildStep child_step(unsigned time_slot, bool parent_reflected) noexcept {
  const unsigned slot = parent_reflected ? 8 - time_slot : time_slot;
  return {kChildValueOffset[slot], kChildReflected[slot] != parent_reflected};
}

inline std::uint64_t pow3_u64(unsigned e) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i) r *= 3;
  return r;
}

struct BlockDescriptor {
  unsigned depth = 0;
  std::uint64_t index = 0;       // j
  std::uint64_t base_index = 0;  // a_j * 3^depth
  bool reflected = false;
  Rational value_base;           // a_j
  Rational entry;                // x(j / 9^m)
  Rational exit;                 // x((j+1) / 9^m)

  Rational width() const { return pow3q(-static_cast<long>(depth)); }
};

/// Descriptor of time block j at depth m, composed from the base-9 digits
/// of j; memory is O(m).
inline BlockDescriptor block(unsigned m, std::uint64_t j) {
  if (m > 20) throw Error(Errc::depth_too_large, "block depth above 20 does not fit a 64-bit index");
  std::uint64_t count = 1;
  for (unsigned i = 0; i < m; ++i) count *= 9;
  if (j >= count) throw Error(Errc::index_out_of_range, "block index " + std::to_string(j) + " out of range at depth " + std::to_string(m));

  std::array<unsigned, 20> slots{};
  std::uint64_t rest = j;
  for (unsigned i = m; i-- > 0;) {
    slots[i] = static_cast<unsigned>(rest % 9);
    rest /= 9;
  }
  BlockDescriptor out;
  out.depth = m;
  out.index = j;
  for (unsigned i = 0; i < m; ++i) {
    const ChildStep step = child_step(slots[i], out.reflected);
    out.base_index = 3 * out.base_index + step.value_offset;
    out.reflected = step.reflected;
  }
  out.value_base = make_rational(Integer(static_cast<unsigned long>(out.base_index)), pow3(m));
  const Rational top = out.value_base + out.width();
  out.entry = out.reflected ? top : out.value_base;
  out.exit = out.reflected ? out.value_base : top;
  return out;
}

/// Time-ordered fold of a monoid over the block tree.
///
/// Policy supplies `value_type`, `identity()`, `combine(earlier, later)` and
/// `leaf(depth, base_index, reflected)`. `leaf` must be exact for every full
/// block at depth >= memo_depth; full blocks down to memo_depth are tabulated
/// once per (depth, base, orientation), so a whole-curve fold costs O(3^D)
/// rather than O(9^D).
template <class Policy>
class BlockFold {
 public:
  using value_type = typename Policy::value_type;

  static constexpr unsigned kMaxMemoDepth = 14;

  BlockFold(Policy policy, unsigned memo_depth) : policy_(std::move(policy)), memo_depth_(memo_depth) {
    if (memo_depth_ > kMaxMemoDepth) {
      throw Error(Errc::depth_too_large, "block table depth " + std::to_string(memo_depth_) + " exceeds " + std::to_string(kMaxMemoDepth));
    }
    memo_.resize(memo_depth_ + 1);
    const std::uint64_t leaves = pow3_u64(memo_depth_);
    auto& bottom = memo_[memo_depth_];
    bottom.reserve(2 * leaves);
    for (std::uint64_t i = 0; i < leaves; ++i) {
      bottom.push_back(policy_.leaf(memo_depth_, i, false));
      bottom.push_back(policy_.leaf(memo_depth_, i, true));
    }
    for (unsigned d = memo_depth_; d-- > 0;) {
      const std::uint64_t count = pow3_u64(d);
      auto& layer = memo_[d];
      layer.reserve(2 * count);
      const auto& below = memo_[d + 1];
      for (std::uint64_t i = 0; i < count; ++i) {
        for (bool reflected : {false, true}) {
          value_type acc = policy_.identity();
          for (unsigned slot = 0; slot < 9; ++slot) {
            const ChildStep step = child_step(slot, reflected);
            acc = policy_.combine(acc, below[2 * (3 * i + step.value_offset) + (step.reflected ? 1 : 0)]);
          }
          layer.push_back(std::move(acc));
        }
      }
    }
  }

  const Policy& policy() const noexcept { return policy_; }
  unsigned memo_depth() const noexcept { return memo_depth_; }

  const value_type& whole() const { return memo_[0][0]; }

  value_type full(unsigned depth, std::uint64_t base, bool reflected) const {
    if (depth <= memo_depth_) return memo_[depth][2 * base + (reflected ? 1 : 0)];
    return policy_.leaf(depth, base, reflected);
  }

  /// Fold over the time interval [s, t]; s and t must be triadic.
  value_type interval(const Rational& s, const Rational& t) const {
    if (sgn(s) < 0 || t > 1 || s > t) throw Error(Errc::invalid_argument, "interval must satisfy 0 <= s <= t <= 1");
    return fold(0, 0, false, s, t);
  }

 private:
  value_type fold(unsigned depth, std::uint64_t base, bool reflected, const Rational& lo, const Rational& hi) const {
    if (sgn(lo) == 0 && hi == 1) return full(depth, base, reflected);
    value_type acc = policy_.identity();
    if (lo >= hi) return acc;
    if (depth >= kMaxBlockDepth) throw Error(Errc::depth_too_large, "interval endpoints are too fine");
    const Rational nine_lo = 9 * lo;
    const Rational nine_hi = 9 * hi;
    const long first = std::min<long>(8, floor(nine_lo).get_si());
    const long last = std::max<long>(0, ceil(nine_hi).get_si() - 1);
    for (long slot = first; slot <= last; ++slot) {
      const Rational sub_lo = std::max(Rational(nine_lo - slot), Rational(0));
      const Rational sub_hi = std::min(Rational(nine_hi - slot), Rational(1));
      if (sub_lo >= sub_hi) continue;
      const ChildStep step = child_step(static_cast<unsigned>(slot), reflected);
      acc = policy_.combine(acc, fold(depth + 1, 3 * base + step.value_offset, step.reflected, sub_lo, sub_hi));
    }
    return acc;
  }

  Policy policy_;
  unsigned memo_depth_;
  std::vector<std::vector<value_type>> memo_;
};

}  // namespace peano
