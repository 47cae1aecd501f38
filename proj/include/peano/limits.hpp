#pragma once

// Limit constant C_p of the quadratic variation along grids (p/3^n)Z + r/3^n,
// the k-step recursion, its indicator term, the step count and sweeps.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "peano/errors.hpp"
#include "peano/exact.hpp"
#include "peano/lebesgue.hpp"
#include "peano/ternary.hpp"

namespace peano {

/// u (1 - 3u/4) with u = 3^floor(-log3 p) p in (1/3, 1]. No divisibility check.
inline Rational limit_constant(const Rational& p) {
  if (sgn(p) <= 0) throw Error(Errc::invalid_argument, "p must be positive");
  const Rational u = pow3q(floor_neg_log3(p)) * p;
  return u * (1 - Rational(3, 4) * u);
}

inline void require_not_divisible_by_three(const Rational& p) {
  if (mpz_divisible_ui_p(p.get_num_mpz_t(), 3) || mpz_divisible_ui_p(p.get_den_mpz_t(), 3)) {
    throw Error(Errc::divisible_by_three, "numerator and denominator of p must not be divisible by 3 (got " + to_string(p) + ")");
  }
}

inline Rational c_p_limit(const Rational& p) {
  if (sgn(p) <= 0) throw Error(Errc::invalid_argument, "p must be positive");
  require_not_divisible_by_three(p);
  return limit_constant(p);
}

/// Parameters of the family c_n = p/3^n = p'/(3^n q'), offset theta * c_n.
struct GridFamily {
  Integer p_num;  // p'
  Integer p_den;  // q'
  ExactReal theta;

  GridFamily(Integer p_prime, Integer q_prime, ExactReal th) : p_num(std::move(p_prime)), p_den(std::move(q_prime)), theta(std::move(th)) {
    if (p_num <= 0 || p_den <= 0) throw Error(Errc::invalid_argument, "p' and q' must be positive");
    if (mpz_divisible_ui_p(p_num.get_mpz_t(), 3) || mpz_divisible_ui_p(p_den.get_mpz_t(), 3)) {
      throw Error(Errc::divisible_by_three, "p' and q' must not be divisible by 3");
    }
  }

  Rational p() const { return make_rational(p_num, p_den); }
  Rational spacing(long n) const { return p() * pow3q(-n); }
  Grid grid(long n) const {
    const Rational c = spacing(n);
    return {c, theta * ExactReal(c)};
  }
  bool in_m(long n) const { return spacing(n) <= Rational(1, 3); }
  /// Largest k with n - (k - 1) in M.
  long max_k(long n) const { return n + floor_neg_log3(p()); }
  /// 3^n q' / (3^v p'): one step of the sub-grid offsets.
  Rational shift(long n, long v) const { return pow3q(n - v) * make_rational(p_den, p_num); }
};

/// Second sum of the k-step recursion:
///   sum_{m=1..k} 3^-(m-1) sum_{j_1..j_{m-1} in {0,1,2}, j_m in {1,2}}
///       1[{theta - sum_l j_l 3^n q'/(3^l p')} != 0] (3^(m-1) p'/(3^n q'))^2
inline Rational indicator_sum(long n, long k, const GridFamily& family) {
  Rational total = 0;
  for (long m = 1; m <= k; ++m) {
    const Rational weight = pow3q(-(m - 1)) * Rational(pow3q(m - 1) * family.spacing(n)) * Rational(pow3q(m - 1) * family.spacing(n));
    // a = 3^(m-1) j_1 + ... + j_m runs over 1..3^m-1 with 3 not dividing a
    const Rational unit = family.shift(n, m);
    std::uint64_t hits = 0;
    const std::uint64_t top = pow3_u64(static_cast<unsigned>(m));
    for (std::uint64_t a = 1; a < top; ++a) {
      if (a % 3 == 0) continue;
      const ExactReal arg = family.theta - ExactReal(Rational(unit * static_cast<unsigned long>(a)));
      if (!is_integer(arg)) ++hits;
    }
    total += weight * static_cast<unsigned long>(hits);
  }
  return total;
}

/// Value of indicator_sum when every indicator equals 1.
inline Rational indicator_sum_closed_form(long n, long k, const GridFamily& family) {
  const Rational ratio = family.p();
  return Rational(pow_int(9, static_cast<unsigned long>(k)) - 1) / (4 * Rational(pow_int(9, static_cast<unsigned long>(n)))) * ratio * ratio;
}

/// True when theta avoids every integer shift in the indicator window.
inline bool generic_position(long n, long k, const GridFamily& family) {
  for (long m = 1; m <= k; ++m) {
    const Rational unit = family.shift(n, m);
    const std::uint64_t top = pow3_u64(static_cast<unsigned>(m));
    for (std::uint64_t a = 1; a < top; ++a) {
      if (a % 3 == 0) continue;
      if (is_integer(family.theta - ExactReal(Rational(unit * static_cast<unsigned long>(a))))) return false;
    }
  }
  return true;
}

struct KStepReport {
  long n = 0;
  long k = 0;
  Rational lhs;
  Rational subgrid_sum;  // (1/3^k) sum over the 3^k sub-grids
  Rational indicator;
  Rational rhs;
  Rational residual;
  bool generic = false;
  bool exact() const { return sgn(residual) == 0; }
};

/// Both sides of the k-step recursion for [x]_1 along c_n Z + theta c_n.
/// The left side uses the block-fold engine; each sub-grid on the right is
/// evaluated by the polygon walk in hit_sequence.
inline KStepReport kstep_identity_check(long n, const GridFamily& family, std::optional<long> k_override = std::nullopt) {
  if (!family.in_m(n)) throw Error(Errc::out_of_m, "n = " + std::to_string(n) + " is outside M (p/3^n > 1/3)");
  const long k_max = family.max_k(n);
  const long k = k_override.value_or(k_max);
  if (k < 0 || k > k_max) throw Error(Errc::invalid_argument, "k must lie in [0, " + std::to_string(k_max) + "]");
  if (k > 12) throw Error(Errc::depth_too_large, "k-step check limited to k <= 12");

  KStepReport out;
  out.n = n;
  out.k = k;
  out.lhs = QuadraticVariation(family.grid(n)).qv(TernaryTime::one());

  const Rational sub_c = pow3q(k) * family.spacing(n);
  std::map<std::string, Rational> cache;  // keyed by the reduced offset
  Rational sum = 0;
  const std::uint64_t count = pow3_u64(static_cast<unsigned>(k));
  for (std::uint64_t index = 0; index < count; ++index) {
    Rational offset = 0;
    std::uint64_t rest = index;
    for (long v = k; v >= 1; --v) {
      offset += family.shift(n, v) * static_cast<unsigned long>(rest % 3);
      rest /= 3;
    }
    const ExactReal sub_theta = frac(family.theta - ExactReal(offset));
    const std::string key = to_string(sub_theta);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const Grid g(sub_c, sub_theta * ExactReal(sub_c));
      it = cache.emplace(key, qv_from_hits(g, hit_sequence(g, TernaryTime::one()))).first;
    }
    sum += it->second;
  }
  out.subgrid_sum = sum / Rational(pow3(static_cast<unsigned long>(k)));
  out.indicator = indicator_sum(n, k, family);
  out.rhs = out.subgrid_sum + out.indicator;
  out.residual = out.lhs - out.rhs;
  out.generic = generic_position(n, k, family);
  return out;
}

struct CountReport {
  Integer period;        // P = 3^max(k-n,0) p'
  Rational ratio;        // rho = 3^n q' / (3^k p')
  Integer brute_force;   // #{M < P : {theta - rho M} <= rho - 1}
  Integer formula;       // N
  Integer l;             // theta in (l/P, (l+1)/P)
  Integer window_count;  // #{L < P : {l/P - rho L} <= rho - 1}
  Integer inverse;       // Q
  std::vector<Integer> window_members;  // Q (l - j) mod P, j = 0..N
  bool first_case = false;              // 3^k p' / (3^n q') > 1/2
};

/// Number of qualifying M. The first-case precondition is reported, not enforced.
inline CountReport count_M(long n, long k, const GridFamily& family) {
  const long e = std::max(k - n, 0L);
  CountReport out;
  out.period = pow3(static_cast<unsigned long>(e)) * family.p_num;
  const Integer multiplier = pow3(static_cast<unsigned long>(e - (k - n))) * family.p_den;  // rho = multiplier / P
  out.ratio = make_rational(multiplier, out.period);
  out.first_case = pow3q(k - n) * family.p() > Rational(1, 2);
  const Rational bound = out.ratio - 1;
  if (out.period > 1000000) throw Error(Errc::depth_too_large, "count_M period too large for brute force");
  const unsigned long period = out.period.get_ui();

  const ExactReal theta = frac(family.theta);
  out.brute_force = 0;
  for (unsigned long m = 0; m < period; ++m) {
    if (frac(theta - ExactReal(Rational(out.ratio * m))) <= ExactReal(bound)) ++out.brute_force;
  }
  out.formula = multiplier - out.period;

  out.l = floor(theta * ExactReal(out.period));
  const Rational anchor = make_rational(out.l, out.period);
  out.window_count = 0;
  for (unsigned long m = 0; m < period; ++m) {
    if (frac(Rational(anchor - out.ratio * m)) <= bound) ++out.window_count;
  }
  out.inverse = period == 1 ? Integer(0) : mod_inverse(multiplier, out.period);
  for (Integer j = 0; j <= out.formula; ++j) {
    Integer member = out.inverse * (out.l - j);
    mpz_fdiv_r(member.get_mpz_t(), member.get_mpz_t(), out.period.get_mpz_t());
    out.window_members.push_back(member);
  }
  return out;
}

struct SweepRow {
  long n = 0;
  Rational c_n;
  ExactReal r_n;
  Rational qv;
  Rational limit;
  double rel_error = 0;
};

inline constexpr long kDefaultSweepCap = 10;

/// Memo of qv values keyed by (p', q', theta, n, t).
class SweepCache {
 public:
  std::optional<Rational> find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  void store(const std::string& key, const Rational& v) { values_[key] = v; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::map<std::string, Rational> values_;
};

inline double relative_error(const Rational& value, const Rational& target) {
  if (sgn(target) == 0) return std::abs(value.get_d());
  return std::abs(Rational((value - target) / target).get_d());
}

/// Rows of [x]_t along (p/3^n)Z + r/3^n against C_p t, for n in [n_min, n_max].
inline std::vector<SweepRow> convergence_sweep(const Rational& p, const ExactReal& r, const TernaryTime& t, long n_min, long n_max,
                                               long n_cap = kDefaultSweepCap, SweepCache* cache = nullptr) {
  if (sgn(p) <= 0) throw Error(Errc::invalid_argument, "p must be positive");
  if (n_min > n_max) throw Error(Errc::invalid_argument, "empty n range");
  if (n_max > n_cap) throw Error(Errc::depth_too_large, "n = " + std::to_string(n_max) + " exceeds the sweep cap " + std::to_string(n_cap));
  const Rational limit = c_p_limit(p) * t.value();
  std::vector<SweepRow> rows;
  for (long n = n_min; n <= n_max; ++n) {
    SweepRow row;
    row.n = n;
    row.c_n = p * pow3q(-n);
    row.r_n = r * ExactReal(pow3q(-n));
    const std::string key = to_string(p) + "|" + to_string(r / ExactReal(p)) + "|" + std::to_string(n) + "|" + to_string(t.value());
    std::optional<Rational> hit = cache ? cache->find(key) : std::nullopt;
    if (hit) {
      row.qv = *hit;
    } else {
      row.qv = QuadraticVariation(Grid(row.c_n, row.r_n), static_cast<unsigned>(n_cap) + 3).qv(t);
      if (cache) cache->store(key, row.qv);
    }
    row.limit = limit;
    row.rel_error = relative_error(row.qv, limit);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// [x]_t non-decreasing over t = i/9^m.
inline bool qv_monotone_in_t(const Grid& grid, unsigned m) {
  const QuadraticVariation engine(grid);
  const std::uint64_t steps = pow3_u64(2 * m);
  std::uint64_t prev = 0;
  for (std::uint64_t i = 1; i <= steps; ++i) {
    const std::uint64_t cur = engine.transitions(0, make_rational(Integer(static_cast<unsigned long>(i)), pow3(2 * m)));
    if (cur < prev) return false;
    prev = cur;
  }
  return true;
}

}  // namespace peano
