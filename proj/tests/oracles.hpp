#pragma once

// Independent reference computations used by the tests. None of these go
// through the block-fold engine; most work directly on polygon vertices.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "peano/peano.hpp"

namespace oracle {

using peano::ExactReal;
using peano::Integer;
using peano::Rational;

/// x(t) straight from the digit formula: x_i = k^(t_2+...+t_{2i-2})(t_{2i-1})
/// with k applied repeatedly, digits of t padded with zeros to 2*pairs.
/// Returns the partial sum over `pairs` digits of x (error at most 3^-pairs).
inline Rational x_partial(const std::vector<std::uint8_t>& digits, unsigned pairs) {
  auto t = [&](std::size_t j) -> unsigned { return j <= digits.size() ? digits[j - 1] : 0; };
  Rational x = 0;
  Rational w(1, 3);
  for (unsigned i = 1; i <= pairs; ++i) {
    unsigned exponent = 0;
    for (unsigned j = 2; j <= 2 * i - 2; j += 2) exponent += t(j);
    unsigned d = t(2 * i - 1);
    for (unsigned e = 0; e < exponent; ++e) d = 2 - d;
    x += w * d;
    w /= 3;
  }
  return x;
}

inline Rational y_partial(const std::vector<std::uint8_t>& digits, unsigned pairs) {
  auto t = [&](std::size_t j) -> unsigned { return j <= digits.size() ? digits[j - 1] : 0; };
  Rational y = 0;
  Rational w(1, 3);
  for (unsigned i = 1; i <= pairs; ++i) {
    unsigned exponent = 0;
    for (unsigned j = 1; j <= 2 * i - 1; j += 2) exponent += t(j);
    unsigned d = t(2 * i);
    for (unsigned e = 0; e < exponent; ++e) d = 2 - d;
    y += w * d;
    w /= 3;
  }
  return y;
}

/// x values of the depth-m polygon from the digit formula.
inline std::vector<Rational> polygon_values(unsigned m) {
  const std::uint64_t count = peano::pow3_u64(2 * m);
  std::vector<Rational> out;
  out.reserve(count + 1);
  for (std::uint64_t i = 0; i <= count; ++i) {
    const auto t = peano::TernaryTime::from_rational(peano::make_rational(Integer(static_cast<unsigned long>(i)), peano::pow3(2 * m)));
    out.push_back(peano::x_eval(t));
  }
  return out;
}

/// Grid levels (theta-free values) hit along a piecewise-linear path, with
/// consecutive repeats collapsed. Each segment is monotone, so its levels
/// are visited in order of the segment's direction.
inline std::vector<ExactReal> lebesgue_levels(const std::vector<Rational>& values, std::size_t last_vertex, const Rational& c, const ExactReal& r,
                                              std::size_t first_vertex = 0) {
  std::vector<ExactReal> hits;
  auto push = [&](const ExactReal& v) {
    if (hits.empty() || !(hits.back() == v)) hits.push_back(v);
  };
  const ExactReal cc(c);
  if (first_vertex == last_vertex) {
    const ExactReal v(values[first_vertex]);
    if (peano::is_integer((v - r) / cc)) hits.push_back(v);
    return hits;
  }
  for (std::size_t i = first_vertex; i < last_vertex; ++i) {
    const Rational& a = values[i];
    const Rational& b = values[i + 1];
    const Rational lo = std::min(a, b);
    const Rational hi = std::max(a, b);
    const Integer q_lo = peano::ceil((ExactReal(lo) - r) / cc);
    const Integer q_hi = peano::floor((ExactReal(hi) - r) / cc);
    if (q_lo > q_hi) continue;
    if (a <= b) {
      for (Integer q = q_lo; q <= q_hi; ++q) push(cc * ExactReal(q) + r);
    } else {
      for (Integer q = q_hi; q >= q_lo; --q) push(cc * ExactReal(q) + r);
    }
  }
  return hits;
}

inline Rational qv_on_polygon(const std::vector<Rational>& values, std::size_t last_vertex, const Rational& c, const ExactReal& r,
                              std::size_t first_vertex = 0) {
  const auto hits = lebesgue_levels(values, last_vertex, c, r, first_vertex);
  if (hits.empty()) return 0;
  return c * c * static_cast<unsigned long>(hits.size() - 1);
}

/// Definition of crossings simulated on a piecewise-linear path whose
/// segments are narrower than c.
inline peano::CrossingCounts crossings_on_polygon(const std::vector<Rational>& values, std::size_t last_vertex, const ExactReal& z,
                                                  const Rational& c) {
  const ExactReal top = z + ExactReal(Rational(c / 2));
  const ExactReal bottom = z - ExactReal(Rational(c / 2));
  peano::CrossingCounts out;
  int down_state = 0;
  int up_state = 0;
  for (std::size_t i = 0; i < last_vertex; ++i) {
    const ExactReal lo(std::min(values[i], values[i + 1]));
    const ExactReal hi(std::max(values[i], values[i + 1]));
    if (down_state == 0) {
      if (hi >= top) down_state = 1;
    } else if (lo < bottom) {
      down_state = 0;
      ++out.down;
    }
    if (up_state == 0) {
      if (lo <= bottom) up_state = 1;
    } else if (hi > top) {
      up_state = 0;
      ++out.up;
    }
  }
  return out;
}

/// sup over partitions of sum max(|dx| - c, 0) on the vertex list, O(n^2).
inline Rational ttv_quadratic(const std::vector<Rational>& values, std::size_t last_vertex, const Rational& c) {
  std::vector<Rational> best(last_vertex + 1, Rational(0));
  Rational overall = 0;
  for (std::size_t j = 1; j <= last_vertex; ++j) {
    Rational b = 0;
    for (std::size_t i = 0; i < j; ++i) {
      const Rational gain = abs(values[j] - values[i]) - c;
      const Rational cand = best[i] + (sgn(gain) > 0 ? gain : Rational(0));
      if (cand > b) b = cand;
    }
    best[j] = b;
    overall = std::max(overall, b);
  }
  return overall;
}

/// Occupation of [a, b] by the time blocks of the depth-m polygon, read from
/// vertex pairs; exact once 3^-m divides a and b.
inline Rational occupation_on_polygon(const std::vector<Rational>& values, std::size_t last_vertex, unsigned m, const Rational& a,
                                      const Rational& b) {
  const Rational block_time = peano::pow3q(-2 * static_cast<long>(m));
  Rational total = 0;
  for (std::size_t i = 0; i < last_vertex; ++i) {
    const Rational lo = std::min(values[i], values[i + 1]);
    const Rational hi = std::max(values[i], values[i + 1]);
    if (a <= lo && hi <= b) total += block_time;
  }
  return total;
}

/// Local-time profile at k/9^N computed from the occupation of every cell.
inline std::vector<Rational> profile_from_occupation(const std::vector<Rational>& values, std::size_t last_vertex, unsigned m, unsigned n) {
  const std::uint64_t cells = peano::pow3_u64(n);
  const Rational w = peano::pow3q(-static_cast<long>(n));
  std::vector<Rational> out;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const Rational a = w * static_cast<unsigned long>(i);
    out.push_back(occupation_on_polygon(values, last_vertex, m, a, a + w) / w);
  }
  return out;
}

/// Midpoint Riemann sum of the total crossing count times g over z in
/// [0, 1], step c/8.
inline double crossing_integral_scan(const Rational& c, const peano::Polynomial& g, const std::vector<Rational>& values, std::size_t last_vertex) {
  const Rational step = c / 8;
  double total = 0;
  for (Rational z = step / 2; z < 1; z += step) {
    const auto counts = crossings_on_polygon(values, last_vertex, ExactReal(z), c);
    total += static_cast<double>(counts.total()) * g(z).get_d() * step.get_d();
  }
  return total;
}

/// Deterministic random triadic time with up to `digits` ternary digits.
inline peano::TernaryTime random_time(std::mt19937_64& rng, unsigned digits) {
  std::uniform_int_distribution<int> d(0, 2);
  std::vector<std::uint8_t> ds(digits);
  for (auto& x : ds) x = static_cast<std::uint8_t>(d(rng));
  return peano::TernaryTime::from_digits(ds);
}

}  // namespace oracle
