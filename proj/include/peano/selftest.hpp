#pragma once

// Fast exact identity checks bundled for the `selftest` command.

#include <string>
#include <vector>

#include "peano/curve.hpp"
#include "peano/lebesgue.hpp"
#include "peano/limits.hpp"
#include "peano/local_time.hpp"

namespace peano {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<SelfCheck> run_selftest() {
  std::vector<SelfCheck> out;
  auto record = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };

  {
    // symmetry and trailing-2 re-expansion on every t = i/9^3
    std::size_t bad = 0;
    const Integer den = pow_int(9, 3);
    for (unsigned long i = 1; i < den.get_ui(); ++i) {
      const auto t = TernaryTime::from_rational(make_rational(Integer(i), den));
      const auto mirror = TernaryTime::from_rational(1 - t.value());
      if (x_eval(mirror) != 1 - x_eval(t)) ++bad;
      if (curve_point_trailing_twos(t).x != x_eval(t)) ++bad;
    }
    record("curve_symmetry_and_expansion", bad == 0, std::to_string(bad) + " mismatches over 728 times");
  }
  {
    std::size_t bad = 0;
    for (unsigned m = 0; m <= 3; ++m) {
      const std::uint64_t count = pow3_u64(2 * m);
      for (std::uint64_t j = 0; j < count; ++j) {
        const auto b = block(m, j);
        const auto t = TernaryTime::from_rational(make_rational(Integer(static_cast<unsigned long>(j)), pow3(2 * m)));
        if (b.entry != x_eval(t)) ++bad;
      }
    }
    record("block_entry_consistency", bad == 0, std::to_string(bad) + " mismatches for m <= 3");
  }
  {
    std::size_t bad = 0;
    for (const Rational& c : {Rational(1, 9), Rational(1, 27), Rational(2, 27)}) {
      for (const ExactReal& r : {ExactReal(0), ExactReal(Rational(c / 2)), ExactReal::sqrt2_times(c / 10)}) {
        const Grid g(c, r);
        if (QuadraticVariation(g).qv(TernaryTime::one()) != qv_from_hits(g, hit_sequence(g, TernaryTime::one()))) ++bad;
      }
    }
    record("qv_engine_vs_reference", bad == 0, std::to_string(bad) + " mismatches");
  }
  {
    std::size_t bad = 0;
    std::size_t total = 0;
    for (const Rational& p : {Rational(1), Rational(2), Rational(1, 2)}) {
      for (const ExactReal& th : {ExactReal(0), ExactReal(Rational(1, 2)), ExactReal::sqrt2_times(Rational(1, 10))}) {
        for (long n : {2L, 3L}) {
          const GridFamily family(p.get_num(), p.get_den(), th);
          ++total;
          if (!kstep_identity_check(n, family).exact()) ++bad;
        }
      }
    }
    record("kstep_recursion", bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " exact");
  }
  {
    std::size_t bad = 0;
    const Integer den = pow_int(9, 2);
    for (unsigned long k = 1; k <= den.get_ui(); ++k) {
      const auto profile = local_time_profile(Integer(k), 2);
      for (unsigned long a = 0; a < 9; ++a) {
        for (unsigned long b = a + 1; b <= 9; ++b) {
          if (!occupation_identity_check(profile, make_rational(Integer(a), 9), make_rational(Integer(b), 9)).equal()) ++bad;
        }
      }
    }
    record("occupation_identity", bad == 0, std::to_string(bad) + " nonzero residuals at depth 2");
  }
  {
    std::size_t bad = 0;
    for (const auto& [pp, qq] : std::vector<std::pair<long, long>>{{1, 1}, {4, 5}, {5, 7}, {1, 4}, {2, 7}}) {
      const GridFamily family(pp, qq, ExactReal::sqrt2_times(Rational(1, 10)));
      const long n = 4;
      const auto rep = count_M(n, family.max_k(n), family);
      if (rep.brute_force != rep.formula || rep.window_count != rep.formula + 1) ++bad;
    }
    record("step_count", bad == 0, std::to_string(bad) + " mismatches");
  }
  return out;
}

}  // namespace peano
