#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "peano/limits.hpp"

using namespace peano;

namespace {

Rational q(long a, long b) { return make_rational(a, b); }

ExactReal sqrt2_over(long d) { return ExactReal::sqrt2_times(q(1, d)); }

// the indicator double sum written out over digit tuples (j_1, ..., j_m)
Rational indicator_by_tuples(long n, long k, const Integer& pp, const Integer& qq, const ExactReal& theta) {
  Rational total = 0;
  const Rational c_n = make_rational(pp, qq * pow3(static_cast<unsigned long>(n)));
  for (long m = 1; m <= k; ++m) {
    std::vector<int> j(static_cast<std::size_t>(m), 0);
    j.back() = 1;
    for (;;) {
      Rational offset = 0;
      for (long l = 1; l <= m; ++l) offset += j[l - 1] * pow3q(n - l) * make_rational(qq, pp);
      if (!is_integer(theta - ExactReal(offset))) {
        const Rational scaled = pow3q(m - 1) * c_n;
        total += pow3q(-(m - 1)) * scaled * scaled;
      }
      // odometer: last digit in {1,2}, the others in {0,1,2}
      long pos = m - 1;
      while (pos >= 0) {
        const int top = pos == m - 1 ? 2 : 2;
        if (j[pos] < top) {
          ++j[pos];
          break;
        }
        j[pos] = pos == m - 1 ? 1 : 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return total;
}

std::uint64_t brute_count(const Integer& period, const Rational& rho, const ExactReal& theta) {
  std::uint64_t count = 0;
  for (Integer m = 0; m < period; ++m) {
    const ExactReal v = frac(theta - ExactReal(Rational(rho * m)));
    if (v <= ExactReal(Rational(rho - 1))) ++count;
  }
  return count;
}

}  // namespace

TEST(CpLimit, TableValues) {
  EXPECT_EQ(c_p_limit(1), q(1, 4));
  EXPECT_EQ(c_p_limit(2), q(1, 3));
  EXPECT_EQ(c_p_limit(q(1, 2)), q(5, 16));
  EXPECT_EQ(c_p_limit(8), q(8, 27));
  EXPECT_NEAR(c_p_limit(8).get_d(), 0.2963, 5e-5);
}

TEST(CpLimit, DivisibleByThree) {
  for (const Rational& p : {Rational(3), q(1, 3), q(2, 9), Rational(6)}) {
    try {
      c_p_limit(p);
      FAIL() << to_string(p);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::divisible_by_three);
    }
  }
}

TEST(CpLimit, InvariantUnderPowersOfThree) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 300; ++i) {
    const Rational p = make_rational(static_cast<long>(1 + rng() % 500), static_cast<long>(1 + rng() % 500));
    EXPECT_EQ(limit_constant(3 * p), limit_constant(p));
    EXPECT_EQ(limit_constant(p / 3), limit_constant(p));
  }
}

TEST(CpLimit, RangeAndMaximum) {
  // u (1 - 3u/4) on u in (1/3, 1] lies in [1/4, 1/3]: 1/4 only at u = 1,
  // 1/3 only at u = 2/3
  std::mt19937_64 rng(103);
  for (int i = 0; i < 500; ++i) {
    const Rational p = make_rational(static_cast<long>(1 + rng() % 1000), static_cast<long>(1 + rng() % 1000));
    const Rational u = pow3q(floor_neg_log3(p)) * p;
    const Rational cp = limit_constant(p);
    EXPECT_GE(cp, q(1, 4));
    EXPECT_LE(cp, q(1, 3));
    EXPECT_EQ(cp == q(1, 3), u == q(2, 3));
    EXPECT_EQ(cp == q(1, 4), u == 1);
  }
  EXPECT_EQ(limit_constant(q(2, 3)), q(1, 3));
  EXPECT_EQ(limit_constant(6), q(1, 3));
}

TEST(IndicatorSum, ClosedFormExample) {
  const GridFamily family(1, 1, sqrt2_over(10));
  EXPECT_EQ(indicator_sum(3, 3, family), q(728, 2916));
  EXPECT_EQ(indicator_sum_closed_form(3, 3, family), q(728, 2916));
  EXPECT_TRUE(generic_position(3, 3, family));
}

TEST(IndicatorSum, EmptyAndDegenerate) {
  EXPECT_EQ(indicator_sum(2, 0, GridFamily(1, 1, sqrt2_over(10))), 0);
  // theta = 0, n = k = 1: the offsets 1 and 2 are integers
  EXPECT_EQ(indicator_sum(1, 1, GridFamily(1, 1, ExactReal(0))), 0);
}

TEST(IndicatorSum, MatchesTupleEnumeration) {
  const std::vector<std::pair<long, long>> ps{{1, 1}, {2, 1}, {1, 2}, {4, 5}, {8, 1}, {5, 7}};
  const std::vector<ExactReal> thetas{ExactReal(0), ExactReal(q(1, 2)), sqrt2_over(10), ExactReal(q(1, 4)), ExactReal(q(2, 5))};
  for (const auto& [pp, qq] : ps) {
    for (const auto& theta : thetas) {
      const GridFamily family(pp, qq, theta);
      for (long n = 1; n <= 4; ++n) {
        for (long k = 0; k <= 4; ++k) {
          const Rational expected = indicator_by_tuples(n, k, pp, qq, theta);
          EXPECT_EQ(indicator_sum(n, k, family), expected);
          if (generic_position(n, k, family)) EXPECT_EQ(indicator_sum_closed_form(n, k, family), expected);
        }
      }
    }
  }
}

TEST(KStep, ExactOnTableGrid) {
  for (long n : {2L, 3L}) {
    for (const auto& [pp, qq] : std::vector<std::pair<long, long>>{{1, 1}, {2, 1}, {1, 2}}) {
      for (const auto& theta : {ExactReal(0), ExactReal(q(1, 2)), sqrt2_over(10)}) {
        const auto report = kstep_identity_check(n, GridFamily(pp, qq, theta));
        EXPECT_TRUE(report.exact()) << "n=" << n << " p=" << pp << "/" << qq << " theta=" << to_string(theta) << " residual=" << to_string(report.residual);
        EXPECT_EQ(report.k, n + floor_neg_log3(make_rational(pp, qq)));
      }
    }
  }
}

TEST(KStep, LeftSideMatchesPolygonOracle) {
  const auto values = oracle::polygon_values(5);
  for (const auto& theta : {ExactReal(0), ExactReal(q(1, 2)), sqrt2_over(10)}) {
    const GridFamily family(1, 1, theta);
    const auto report = kstep_identity_check(2, family);
    const Grid g = family.grid(2);
    EXPECT_EQ(report.lhs, oracle::qv_on_polygon(values, values.size() - 1, g.c, g.r));
  }
}

TEST(KStep, SingleStepAndEveryK) {
  const GridFamily family(1, 1, sqrt2_over(10));
  for (long k = 0; k <= 3; ++k) EXPECT_TRUE(kstep_identity_check(3, family, k).exact()) << k;
  const auto one = kstep_identity_check(2, GridFamily(4, 5, ExactReal(q(1, 7))), 1);
  EXPECT_TRUE(one.exact());
}

TEST(KStep, OutOfM) {
  try {
    kstep_identity_check(0, GridFamily(1, 1, ExactReal(0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::out_of_m);
  }
}

TEST(CountM, DegenerateWindow) {
  const auto report = count_M(3, 3, GridFamily(1, 1, sqrt2_over(10)));
  EXPECT_EQ(report.formula, 0);
  EXPECT_EQ(report.brute_force, 0);
}

TEST(CountM, SpecPairs) {
  for (const auto& [pp, qq] : std::vector<std::pair<long, long>>{{1, 2}, {2, 1}, {1, 5}, {8, 1}}) {
    const GridFamily family(pp, qq, sqrt2_over(10));
    const long n = 4;
    const long k = family.max_k(n);  // k - n = floor(log3(q'/p'))
    const auto report = count_M(n, k, family);
    EXPECT_EQ(report.brute_force, report.formula) << pp << "/" << qq;
    EXPECT_EQ(Integer(static_cast<unsigned long>(brute_count(report.period, report.ratio, family.theta))), report.formula);
  }
}

TEST(CountM, FirstCaseSweep) {
  int first_case = 0;
  std::mt19937_64 rng(107);
  const std::vector<ExactReal> thetas{sqrt2_over(10), ExactReal(q(1, 2)) + sqrt2_over(1000), ExactReal(q(5, 11)) + sqrt2_over(997)};
  for (long pp = 1; pp <= 40; ++pp) {
    for (long qq = 1; qq <= 40; ++qq) {
      if (pp % 3 == 0 || qq % 3 == 0) continue;
      Integer g;
      mpz_gcd(g.get_mpz_t(), Integer(pp).get_mpz_t(), Integer(qq).get_mpz_t());
      if (g != 1) continue;
      const long n = 3;
      const long k = n + floor_neg_log3(make_rational(pp, qq));
      const GridFamily family(pp, qq, thetas[rng() % thetas.size()]);
      const auto report = count_M(n, k, family);
      if (!report.first_case) continue;
      ++first_case;
      EXPECT_EQ(report.brute_force, report.formula) << pp << "/" << qq;
      EXPECT_EQ(report.window_count, report.formula + 1) << pp << "/" << qq;
      // the modular-inverse enumeration lists exactly the qualifying M
      std::set<Integer> members(report.window_members.begin(), report.window_members.end());
      EXPECT_EQ(members.size(), report.window_members.size());
      for (const Integer& m : members) {
        EXPECT_LE(frac(Rational(make_rational(report.l, report.period) - report.ratio * m)), report.ratio - 1);
      }
    }
  }
  EXPECT_GE(first_case, 20);
}

TEST(Sweep, ThirdGridWithSurdOffset) {
  const auto rows = convergence_sweep(1, sqrt2_over(10), TernaryTime::one(), 1, 8);
  ASSERT_EQ(rows.size(), 8U);
  EXPECT_LT(rows.back().rel_error, 0.03);
  EXPECT_EQ(rows.back().limit, q(1, 4));
}

TEST(Sweep, RationalOffsetRows) {
  const auto one = convergence_sweep(1, ExactReal(0), TernaryTime::one(), 8, 8);
  EXPECT_LT(abs(one[0].qv - 1), q(1, 1000));
  const auto half = convergence_sweep(2, ExactReal(0), TernaryTime::one(), 8, 8);
  EXPECT_LT(abs(half[0].qv - q(1, 2)), q(1, 1000));
}

TEST(Sweep, CacheAndCap) {
  SweepCache cache;
  const auto first = convergence_sweep(2, sqrt2_over(10), TernaryTime::from_rational(q(4, 9)), 2, 5, kDefaultSweepCap, &cache);
  EXPECT_EQ(cache.size(), 4U);
  const auto second = convergence_sweep(2, sqrt2_over(10), TernaryTime::from_rational(q(4, 9)), 2, 5, kDefaultSweepCap, &cache);
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].qv, second[i].qv);
  EXPECT_EQ(first[0].limit, q(4, 27));
  try {
    convergence_sweep(1, ExactReal(0), TernaryTime::one(), 1, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::depth_too_large);
  }
}

TEST(Sweep, MonotoneInTime) {
  for (const auto& r : {ExactReal(0), sqrt2_over(10), ExactReal(q(1, 18))}) {
    EXPECT_TRUE(qv_monotone_in_t(Grid(q(1, 9), r), 3));
    EXPECT_TRUE(qv_monotone_in_t(Grid(q(2, 27), r), 3));
  }
}

TEST(CountM, LatticeThetaIsNotGeneric) {
  // theta = 5/11 sits on the grid l/P when 11 divides p', so one more M qualifies
  const GridFamily family(11, 2, ExactReal(q(5, 11)));
  const auto report = count_M(3, family.max_k(3), family);
  EXPECT_TRUE(report.first_case);
  EXPECT_EQ(report.brute_force, report.formula + 1);
}
