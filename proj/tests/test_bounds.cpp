#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "patpoisson/bounds.hpp"
#include "patpoisson/errors.hpp"

using namespace patpoisson;

namespace {

// sum over S_n of q^inv, by enumeration.
Rational brute_inversion_poly(int n, const Rational& q) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  Rational total = 0;
  do {
    int inv = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inv += v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(j)];
    Rational t = 1;
    for (int k = 0; k < inv; ++k) t *= q;
    total += t;
  } while (std::next_permutation(v.begin(), v.end()));
  return total;
}

Rational rpow(const Rational& q, int k) {
  Rational r = 1;
  for (int i = 0; i < k; ++i) r *= q;
  return r;
}

Rational I(int n, const Rational& q) {
  Rational out = 1;
  for (int j = 1; j <= n; ++j) {
    Rational s = 0;
    for (int k = 0; k < j; ++k) s += rpow(q, k);
    out *= s;
  }
  return out;
}

}  // namespace

TEST(InversionPoly, MatchesEnumeration) {
  for (const Rational& q : {Rational(1, 3), Rational(1), Rational(2)})
    for (int n = 1; n <= 7; ++n) EXPECT_EQ(inversion_poly_value(n, BigScalar(q)).rational(), brute_inversion_poly(n, q));
}

TEST(InversionPoly, RejectsBadArguments) {
  EXPECT_THROW(inversion_poly_value(0, BigScalar(1)), InvalidInput);
  EXPECT_THROW(inversion_poly_value(3, BigScalar(-1)), InvalidInput);
}

TEST(CountFormulas, N1AndBoundaryCounts) {
  for (long n : {10L, 57L, 100L}) {
    EXPECT_EQ(consecutive_n1(n, 4), Integer(8 * n - 48 + 4));
    EXPECT_EQ(boundary_b1_count(n, 4), Integer(6 * n - 24));
    EXPECT_EQ(boundary_b1_count(n, 5), Integer(8 * n - 36));
    EXPECT_EQ(monotone_n2(n, 3), Integer(9 - 27 - 2 * n + 6 * n));
  }
}

TEST(UniformClassical, LambdaAndD1MatchSubsetCounting) {
  const long n = 8;
  const int j = 3;
  // Ordered pairs of j-subsets of [n] that intersect.
  std::uint64_t pairs = 0;
  for (std::uint32_t a = 0; a < (1u << n); ++a) {
    if (std::popcount(a) != j) continue;
    for (std::uint32_t b = 0; b < (1u << n); ++b)
      if (std::popcount(b) == j && (a & b)) ++pairs;
  }
  const auto r = uniform_classical_bounds(n, j, D2Method::crude);
  EXPECT_EQ(r.lambda.rational(), Rational(56, 6));
  EXPECT_EQ(r.d1.rational(), Rational(Integer(pairs), 36));
}

TEST(UniformClassical, CrudeD2IsLambdaTimesBinomialSum) {
  const long n = 30;
  const int j = 5;
  Rational sum = 0;
  for (int k = 1; k <= j - 1; ++k)
    sum += Rational(binomial_int(static_cast<unsigned>(n - j), static_cast<unsigned>(k)), factorial_int(static_cast<unsigned>(k)));
  const auto r = uniform_classical_bounds(n, j, D2Method::crude);
  EXPECT_EQ(r.d2.rational(), r.lambda.rational() * sum);
  EXPECT_EQ(r.D, min(BigScalar(1), BigScalar(1) / r.lambda) * (r.d1 + r.d2));
  EXPECT_EQ(r.tv_count_bound, BigScalar(2) * r.D);
}

TEST(UniformClassical, IntervalOrdering) {
  for (auto [n, j] : {std::pair{100L, 36}, {1000L, 133}, {10000L, 442}}) {
    for (auto method : {D2Method::crude, D2Method::robbins}) {
      const auto r = uniform_classical_bounds(n, j, method);
      EXPECT_LE(r.count_lower, r.count_center);
      EXPECT_LE(r.count_center, r.count_upper);
      EXPECT_LE(r.count_center, r.factorial_n);
    }
  }
}

TEST(UniformClassical, ExactOverlapReportsBothMultiplicities) {
  const auto r = uniform_classical_bounds(12, 3, D2Method::exact_overlap, Pattern::parse("132"));
  ASSERT_TRUE(r.d2_pair_multiplicity);
  EXPECT_GE(*r.d2_pair_multiplicity, r.d2);
}

TEST(UniformClassical, ArgumentErrors) {
  EXPECT_THROW(uniform_classical_bounds(10, 2, D2Method::crude), InvalidInput);
  EXPECT_THROW(uniform_classical_bounds(5, 6, D2Method::crude), InvalidInput);
  EXPECT_THROW(uniform_classical_bounds(10, 3, D2Method::lemma), InvalidInput);
  EXPECT_THROW(uniform_classical_bounds(10, 3, D2Method::exact_overlap), InvalidInput);
  EXPECT_THROW(uniform_classical_bounds(10, 3, D2Method::exact_overlap, Pattern::parse("1234")), InvalidInput);
}

TEST(UniformConsecutive, ReproducesPrintedLowerBounds) {
  const std::vector<std::tuple<long, int, const char*, const char*>> rows{
      {100, 6, "3.98735e157", "9.33262e157"},
      {1000, 7, "5.77948e2566", "4.02387e2567"},
      {10000, 9, "2.49966e35659", "2.84626e35659"},
      {100000, 10, "2.48004e456573", "2.82423e456573"},
      {1000000, 11, "7.34802e5565708", "8.26393e5565708"}};
  for (const auto& [n, m, lower, fact] : rows) {
    const auto r = uniform_consecutive_bounds(n, m, D2Method::crude);
    EXPECT_EQ(r.count_lower.scientific(6), lower) << n;
    EXPECT_EQ(r.factorial_n.scientific(6), fact) << n;
  }
}

TEST(UniformConsecutive, LambdaAndMean) {
  const auto r = uniform_consecutive_bounds(20, 4, D2Method::crude);
  EXPECT_EQ(r.lambda.rational(), Rational(16, 24));
  EXPECT_EQ(r.mean.rational(), Rational(17, 24));
}

TEST(UniformConsecutive, ExactOverlapD2ForIncreasingPattern) {
  // 123 overlaps only with itself: L1 = L2 = 1.
  const long n = 12;
  const auto r = uniform_consecutive_bounds(n, 3, D2Method::exact_overlap, Pattern::parse("123"));
  const Rational expected = Rational(2 * (n - 6 + 1), 120) + Rational(2 * (n - 6 + 2), 24);
  EXPECT_EQ(r.d2.rational(), expected);
  EXPECT_FALSE(r.small_n_exact_counts);
}

TEST(UniformConsecutive, SmallNUsesExactCounts) {
  const auto r = uniform_consecutive_bounds(6, 4, D2Method::exact_overlap, Pattern::parse("1234"));
  EXPECT_TRUE(r.small_n_exact_counts);
  // 3 windows: 3 diagonal pairs plus ordered pairs at distance 1 (4) and 2 (2).
  EXPECT_EQ(r.d1.rational(), Rational(9, 576));
}

TEST(UniformConsecutive, LemmaMethodIsFlagged) {
  const auto r = uniform_consecutive_bounds(50, 4, D2Method::lemma);
  EXPECT_TRUE(std::any_of(r.notes.begin(), r.notes.end(), [](const std::string& s) { return s.find("not a certified") != std::string::npos; }));
  EXPECT_THROW(uniform_consecutive_bounds(50, 4, D2Method::robbins), InvalidInput);
}

TEST(Mallows, ClosedFormsFor2341) {
  const Pattern tau = Pattern::parse("2341");
  for (long n : {10L, 100L})
    for (const Rational& q : {Rational(1, 2), Rational(1), Rational(2)}) {
      MallowsOptions opt;
      opt.convention = CountConvention::boundary;
      const auto r = mallows_consecutive_bounds(n, BigScalar(q), tau, opt);
      const Rational i4 = I(4, q), i7 = I(7, q);
      EXPECT_EQ(r.lambda.rational(), Rational(n - 4) * rpow(q, 3) / i4);
      EXPECT_EQ(r.b1_boundary.rational(), Rational(6 * n - 24) * rpow(q, 6) / (i4 * i4));
      EXPECT_EQ(r.b1_n1.rational(), Rational(consecutive_n1(n, 4)) * rpow(q, 6) / (i4 * i4));
      const Rational poly = 1 + q + 2 * rpow(q, 2) + 2 * rpow(q, 3) + 2 * rpow(q, 4) + rpow(q, 5) + rpow(q, 6);
      EXPECT_EQ(r.b2.rational(), Rational(2 * n - 8) * rpow(q, 9) * poly / i7);
    }
}

TEST(Mallows, ClosedFormsFor23451) {
  const Pattern tau = Pattern::parse("23451");
  for (long n : {10L, 100L})
    for (const Rational& q : {Rational(1, 2), Rational(1), Rational(2)}) {
      MallowsOptions opt;
      opt.convention = CountConvention::boundary;
      const auto r = mallows_consecutive_bounds(n, BigScalar(q), tau, opt);
      const Rational i5 = I(5, q), i9 = I(9, q);
      EXPECT_EQ(r.lambda.rational(), Rational(n - 5) * rpow(q, 4) / i5);
      EXPECT_EQ(r.b1_boundary.rational(), Rational(8 * n - 36) * rpow(q, 8) / (i5 * i5));
      const int c[] = {1, 1, 2, 3, 4, 4, 5, 4, 4, 3, 2, 1, 1};
      Rational poly = 0;
      for (int k = 0; k < 13; ++k) poly += c[k] * rpow(q, k);
      EXPECT_EQ(r.b2.rational(), Rational(2 * n - 10) * rpow(q, 12) * poly / i9);
    }
}

TEST(Mallows, UniformCaseMatchesUniformBounds) {
  const Pattern tau = Pattern::parse("1342");
  const auto m = mallows_consecutive_bounds(40, BigScalar(1), tau);
  const auto u = uniform_consecutive_bounds(40, 4, D2Method::exact_overlap, tau);
  EXPECT_EQ(m.lambda, u.lambda);
  EXPECT_EQ(m.b1, u.d1);
  EXPECT_EQ(m.b2, u.d2);
}

TEST(Mallows, ConventionsOrderFactors) {
  const Pattern tau = Pattern::parse("123");
  MallowsOptions lit, sym;
  lit.convention = CountConvention::literal;
  sym.convention = CountConvention::symmetric;
  const auto a = mallows_consecutive_bounds(30, BigScalar(Rational(1, 2)), tau, lit);
  const auto b = mallows_consecutive_bounds(30, BigScalar(Rational(1, 2)), tau, sym);
  EXPECT_EQ(b.b2, BigScalar(2) * a.b2);
  EXPECT_EQ(parse_count_convention("boundary"), CountConvention::boundary);
  EXPECT_THROW(parse_count_convention("other"), InvalidInput);
}

TEST(Mallows, AvoidanceIntervalBracketsCentre) {
  const auto r = mallows_consecutive_bounds(1000, BigScalar(Rational(1, 10)), Pattern::parse("2341"));
  EXPECT_LE(r.avoid_prob_lower, r.avoid_prob_center);
  EXPECT_LE(r.avoid_prob_center, r.avoid_prob_upper);
  EXPECT_LE(r.avoid_prob_upper, BigScalar(1));
  EXPECT_TRUE(r.b3.is_zero());
}

TEST(Monotone, IncreasingMatchesGenericEvaluation) {
  for (const Rational& q : {Rational(1, 3), Rational(3)}) {
    const auto mono = monotone_mallows_bounds(50, 4, BigScalar(q), Monotone::increasing);
    const auto gen = mallows_consecutive_bounds(50, BigScalar(q), Pattern::parse("1234"));
    EXPECT_EQ(mono.lambda, gen.lambda);
    EXPECT_EQ(mono.b1, gen.b1);
    EXPECT_EQ(mono.b2, gen.b2);
  }
}

TEST(Monotone, DecreasingCorrectedB1MatchesGeneric) {
  const Rational q(2);
  const auto mono = monotone_mallows_bounds(50, 4, BigScalar(q), Monotone::decreasing);
  const auto gen = mallows_consecutive_bounds(50, BigScalar(q), Pattern::parse("4321"));
  EXPECT_EQ(mono.lambda, gen.lambda);
  ASSERT_TRUE(mono.b1_corrected);
  EXPECT_EQ(*mono.b1_corrected, gen.b1);
  EXPECT_EQ(mono.b2, gen.b2);
  // The literal b1 keeps a single power of q^6.
  EXPECT_EQ(mono.b1.rational(), Rational(consecutive_n1(50, 4)) * rpow(q, 6) / (I(4, q) * I(4, q)));
}

TEST(Length3, ClosedForms) {
  const Rational q(1, 2);
  const auto r = length3_mallows_bounds(20, BigScalar(q), Pattern::parse("132"));
  const Rational p = q / I(3, q);
  EXPECT_EQ(r.lambda.rational(), 17 * p);
  EXPECT_EQ(r.b1.rational(), Rational(3 * 20 - 13) * p * p);
  EXPECT_EQ(r.b2.rational(), Rational(2 * 15) * (rpow(q, 2) + rpow(q, 3) + rpow(q, 4)) / I(5, q));
  const auto s = length3_mallows_bounds(20, BigScalar(q), Pattern::parse("231"));
  EXPECT_EQ(s.b2.rational(), Rational(2 * 15) * (rpow(q, 6) + rpow(q, 7) + rpow(q, 8)) / I(5, q));
}

TEST(Length3, RangeAndPatternChecks) {
  EXPECT_THROW(length3_mallows_bounds(6, BigScalar(1), Pattern::parse("132")), UnsupportedRange);
  EXPECT_THROW(length3_mallows_bounds(10, BigScalar(1), Pattern::parse("123")), InvalidInput);
}

TEST(FixedPoints, DerangementsAndInterval) {
  EXPECT_EQ(fixed_point_bound(4).derangements, Integer(9));
  Integer a = 1, b = 0;  // D_0, D_1
  for (long n = 2; n <= 15; ++n) {
    const Integer d = (n - 1) * (a + b);
    a = b;
    b = d;
    const auto f = fixed_point_bound(n);
    EXPECT_EQ(f.derangements, d);
    EXPECT_LE(f.lower, BigScalar(d));
    EXPECT_LE(BigScalar(d), f.upper);
  }
  EXPECT_LT(mp::abs(fixed_point_bound(10).tv_bound.to_real() - 3 * (1 - mp::exp(Real(-1))) / 10), Real("1e-50"));
}

TEST(Selectors, ConsecutivePatternLength) {
  EXPECT_EQ(consecutive_pattern_length(1e6, 1), 7);
  EXPECT_THROW(consecutive_pattern_length(10, 1), InvalidInput);
}

TEST(Selectors, ExactPatternLengthIsSmallestQualifying) {
  for (long n : {100L, 1000L, 100000L}) {
    const int m = exact_pattern_length(n, Rational(1));
    auto ratio = [&](int k) { return Rational(Integer(n - k), factorial_int(static_cast<unsigned>(k))); };
    EXPECT_LE(ratio(m), Rational(1));
    if (m > 1) EXPECT_GT(ratio(m - 1), Rational(1));
  }
  EXPECT_EQ(exact_pattern_length(100, Rational(1)), 5);
}

TEST(Selectors, InverseGammaApproximation) {
  // Bisection on lgamma as the reference inverse.
  auto inverse = [](double x) {
    double lo = 1.4616321449683623, hi = 200;
    for (int i = 0; i < 200; ++i) {
      const double mid = (lo + hi) / 2;
      (std::lgamma(mid) < std::log(x) ? lo : hi) = mid;
    }
    return lo;
  };
  for (double x : {10.0, 1e3, 1e6, 1e12, 1e30}) EXPECT_NEAR(inverse_gamma_asymptotic(x), inverse(x), 0.01) << x;
  EXPECT_EQ(asymptotic_pattern_length(1e6, 1), 10);
  EXPECT_EQ(asymptotic_pattern_length(1e6, 1, InverseGammaVariant::two_pi), 10);
}

TEST(Regime, CriticalValues) {
  const long n = 1000;
  const double crit = std::pow(static_cast<double>(n), -1.0 / 3.0);
  const auto r = mallows_regime(n, 4, crit, 3);
  EXPECT_TRUE(r.on_small_boundary);
  EXPECT_TRUE(r.small_q);
  ASSERT_TRUE(r.q_critical_small);
  EXPECT_NEAR(*r.q_critical_small, crit, 1e-12);
  const auto big = mallows_regime(n, 4, std::pow(static_cast<double>(n), 1.0 / 3.0), 3);
  EXPECT_TRUE(big.on_large_boundary);
  EXPECT_TRUE(big.large_q);
  EXPECT_TRUE(mallows_regime(n, 4, 0.5, 0).monotone_special_case);
  EXPECT_FALSE(mallows_regime(n, 4, 0.5, 0).q_critical_small);
  EXPECT_THROW(mallows_regime(n, 4, 0.5, 7), InvalidInput);
}

TEST(Diagnostics, D1AsymptoticTracksExact) {
  const auto d = d1_diagnostic(100000, 20);
  const double exact = static_cast<double>(d.d1_exact.to_real());
  EXPECT_NEAR(d.d1_asymptotic / exact, 1.0, 0.05);
}

TEST(Diagnostics, PoissonPmfAndInterval) {
  EXPECT_LT(mp::abs(poisson_pmf(BigScalar(2), 3).to_real() - mp::exp(Real(-2)) * 8 / 6), Real("1e-50"));
  const auto [lo, hi] = poisson_interval(BigScalar(Rational(1, 10)), BigScalar(Rational(1, 5)));
  EXPECT_TRUE(lo.is_zero());
  EXPECT_EQ(hi.rational(), Rational(3, 10));
}
