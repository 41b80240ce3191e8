#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "patpoisson/bounds.hpp"
#include "patpoisson/errors.hpp"
#include "patpoisson/mallows.hpp"

using namespace patpoisson;

namespace {

std::vector<int> random_variates(int n, Rng& rng) {
  std::vector<int> x;
  for (int i = 1; i <= n; ++i) x.push_back(static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i))) + 1);
  return x;
}

std::int64_t quadratic_inversions(std::span<const int> v) {
  std::int64_t c = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) c += v[i] > v[j];
  return c;
}

}  // namespace

TEST(Steps, BumpingWorkedExample) {
  EXPECT_EQ(bumping_step(Permutation::parse("24135"), 3).to_string(), "251463");
  EXPECT_EQ(bumping_step(Permutation::parse("1"), 1).to_string(), "21");
}

TEST(Steps, OrderingExamples) {
  EXPECT_EQ(ordering_step(Permutation::parse("12"), 1).to_string(), "312");
  EXPECT_EQ(ordering_step(Permutation::parse("2413"), 5).to_string(), "24135");
}

TEST(Steps, RangeChecks) {
  EXPECT_THROW(bumping_step(Permutation::parse("12"), 0), InvalidInput);
  EXPECT_THROW(bumping_step(Permutation::parse("12"), 4), InvalidInput);
  EXPECT_THROW(ordering_step(Permutation::parse("12"), 4), InvalidInput);
}

TEST(Steps, NewInversionCountIsNPlusOneMinusK) {
  std::vector<int> v{1, 2, 3, 4};
  do {
    const Permutation p(v);
    const auto base = quadratic_inversions(p.values());
    for (int k = 1; k <= 5; ++k) {
      EXPECT_EQ(quadratic_inversions(bumping_step(p, k).values()) - base, 5 - k);
      EXPECT_EQ(quadratic_inversions(ordering_step(p, k).values()) - base, 5 - k);
    }
  } while (std::next_permutation(v.begin(), v.end()));
}

TEST(Materialize, AgreesWithStepwiseConstruction) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 40;
    const auto x = random_variates(n, rng);
    Permutation ord = Permutation::identity(1), bump = Permutation::identity(1);
    for (int i = 2; i <= n; ++i) {
      ord = ordering_step(ord, x[static_cast<std::size_t>(i - 1)]);
      bump = bumping_step(bump, x[static_cast<std::size_t>(i - 1)]);
    }
    EXPECT_EQ(materialize(x, Strategy::ordering), ord);
    EXPECT_EQ(materialize(x, Strategy::bumping), bump);
    std::int64_t expected_inv = 0;
    for (int i = 1; i <= n; ++i) expected_inv += i - x[static_cast<std::size_t>(i - 1)];
    EXPECT_EQ(inversion_count(ord.values()), expected_inv);
    EXPECT_EQ(inversion_count(bump.values()), expected_inv);
  }
}

TEST(Materialize, RejectsBadVariates) {
  EXPECT_THROW(materialize({1, 3}, Strategy::ordering), InvalidInput);
  EXPECT_THROW(materialize({}, Strategy::ordering), InvalidInput);
}

TEST(TruncatedGeometric, DegenerateCases) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(truncated_geometric(1, GeometricParam(BigScalar(Rational(1, 3))), rng), 1);
  EXPECT_THROW(truncated_geometric(0, GeometricParam(BigScalar(1)), rng), InvalidInput);
  EXPECT_THROW(GeometricParam(BigScalar(0)), InvalidInput);
}

TEST(TruncatedGeometric, ExactSmallLaw) {
  // n = 3, q = 1/2: probabilities 4/7, 2/7, 1/7.
  Rng rng(2024);
  const GeometricParam q(BigScalar(Rational(1, 2)));
  std::array<int, 4> counts{};
  const int draws = 700000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(truncated_geometric(3, q, rng))];
  const double expected[] = {0, 4.0 / 7, 2.0 / 7, 1.0 / 7};
  for (int k = 1; k <= 3; ++k) {
    const double p = expected[k], sd = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / static_cast<double>(draws), p, 5 * sd) << k;
  }
}

TEST(TruncatedGeometric, FloatingPathMean) {
  // n beyond the exact path; compare the sample mean with the exact mean.
  for (double qd : {0.99, 1.01, 0.3}) {
    const long n = 500;
    const GeometricParam q(BigScalar::from_real(Real(qd)));
    Rng rng(7);
    const int draws = 200000;
    double sum = 0;
    for (int i = 0; i < draws; ++i) {
      const long x = truncated_geometric(n, q, rng);
      ASSERT_GE(x, 1);
      ASSERT_LE(x, n);
      sum += static_cast<double>(x);
    }
    double num = 0, den = 0, sq = 0;
    for (long k = 1; k <= n; ++k) {
      const double w = std::pow(qd, static_cast<double>(k - 1));
      num += k * w;
      sq += static_cast<double>(k) * k * w;
      den += w;
    }
    const double mean = num / den, sd = std::sqrt(sq / den - mean * mean);
    EXPECT_NEAR(sum / draws, mean, 5 * sd / std::sqrt(draws)) << qd;
  }
}

TEST(TruncatedGeometric, UniformAtQOne) {
  Rng rng(3);
  const GeometricParam q(BigScalar(1));
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[static_cast<std::size_t>(truncated_geometric(5, q, rng))];
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(counts[static_cast<std::size_t>(k)], 12000, 5 * std::sqrt(12000 * 0.8));
}

TEST(Pmf, SumsToOneAndSpecialValues) {
  for (const Rational& q : {Rational(1, 3), Rational(1), Rational(5, 2)}) {
    for (int n = 1; n <= 7; ++n) {
      std::vector<int> v(static_cast<std::size_t>(n));
      std::iota(v.begin(), v.end(), 1);
      Rational total = 0;
      do {
        total += mallows_pmf(Permutation(v), BigScalar(q)).rational();
      } while (std::next_permutation(v.begin(), v.end()));
      EXPECT_EQ(total, Rational(1));
    }
    const BigScalar bq(q);
    EXPECT_EQ(mallows_pmf(Permutation::identity(5), bq), BigScalar(1) / inversion_poly_value(5, bq));
    EXPECT_EQ(mallows_pmf(Permutation::parse("34125"), bq), pow(bq, 4) / inversion_poly_value(5, bq));
    const Permutation s = Permutation::parse("315264");
    EXPECT_EQ(mallows_pmf(s, bq), mallows_pmf(reverse(s), BigScalar(1) / bq));
  }
}

TEST(Sample, TwoElementLaw) {
  const Rational q(3);
  for (Strategy strategy : {Strategy::ordering, Strategy::bumping}) {
    Rng rng(11);
    int descents = 0;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) descents += sample({2, BigScalar(q)}, rng, strategy).at(1) == 2;
    const double p = 3.0 / 4.0;
    EXPECT_NEAR(descents / static_cast<double>(draws), p, 5 * std::sqrt(p * (1 - p) / draws));
  }
}

TEST(Sample, SmallQConcentratesOnIdentity) {
  Rng rng(5);
  const MallowsParams params{8, BigScalar(Rational(1, 1000000))};
  int identity = 0;
  for (int i = 0; i < 1000; ++i) identity += sample(params, rng) == Permutation::identity(8);
  EXPECT_GE(identity, 990);
}

TEST(Sample, ReproducibleFromSeed) {
  Rng a(42), b(42);
  const MallowsParams params{50, BigScalar(Rational(2, 3))};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample(params, a), sample(params, b));
}

TEST(Sample, LargeNIsValid) {
  Rng rng(8);
  const auto p = sample({1000000, BigScalar::from_real(Real("0.999"))}, rng, Strategy::bumping);
  EXPECT_EQ(p.size(), 1000000);  // the constructor validates the bijection
}

TEST(Process, GrowsOneStepAtATime) {
  MallowsProcessState state(BigScalar(Rational(1, 2)), 9, 3);
  EXPECT_EQ(state.length(), 3);
  for (int k = 1; k <= 5; ++k) {
    const int x = state.step();
    EXPECT_GE(x, 1);
    EXPECT_LE(x, 3 + k);
    EXPECT_EQ(state.length(), 3 + k);
  }
  const Permutation before = state.current();
  const auto variates = state.variates();
  state.step();
  // Earlier values keep their relative order under the ordering construction.
  std::vector<int> first(static_cast<std::size_t>(before.size()));
  std::iota(first.begin(), first.end(), 1);
  const auto restricted = restrict_to_values(state.current(), first);
  EXPECT_EQ(std::vector<int>(before.values().begin(), before.values().end()), restricted);
  EXPECT_EQ(materialize(variates, Strategy::ordering), before);
  EXPECT_THROW(MallowsProcessState(BigScalar(1), 1, 0), InvalidInput);
}

TEST(Strategies, Parse) {
  EXPECT_EQ(parse_strategy("bumping"), Strategy::bumping);
  EXPECT_THROW(parse_strategy("shuffle"), InvalidInput);
}
