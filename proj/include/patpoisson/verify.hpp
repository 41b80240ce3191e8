#pragma once

// Brute-force oracles over S_n and statistical checks of the samplers.

#include <algorithm>
#include <cstdint>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "patpoisson/bounds.hpp"
#include "patpoisson/mallows.hpp"
#include "patpoisson/permutation.hpp"
#include "patpoisson/scalar.hpp"

namespace patpoisson {

// Uniform when q == 1.
struct Measure {
  Rational q{1};
  bool is_uniform() const { return q == 1; }
  std::string to_string() const;
};

struct OccurrenceDistribution {
  long n = 0;
  std::string pattern;
  Mode mode = Mode::consecutive;
  Measure measure;
  bool exact = true;

  std::vector<Rational> pmf_exact;  // exact provenance; index = k
  std::vector<double> pmf;          // always filled (double view)
  std::vector<double> stderr_;      // Monte Carlo only
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  double mean() const;
};

inline constexpr int kEnumerationGuard = 10;
inline constexpr int kEnumerationHardLimit = 12;

// Calls f(values, inv) for every sigma in S_n in lexicographic order.
template <typename F>
void for_each_permutation(int n, F&& f) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  do {
    int inv = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) inv += v[i] > v[j];
    f(std::span<const int>(v), inv);
  } while (std::next_permutation(v.begin(), v.end()));
}

// Throws ResourceLimit when n exceeds `guard` (at most 12).
OccurrenceDistribution exact_distribution(int n, const Pattern& tau, Mode mode, const Measure& measure = {},
                                          int guard = kEnumerationGuard);

Integer exact_avoidance_count(int n, const Pattern& tau, Mode mode, int guard = kEnumerationGuard);
// Permutations avoiding every pattern of the set.
Integer exact_avoidance_count(int n, const std::vector<Pattern>& patterns, Mode mode, int guard = kEnumerationGuard);

struct TVReport {
  Real exact_tv{0};
  BigScalar bound;
  Real slack{0};  // bound - exact_tv
  Real tail_truncation{0};
  bool ok() const { return slack >= 0; }
};

// TV distance between an exact law and Poisson(lambda). The Poisson mass
// beyond the support of `dist` is taken in closed form, so nothing is
// truncated. Throws InvalidInput for Monte Carlo input.
TVReport exact_tv_to_poisson(const OccurrenceDistribution& dist, const BigScalar& lambda, const BigScalar& bound);

// Law of the number of fixed points: P(W = k) = C(n,k) D_{n-k} / n!.
OccurrenceDistribution fixed_point_distribution(int n);

struct MonteCarloOptions {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::ordering;
  int shards = 8;   // fixed, so results do not depend on `workers`
  int workers = 1;
};

OccurrenceDistribution monte_carlo_distribution(long n, const Pattern& tau, Mode mode, const Measure& measure,
                                                const MonteCarloOptions& options);

// Exact TV between the joint law of the consecutive indicators and the
// product of Bernoulli laws with the same marginals (uniform measure).
struct ProcessTVReport {
  TVReport tv;
  Rational exact_tv_rational{0};
  std::size_t atoms = 0;
};

inline constexpr int kProcessGuard = 8;

ProcessTVReport process_tv_exact(int n, const Pattern& tau, int guard = kProcessGuard);

// Exact certification of the consecutive bounds against the oracle.
struct CertificationResult {
  int n = 0;
  std::string pattern;
  Rational q{1};
  TVReport tv;       // against Poisson(mean)
  TVReport tv_literal;  // diagnostic: against Poisson(lambda)
  // Uniform measure only: avoidance count vs the count interval.
  bool interval_checked = false;
  bool interval_ok = true;
  bool literal_interval_ok = true;
  Integer avoiders;
  BigScalar lower, upper;
};

CertificationResult certify_consecutive(int n, const Pattern& tau, const Rational& q);

struct ChiSquareResult {
  double statistic = 0;
  int df = 0;
  double p_value = 1;
  int pooled_bins = 0;
};

// Goodness of fit of `observed` against probabilities `expected`; bins with
// expected count below 5 are pooled.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected);
// Independence test on a contingency table (empty rows and columns dropped).
ChiSquareResult chi_square_independence(const std::vector<std::vector<std::uint64_t>>& table);

// Lexicographic rank of a permutation of [k] (or any distinct sequence) in 0..k!-1.
std::size_t permutation_rank(std::span<const int> values);

inline constexpr double kSignificance = 1e-3;

struct StatTest {
  std::string name;
  ChiSquareResult result;
  bool informational = false;
  bool retried = false;
  bool passed = true;
};

// Sampled Mallows(q) permutations of [n] against the exact pmf.
StatTest sampler_goodness_of_fit(int n, const Rational& q, Strategy strategy, std::uint64_t samples,
                                 std::uint64_t seed);
// Restriction of a length-n ordering sample to the values 1..m against Mallows(q) on S_m.
StatTest prefix_consistency_test(int n, int m, const Rational& q, std::uint64_t samples, std::uint64_t seed);

struct SuiteOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::ordering;
  bool retry_once = true;
};

// Homogeneity: each index set reduces to a Mallows(q) permutation.
// Dissociation: reduced patterns on each pair of disjoint index sets are
// independent. Tests on non-consecutive sets are informational when q != 1.
std::vector<StatTest> homogeneity_dissociation_suite(int n, const Rational& q,
                                                     const std::vector<IndexSet>& index_sets,
                                                     const SuiteOptions& options);

bool is_consecutive(const IndexSet& s);

}  // namespace patpoisson
