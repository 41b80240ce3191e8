#pragma once

// Finite Poisson-approximation bounds for pattern occurrence counts.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patpoisson/overlap.hpp"
#include "patpoisson/permutation.hpp"
#include "patpoisson/scalar.hpp"

namespace patpoisson {

// I_n(q) = prod_{j=1}^{n} (1 + q + ... + q^{j-1}); exact for exact q.
BigScalar inversion_poly_value(long n, const BigScalar& q);

enum class D2Method {
  exact_overlap,  // pattern-specific overlap tables
  crude,          // pattern-free counting bound
  robbins,        // classical only: closed Stirling-type bound
  lemma,          // consecutive only: sum (n-2m+s) s!/m!^2
};

std::string_view to_string(D2Method method);
D2Method parse_d2_method(std::string_view text);

struct UniformBoundsReport {
  Mode mode = Mode::classical;
  long n = 0;
  int j = 0;
  std::optional<std::string> pattern;
  D2Method d2_method = D2Method::crude;

  BigScalar lambda;  // C(n,j)/j! or (n-m)/m!
  BigScalar mean;    // E W; differs from lambda by one window in consecutive mode
  BigScalar d1;
  BigScalar d2;
  BigScalar D;  // min(1, 1/lambda) (d1 + d2)
  BigScalar tv_count_bound;    // 2D
  BigScalar tv_process_bound;  // 4D + 2 lambda / j!

  BigScalar factorial_n;
  BigScalar count_center;  // n! e^{-lambda}
  BigScalar count_lower;   // n!(e^{-lambda} - D), clamped at 0
  BigScalar count_upper;   // n!(e^{-lambda} + D)
  BigScalar count_lower_unclamped;
  bool lower_clamped = false;
  // Same half-width, centred at n! e^{-mean}.
  BigScalar mean_count_lower;
  BigScalar mean_count_upper;

  // Classical exact-overlap only: d2 recomputed with index-pair multiplicity.
  std::optional<BigScalar> d2_pair_multiplicity;
  // Consecutive: per-s terms of d2 (empty for methods without a split).
  std::vector<BigScalar> d2_terms;
  bool small_n_exact_counts = false;
  std::vector<std::string> notes;
};

struct UniformOptions {
  OverlapOptions overlap;
};

UniformBoundsReport uniform_classical_bounds(long n, int j, D2Method method,
                                             const std::optional<Pattern>& tau = std::nullopt,
                                             const UniformOptions& options = {});

// tau is required for exact_overlap and ignored otherwise (its length is m).
UniformBoundsReport uniform_consecutive_bounds(long n, int m, D2Method method,
                                               const std::optional<Pattern>& tau = std::nullopt,
                                               const UniformOptions& options = {});

// How window pairs are counted in b1 and in the per-s factor of b2.
enum class CountConvention {
  literal,    // b1 = n1 p^2, factor (n-2m+s)
  symmetric,  // b1 = n1 p^2, factor 2(n-2m+s)
  boundary,   // b1 = [2(m-1)(n-2m) + 2 sum_{i=m-1}^{2m-3} i] p^2, factor 2(n-m)
  exact,      // exact ordered window-pair counts over the n-m+1 windows
};

std::string_view to_string(CountConvention c);
CountConvention parse_count_convention(std::string_view text);

struct MallowsBoundsReport {
  long n = 0;
  int m = 0;
  BigScalar q;
  std::string pattern;
  CountConvention convention = CountConvention::symmetric;

  BigScalar lambda;  // (n-m) q^inv / I_m(q)
  BigScalar mean;    // (n-m+1) q^inv / I_m(q)
  BigScalar b1;
  BigScalar b2;
  BigScalar b3;  // always zero: indicators outside a neighbourhood are independent

  BigScalar b1_n1;        // n1 = 2mn - 3m^2 + m based
  BigScalar b1_boundary;  // 2(m-1)(n-2m) + 2 sum i based
  std::optional<BigScalar> b1_corrected;  // decreasing monotone: squared power
  std::vector<BigScalar> b2_terms;        // per s = 1..m-1

  BigScalar tv_count_bound;  // 2(b1 + b2)
  BigScalar avoid_prob_center;  // e^{-lambda}
  BigScalar avoid_prob_lower;   // clamped to [0, 1]
  BigScalar avoid_prob_upper;
  bool small_n_exact_counts = false;
  std::vector<std::string> notes;
};

struct MallowsOptions {
  CountConvention convention = CountConvention::symmetric;
  OverlapOptions overlap;
};

MallowsBoundsReport mallows_consecutive_bounds(long n, const BigScalar& q, const Pattern& tau,
                                               const MallowsOptions& options = {});

enum class Monotone { increasing, decreasing };

MallowsBoundsReport monotone_mallows_bounds(long n, int m, const BigScalar& q, Monotone direction);

// Closed forms for 132, 213, 231, 312; requires n >= 7.
MallowsBoundsReport length3_mallows_bounds(long n, const BigScalar& q, const Pattern& tau);

// n1 = 2mn - 3m^2 + m and n2 = 3m - 3m^2 - 2n + 2mn.
Integer consecutive_n1(long n, int m);
Integer monotone_n2(long n, int m);
// 2(m-1)(n-2m) + 2 sum_{i=m-1}^{2m-3} i.
Integer boundary_b1_count(long n, int m);

struct FixedPointBound {
  BigScalar tv_bound;  // 3(1 - e^{-1})/n
  BigScalar lower;     // n! e^{-1} - 3 (n-1)! (1 - e^{-1})
  BigScalar upper;
  Integer derangements;  // n! sum (-1)^i / i!
};

FixedPointBound fixed_point_bound(long n);

// floor(log x / (loglog x - logloglog x) - 1/2), x = n/t > e^e.
long consecutive_pattern_length(double n, double t);
// Smallest m >= 1 with (n-m)/m! <= t.
int exact_pattern_length(long n, const Rational& t);

enum class InverseGammaVariant {
  sqrt_two_pi,  // L(x) = log((x + c)/sqrt(2 pi))
  two_pi,       // L(x) = log((x + c)/(2 pi))
};
// Lambert-W approximation of the inverse of Gamma on [k0, inf).
double inverse_gamma_asymptotic(double x, InverseGammaVariant variant = InverseGammaVariant::sqrt_two_pi);
// ceil(Gamma^{-1}(n/t) - 1) with the approximation above.
int asymptotic_pattern_length(double n, double t,
                              InverseGammaVariant variant = InverseGammaVariant::sqrt_two_pi);

struct RegimeReport {
  bool small_q = false;        // q <= n^{-1/inv}
  bool large_q = false;        // q >= n^{1/(C(m,2)-inv)}
  bool few_inversions = false;   // q < 1 and inv <= -log n / log q
  bool many_inversions = false;  // q > 1 and inv >= -log n / log q + m^2/2
  std::optional<double> q_critical_small;
  std::optional<double> q_critical_large;
  bool on_small_boundary = false;
  bool on_large_boundary = false;
  bool monotone_special_case = false;
  std::vector<std::string> labels;  // names of the conditions that hold
};

inline constexpr double kRegimeTolerance = 1e-12;

RegimeReport mallows_regime(long n, int m, double q, int inv_count);

struct D1Diagnostic {
  BigScalar d1_exact;
  double d1_asymptotic = 0;  // lambda^2 (1 - e^{-j^2/n})
};

D1Diagnostic d1_diagnostic(long n, int j);

BigScalar poisson_pmf(const BigScalar& lambda, long k);
// [pmf - bound, pmf + bound] clamped to [0, 1].
std::pair<BigScalar, BigScalar> poisson_interval(const BigScalar& pmf, const BigScalar& bound);

}  // namespace patpoisson
