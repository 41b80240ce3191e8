#include "patpoisson/bounds.hpp"

#include <boost/math/special_functions/lambert_w.hpp>
#include <cmath>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

BigScalar big(long v) { return BigScalar(Rational(v)); }
BigScalar big(const Integer& z) { return BigScalar(z); }

BigScalar binom(long n, long k) {
  if (k < 0 || n < 0 || k > n) return BigScalar();
  return BigScalar(binomial_int(static_cast<unsigned>(n), static_cast<unsigned>(k)));
}

BigScalar e_pow(const BigScalar& x) { return exp(x); }

void require_positive_q(const BigScalar& q) {
  if (q.sign() <= 0) throw InvalidInput("q must be positive");
}

// Exact ordered window-pair counts over N = n-m+1 windows of length m.
Integer exact_b1_count(long n, int m) {
  const long N = n - m + 1;
  Integer c = N;
  for (int d = 1; d < m; ++d) c += 2 * std::max(0L, N - d);
  return c;
}

Integer exact_pair_factor(long n, int m, int s) {
  const long N = n - m + 1;
  return 2 * std::max(0L, N - (m - s));
}

Integer convention_factor(CountConvention c, long n, int m, int s) {
  switch (c) {
    case CountConvention::literal: return std::max(0L, n - 2L * m + s);
    case CountConvention::symmetric: return 2 * std::max(0L, n - 2L * m + s);
    case CountConvention::boundary: return 2 * std::max(0L, n - m);
    case CountConvention::exact: return exact_pair_factor(n, m, s);
  }
  return 0;
}

void fill_count_interval(UniformBoundsReport& r) {
  r.factorial_n = factorial(static_cast<unsigned long>(r.n));
  const BigScalar width = r.factorial_n * r.D;
  r.count_center = r.factorial_n * e_pow(-r.lambda);
  r.count_lower_unclamped = r.count_center - width;
  r.count_upper = r.count_center + width;
  r.lower_clamped = r.count_lower_unclamped.sign() < 0;
  r.count_lower = r.lower_clamped ? BigScalar() : r.count_lower_unclamped;
  const BigScalar mean_center = r.factorial_n * e_pow(-r.mean);
  r.mean_count_lower = max(BigScalar(), mean_center - width);
  r.mean_count_upper = mean_center + width;
}

void finish_uniform(UniformBoundsReport& r) {
  r.D = min(BigScalar(1), BigScalar(1) / r.lambda) * (r.d1 + r.d2);
  r.tv_count_bound = BigScalar(2) * r.D;
  r.tv_process_bound = BigScalar(4) * r.D + BigScalar(2) * r.lambda / factorial(static_cast<unsigned long>(r.j));
  fill_count_interval(r);
}

void fill_avoid_interval(MallowsBoundsReport& r) {
  r.b3 = BigScalar();
  r.tv_count_bound = BigScalar(2) * (r.b1 + r.b2);
  r.avoid_prob_center = e_pow(-r.lambda);
  const BigScalar half = (r.b1 + r.b2) * (BigScalar(1) - r.avoid_prob_center) / r.lambda;
  r.avoid_prob_lower = max(BigScalar(), r.avoid_prob_center - half);
  r.avoid_prob_upper = min(BigScalar(1), r.avoid_prob_center + half);
}

// sum_{k=1}^{j-1} C(a,k)/k!, exactly, by Horner's rule on t_{k+1}/t_k = (a-k)/(k+1)^2.
BigScalar crude_classical_sum(long a, int j) {
  if (j < 2 || a < 1) return BigScalar();
  Integer num = 1, den = 1;
  for (long k = j - 2; k >= 1; --k) {
    const Integer sq = Integer(k + 1) * Integer(k + 1);
    const Integer next_den = den * sq;
    num = next_den + Integer(std::max(0L, a - k)) * num;
    den = next_den;
  }
  return BigScalar(Rational(Integer(a) * num, den));
}

}  // namespace

BigScalar inversion_poly_value(long n, const BigScalar& q) {
  if (n < 1) throw InvalidInput("inversion polynomial needs n >= 1");
  require_positive_q(q);
  if (q == BigScalar(1)) return factorial(static_cast<unsigned long>(n));
  BigScalar out(1);
  BigScalar partial(1);  // 1 + q + ... + q^{j-1}
  BigScalar power(1);
  for (long j = 2; j <= n; ++j) {
    if (j <= 64) {
      power *= q;
      partial += power;
      out *= partial;
    } else {
      out *= (pow(q, j) - BigScalar(1)) / (q - BigScalar(1));
    }
  }
  return out;
}

std::string_view to_string(D2Method method) {
  switch (method) {
    case D2Method::exact_overlap: return "exact";
    case D2Method::crude: return "crude";
    case D2Method::robbins: return "robbins";
    case D2Method::lemma: return "lemma";
  }
  return "?";
}

D2Method parse_d2_method(std::string_view text) {
  if (text == "exact" || text == "exact-overlap") return D2Method::exact_overlap;
  if (text == "crude") return D2Method::crude;
  if (text == "robbins") return D2Method::robbins;
  if (text == "lemma") return D2Method::lemma;
  throw InvalidInput("d2 method must be exact, crude, robbins or lemma");
}

std::string_view to_string(CountConvention c) {
  switch (c) {
    case CountConvention::literal: return "literal";
    case CountConvention::symmetric: return "symmetric";
    case CountConvention::boundary: return "boundary";
    case CountConvention::exact: return "exact";
  }
  return "?";
}

CountConvention parse_count_convention(std::string_view text) {
  if (text == "literal") return CountConvention::literal;
  if (text == "symmetric") return CountConvention::symmetric;
  if (text == "boundary") return CountConvention::boundary;
  if (text == "exact") return CountConvention::exact;
  throw InvalidInput("count convention must be literal, symmetric, boundary or exact");
}

Integer consecutive_n1(long n, int m) {
  return Integer(2) * m * n - Integer(3) * m * m + m;
}

Integer monotone_n2(long n, int m) {
  return Integer(3) * m - Integer(3) * m * m - Integer(2) * n + Integer(2) * m * n;
}

Integer boundary_b1_count(long n, int m) {
  Integer c = Integer(2) * (m - 1) * (n - 2L * m);
  for (int i = m - 1; i <= 2 * m - 3; ++i) c += 2 * i;
  return c;
}

UniformBoundsReport uniform_classical_bounds(long n, int j, D2Method method, const std::optional<Pattern>& tau,
                                             const UniformOptions& options) {
  if (j < 3) throw InvalidInput("pattern length j must be >= 3");
  if (j > n) throw InvalidInput("pattern length j must not exceed n");
  if (method == D2Method::lemma) throw InvalidInput("the lemma d2 method applies to consecutive patterns only");
  if (method == D2Method::exact_overlap && !tau) throw InvalidInput("exact-overlap d2 requires a pattern");
  if (tau && tau->size() != j) throw InvalidInput("pattern length does not match j");

  UniformBoundsReport r;
  r.mode = Mode::classical;
  r.n = n;
  r.j = j;
  r.d2_method = method;
  if (tau) r.pattern = tau->to_string();

  const Integer cnj = binomial_int(static_cast<unsigned>(n), static_cast<unsigned>(j));
  const Integer cnjj = binomial_int(static_cast<unsigned>(n - j), static_cast<unsigned>(j));
  const BigScalar jfact = factorial(static_cast<unsigned long>(j));
  r.lambda = big(cnj) / jfact;
  r.mean = r.lambda;
  r.d1 = big(Integer(cnj * (cnj - cnjj))) / (jfact * jfact);

  switch (method) {
    case D2Method::crude:
      r.d2 = r.lambda * crude_classical_sum(n - j, j);
      break;
    case D2Method::robbins: {
      const Real pi = boost::math::constants::pi<Real>();
      const Real log_factor = Real(1) / 12 - Real(3) / 13 + 2 * mp::sqrt(Real(n - j)) + mp::log(mp::log(Real(j))) -
                              mp::log(2 * pi);
      r.d2 = r.lambda * BigScalar::from_log10(1, log_factor / ln10());
      r.notes.push_back("robbins d2 is a closed-form relaxation of the crude bound");
      break;
    }
    case D2Method::exact_overlap: {
      BigScalar d2, d2_pairs;
      for (int s = 1; s <= j - 1; ++s) {
        const OverlapTable t = classical_overlap(*tau, s, options.overlap);
        const BigScalar weight = binom(n, 2L * j - s) * BigScalar(2) / factorial(static_cast<unsigned long>(2 * j - s));
        d2 += weight * BigScalar(Integer(t.size()));
        d2_pairs += weight * BigScalar(Integer(t.pair_multiplicity));
      }
      r.d2 = d2;
      r.d2_pair_multiplicity = d2_pairs;
      r.notes.push_back("overlap counts permutations; d2_pair_multiplicity counts index-set pairs");
      break;
    }
    case D2Method::lemma:
      break;
  }
  finish_uniform(r);
  return r;
}

UniformBoundsReport uniform_consecutive_bounds(long n, int m, D2Method method, const std::optional<Pattern>& tau,
                                               const UniformOptions& options) {
  if (m < 3) throw InvalidInput("pattern length m must be >= 3");
  if (m > n) throw InvalidInput("pattern length m must not exceed n");
  if (method == D2Method::robbins) throw InvalidInput("the robbins d2 method applies to classical patterns only");
  if (method == D2Method::exact_overlap && !tau) throw InvalidInput("exact-overlap d2 requires a pattern");
  if (tau && tau->size() != m) throw InvalidInput("pattern length does not match m");

  UniformBoundsReport r;
  r.mode = Mode::consecutive;
  r.n = n;
  r.j = m;
  r.d2_method = method;
  if (tau) r.pattern = tau->to_string();

  const BigScalar mfact = factorial(static_cast<unsigned long>(m));
  r.lambda = big(n - m) / mfact;
  r.mean = big(n - m + 1) / mfact;
  r.small_n_exact_counts = n < 2L * m - 1;
  const Integer b1_count = r.small_n_exact_counts ? exact_b1_count(n, m) : consecutive_n1(n, m);
  r.d1 = big(b1_count) / (mfact * mfact);
  if (r.small_n_exact_counts) r.notes.push_back("n < 2m-1: exact window-pair counts used for d1 and d2");
  r.notes.push_back("mean = (n-m+1)/m! counts all n-m+1 windows; lambda = (n-m)/m!");

  switch (method) {
    case D2Method::exact_overlap: {
      const auto tables = sequential_overlap_all(*tau, options.overlap);
      for (const auto& t : tables) {
        const Integer factor = r.small_n_exact_counts ? exact_pair_factor(n, m, t.s)
                                                      : convention_factor(CountConvention::symmetric, n, m, t.s);
        BigScalar term = big(factor) * big(Integer(t.size())) / factorial(static_cast<unsigned long>(2 * m - t.s));
        r.d2_terms.push_back(term);
        r.d2 += term;
      }
      break;
    }
    case D2Method::crude: {
      // 2(n-m) C(m,s) s!/m!^2 = 2(n-m) / (m! (m-s)!)
      for (int s = 1; s <= m - 1; ++s) {
        BigScalar term = big(2 * (n - m)) / (mfact * factorial(static_cast<unsigned long>(m - s)));
        r.d2_terms.push_back(term);
        r.d2 += term;
      }
      break;
    }
    case D2Method::lemma: {
      for (int s = 1; s <= m - 1; ++s) {
        BigScalar term = big(std::max(0L, n - 2L * m + s)) * factorial(static_cast<unsigned long>(s)) / (mfact * mfact);
        r.d2_terms.push_back(term);
        r.d2 += term;
      }
      r.notes.push_back("lemma d2 can fall below the exact-overlap d2; it is not a certified bound");
      break;
    }
    case D2Method::robbins:
      break;
  }
  finish_uniform(r);
  return r;
}

MallowsBoundsReport mallows_consecutive_bounds(long n, const BigScalar& q, const Pattern& tau,
                                               const MallowsOptions& options) {
  const int m = tau.size();
  if (m < 2) throw InvalidInput("pattern length m must be >= 2");
  if (m > n) throw InvalidInput("pattern length m must not exceed n");
  require_positive_q(q);

  MallowsBoundsReport r;
  r.n = n;
  r.m = m;
  r.q = q;
  r.pattern = tau.to_string();
  r.convention = options.convention;

  const BigScalar im = inversion_poly_value(m, q);
  const BigScalar p = pow(q, tau.inversion_count()) / im;
  r.lambda = big(n - m) * p;
  r.mean = big(n - m + 1) * p;
  r.b1_n1 = big(consecutive_n1(n, m)) * p * p;
  r.b1_boundary = big(boundary_b1_count(n, m)) * p * p;

  CountConvention conv = options.convention;
  if (n < 2L * m - 1 && conv != CountConvention::exact) {
    conv = CountConvention::exact;
    r.small_n_exact_counts = true;
    r.notes.push_back("n < 2m-1: exact window-pair counts used for b1 and b2");
  }
  switch (conv) {
    case CountConvention::literal:
    case CountConvention::symmetric: r.b1 = r.b1_n1; break;
    case CountConvention::boundary: r.b1 = r.b1_boundary; break;
    case CountConvention::exact: r.b1 = big(exact_b1_count(n, m)) * p * p; break;
  }

  for (const auto& t : sequential_overlap_all(tau, options.overlap)) {
    const InversionPolynomial poly = inversion_polynomial(t);
    BigScalar term;
    if (!poly.is_zero())
      term = big(convention_factor(conv, n, m, t.s)) * poly.evaluate(q) / inversion_poly_value(2L * m - t.s, q);
    r.b2_terms.push_back(term);
    r.b2 += term;
  }
  fill_avoid_interval(r);
  return r;
}

MallowsBoundsReport monotone_mallows_bounds(long n, int m, const BigScalar& q, Monotone direction) {
  if (m < 2) throw InvalidInput("pattern length m must be >= 2");
  if (m > n) throw InvalidInput("pattern length m must not exceed n");
  require_positive_q(q);

  MallowsBoundsReport r;
  r.n = n;
  r.m = m;
  r.q = q;
  r.convention = CountConvention::symmetric;
  std::vector<int> values(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) values[static_cast<std::size_t>(i)] = direction == Monotone::increasing ? i + 1 : m - i;
  r.pattern = Permutation(values).to_string();

  const bool dec = direction == Monotone::decreasing;
  const long cm2 = static_cast<long>(m) * (m - 1) / 2;
  const BigScalar im = inversion_poly_value(m, q);
  const BigScalar top = dec ? pow(q, cm2) : BigScalar(1);
  r.lambda = big(n - m) * top / im;
  r.mean = big(n - m + 1) * top / im;

  r.small_n_exact_counts = n < 2L * m - 1;
  const Integer n1 = r.small_n_exact_counts ? exact_b1_count(n, m) : consecutive_n1(n, m);
  if (r.small_n_exact_counts) r.notes.push_back("n < 2m-1: exact window-pair counts used for b1 and b2");
  // The decreasing case carries a single power of q^{C(m,2)} in b1 as stated;
  // b1_corrected squares it, as the product of two window probabilities would.
  r.b1 = big(n1) * top / (im * im);
  r.b1_n1 = r.b1;
  r.b1_boundary = big(boundary_b1_count(n, m)) * top * top / (im * im);
  if (dec) {
    r.b1_corrected = big(n1) * top * top / (im * im);
    r.notes.push_back("decreasing b1 uses a single power q^{C(m,2)}; b1_corrected uses its square");
  }

  // n2 = sum_s 2(n-2m+s); the per-s split is kept for reporting.
  for (int s = 1; s <= m - 1; ++s) {
    const long len = 2L * m - s;
    const BigScalar num = dec ? pow(q, len * (len - 1) / 2) : BigScalar(1);
    const Integer factor = r.small_n_exact_counts ? exact_pair_factor(n, m, s) : Integer(2 * (n - 2L * m + s));
    BigScalar term = big(factor) * num / inversion_poly_value(len, q);
    r.b2_terms.push_back(term);
    r.b2 += term;
  }
  fill_avoid_interval(r);
  return r;
}

MallowsBoundsReport length3_mallows_bounds(long n, const BigScalar& q, const Pattern& tau) {
  const std::string key = tau.to_string();
  if (key != "132" && key != "213" && key != "231" && key != "312")
    throw InvalidInput("length-3 closed forms cover 132, 213, 231 and 312 only");
  if (n < 7) throw UnsupportedRange("length-3 closed forms need n >= 7");
  require_positive_q(q);

  MallowsBoundsReport r;
  r.n = n;
  r.m = 3;
  r.q = q;
  r.pattern = key;
  r.convention = CountConvention::boundary;
  const int inv = tau.inversion_count();
  const BigScalar i3 = inversion_poly_value(3, q);
  const BigScalar i5 = inversion_poly_value(5, q);
  const BigScalar p = pow(q, inv) / i3;
  r.lambda = big(n - 3) * p;
  r.mean = big(n - 2) * p;
  r.b1 = big(3 * n - 13) * p * p;
  r.b1_n1 = big(consecutive_n1(n, 3)) * p * p;
  r.b1_boundary = r.b1;
  const int low = inv == 1 ? 2 : 6;
  const BigScalar num = pow(q, low) + pow(q, low + 1) + pow(q, low + 2);
  r.b2 = big(2 * (n - 5)) * num / i5;
  r.b2_terms = {r.b2, BigScalar()};
  fill_avoid_interval(r);
  return r;
}

FixedPointBound fixed_point_bound(long n) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  FixedPointBound out;
  const BigScalar one(1);
  const BigScalar e_inv = exp(BigScalar(-1));
  out.tv_bound = BigScalar(3) * (one - e_inv) / big(n);
  const BigScalar nf = factorial(static_cast<unsigned long>(n));
  const BigScalar half = BigScalar(3) * factorial(static_cast<unsigned long>(n - 1)) * (one - e_inv);
  out.lower = nf * e_inv - half;
  out.upper = nf * e_inv + half;
  // n! sum_{i=0}^{n} (-1)^i / i!, with n!/i! accumulated from i = n downwards.
  Integer d = 0, ratio = 1;
  for (long i = n; i >= 0; --i) {
    d += (i % 2 == 0) ? ratio : Integer(-ratio);
    ratio *= i;
  }
  out.derangements = d;
  return out;
}

long consecutive_pattern_length(double n, double t) {
  if (!(n > 0) || !(t > 0)) throw InvalidInput("n and t must be positive");
  const long double x = static_cast<long double>(n) / t;
  const long double ee = std::exp(std::exp(1.0L));
  if (!(x > ee)) throw InvalidInput("n/t must exceed e^e so that log log log(n/t) is positive");
  const long double l1 = std::log(x), l2 = std::log(l1), l3 = std::log(l2);
  const long double denom = l2 - l3;
  if (!(denom > 0)) throw InvalidInput("log log(n/t) - log log log(n/t) must be positive");
  return static_cast<long>(std::floor(l1 / denom - 0.5L));
}

int exact_pattern_length(long n, const Rational& t) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  if (t <= 0) throw InvalidInput("t must be positive");
  Integer mf = 1;
  for (int m = 1;; ++m) {
    mf *= m;
    if (Rational(Integer(n - m), mf) <= t) return m;
  }
}

double inverse_gamma_asymptotic(double x, InverseGammaVariant variant) {
  constexpr double k0_gamma = 0.88560319441088870;  // Gamma(k0), k0 = 1.4616321449683623
  const double two_pi = 2.0 * M_PI;
  const double c = std::exp(-1.0) * std::sqrt(two_pi) - k0_gamma;
  const double scale = variant == InverseGammaVariant::sqrt_two_pi ? std::sqrt(two_pi) : two_pi;
  const double l = std::log((x + c) / scale);
  if (!(l / std::exp(1.0) > -1.0 / std::exp(1.0))) throw InvalidInput("argument too small for the inverse-gamma approximation");
  return l / boost::math::lambert_w0(l / std::exp(1.0)) + 0.5;
}

int asymptotic_pattern_length(double n, double t, InverseGammaVariant variant) {
  if (!(n > 0) || !(t > 0)) throw InvalidInput("n and t must be positive");
  return static_cast<int>(std::ceil(inverse_gamma_asymptotic(n / t, variant) - 1.0));
}

RegimeReport mallows_regime(long n, int m, double q, int inv_count) {
  if (!(q > 0)) throw InvalidInput("q must be positive");
  if (n < 2) throw InvalidInput("n must be >= 2");
  const int cm2 = m * (m - 1) / 2;
  if (inv_count < 0 || inv_count > cm2) throw InvalidInput("inversion count outside 0..C(m,2)");

  RegimeReport r;
  const double ln_n = std::log(static_cast<double>(n));
  r.monotone_special_case = inv_count == 0 || inv_count == cm2;
  if (inv_count > 0) {
    const double crit = std::exp(-ln_n / inv_count);
    r.q_critical_small = crit;
    r.on_small_boundary = std::abs(q - crit) <= kRegimeTolerance * crit;
    r.small_q = q <= crit * (1 + kRegimeTolerance);
  }
  if (inv_count < cm2) {
    const double crit = std::exp(ln_n / (cm2 - inv_count));
    r.q_critical_large = crit;
    r.on_large_boundary = std::abs(q - crit) <= kRegimeTolerance * crit;
    r.large_q = q >= crit * (1 - kRegimeTolerance);
  }
  if (q < 1) {
    const double limit = -ln_n / std::log(q);
    r.few_inversions = inv_count <= limit + kRegimeTolerance * std::abs(limit);
  }
  if (q > 1) {
    const double limit = -ln_n / std::log(q) + m * m / 2.0;
    r.many_inversions = inv_count >= limit - kRegimeTolerance * std::abs(limit);
  }
  if (r.small_q) r.labels.emplace_back("small-q");
  if (r.large_q) r.labels.emplace_back("large-q");
  if (r.few_inversions) r.labels.emplace_back("few-inversions");
  if (r.many_inversions) r.labels.emplace_back("many-inversions");
  if (r.monotone_special_case) r.labels.emplace_back("monotone");
  return r;
}

D1Diagnostic d1_diagnostic(long n, int j) {
  if (j < 1 || j > n) throw InvalidInput("need n >= j >= 1");
  const Integer cnj = binomial_int(static_cast<unsigned>(n), static_cast<unsigned>(j));
  const Integer cnjj = binomial_int(static_cast<unsigned>(n - j), static_cast<unsigned>(j));
  const BigScalar jfact = factorial(static_cast<unsigned long>(j));
  D1Diagnostic out;
  out.d1_exact = big(Integer(cnj * (cnj - cnjj))) / (jfact * jfact);
  const BigScalar lambda = big(cnj) / jfact;
  const double x = static_cast<double>(j) * j / static_cast<double>(n);
  out.d1_asymptotic = static_cast<double>((lambda * lambda).to_real() * Real(-std::expm1(-x)));
  return out;
}

BigScalar poisson_pmf(const BigScalar& lambda, long k) {
  if (lambda.sign() <= 0) throw InvalidInput("Poisson mean must be positive");
  if (k < 0) return BigScalar();
  return exp(-lambda) * pow(lambda, k) / factorial(static_cast<unsigned long>(k));
}

std::pair<BigScalar, BigScalar> poisson_interval(const BigScalar& pmf, const BigScalar& bound) {
  return {max(BigScalar(), pmf - bound), min(BigScalar(1), pmf + bound)};
}

}  // namespace patpoisson
