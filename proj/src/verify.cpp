#include "patpoisson/verify.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <thread>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

void check_guard(int n, int guard) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  const int limit = std::min(guard, kEnumerationHardLimit);
  if (n > limit)
    throw ResourceLimit("enumeration of S_" + std::to_string(n) + " exceeds guard n <= " + std::to_string(limit));
}

std::int64_t count_occurrences(std::span<const int> values, const Pattern& tau, Mode mode) {
  return mode == Mode::classical ? count_classical(values, tau) : count_consecutive(values, tau);
}

std::vector<Rational> mallows_weights(int n, const Rational& q) {
  // weight[i] = q^i / I_n(q)
  const Rational norm = inversion_poly_value(n, BigScalar(q)).rational();
  std::vector<Rational> w(static_cast<std::size_t>(n) * (n - 1) / 2 + 1);
  Rational power = 1;
  for (auto& x : w) {
    x = power / norm;
    power *= q;
  }
  return w;
}

void fill_double_view(OccurrenceDistribution& d) {
  d.pmf.clear();
  for (const auto& p : d.pmf_exact) d.pmf.push_back(static_cast<double>(p));
}

std::size_t factorial_size(int k) {
  std::size_t f = 1;
  for (int i = 2; i <= k; ++i) f *= static_cast<std::size_t>(i);
  return f;
}

std::vector<double> mallows_pmf_table(int k, const Rational& q) {
  std::vector<double> out(factorial_size(k));
  const auto w = mallows_weights(k, q);
  std::size_t rank = 0;
  for_each_permutation(k, [&](std::span<const int>, int inv) { out[rank++] = static_cast<double>(w[static_cast<std::size_t>(inv)]); });
  return out;
}

bool passes(const ChiSquareResult& r) { return r.p_value >= kSignificance; }

// Runs `test(seed)` and, when it fails, once more on a derived seed.
template <typename Run>
StatTest with_retry(std::string name, std::uint64_t seed, bool informational, Run&& run) {
  StatTest t;
  t.name = std::move(name);
  t.informational = informational;
  t.result = run(seed);
  t.passed = passes(t.result);
  if (!t.passed && !informational) {
    t.retried = true;
    t.result = run(derive_seed(seed, 0xFFFF));
    t.passed = passes(t.result);
  }
  return t;
}

std::string q_label(const Rational& q) { return rational_to_string(q); }

}  // namespace

std::string Measure::to_string() const {
  return is_uniform() ? "uniform" : "mallows(q=" + rational_to_string(q) + ")";
}

double OccurrenceDistribution::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

OccurrenceDistribution exact_distribution(int n, const Pattern& tau, Mode mode, const Measure& measure, int guard) {
  check_guard(n, guard);
  if (measure.q <= 0) throw InvalidInput("q must be positive");
  OccurrenceDistribution d;
  d.n = n;
  d.pattern = tau.to_string();
  d.mode = mode;
  d.measure = measure;
  d.exact = true;
  if (tau.size() > n) {
    d.pmf_exact = {Rational(1)};
    fill_double_view(d);
    return d;
  }

  const int max_inv = n * (n - 1) / 2;
  std::vector<std::vector<std::uint64_t>> hist;
  for_each_permutation(n, [&](std::span<const int> v, int inv) {
    const auto k = static_cast<std::size_t>(count_occurrences(v, tau, mode));
    if (hist.size() <= k) hist.resize(k + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_inv) + 1, 0));
    ++hist[k][static_cast<std::size_t>(inv)];
  });

  const auto w = mallows_weights(n, measure.q);
  d.pmf_exact.assign(hist.size(), Rational(0));
  for (std::size_t k = 0; k < hist.size(); ++k)
    for (std::size_t i = 0; i < hist[k].size(); ++i)
      if (hist[k][i]) d.pmf_exact[k] += Rational(hist[k][i]) * w[i];
  fill_double_view(d);
  return d;
}

Integer exact_avoidance_count(int n, const Pattern& tau, Mode mode, int guard) {
  return exact_avoidance_count(n, std::vector<Pattern>{tau}, mode, guard);
}

Integer exact_avoidance_count(int n, const std::vector<Pattern>& patterns, Mode mode, int guard) {
  check_guard(n, guard);
  if (patterns.empty()) throw InvalidInput("pattern set must be nonempty");
  std::uint64_t count = 0;
  for_each_permutation(n, [&](std::span<const int> v, int) {
    for (const auto& tau : patterns) {
      const bool hit = mode == Mode::classical ? contains_classical(v, tau) : count_consecutive(v, tau) > 0;
      if (hit) return;
    }
    ++count;
  });
  return Integer(count);
}

TVReport exact_tv_to_poisson(const OccurrenceDistribution& dist, const BigScalar& lambda, const BigScalar& bound) {
  if (!dist.exact) throw InvalidInput("exact TV needs an exact distribution; compare Monte Carlo output statistically");
  if (lambda.sign() < 0) throw InvalidInput("Poisson mean must be nonnegative");
  const Real lam = lambda.to_real();
  Real pi = mp::exp(-lam);
  Real poisson_mass = 0, sum = 0;
  for (std::size_t k = 0; k < dist.pmf_exact.size(); ++k) {
    if (k > 0) pi = pi * lam / Real(static_cast<long>(k));
    poisson_mass += pi;
    sum += mp::abs(to_real(dist.pmf_exact[k]) - pi);
  }
  Real tail = Real(1) - poisson_mass;
  if (tail < 0) tail = 0;
  TVReport r;
  r.exact_tv = (sum + tail) / 2;
  r.bound = bound;
  r.slack = bound.to_real() - r.exact_tv;
  r.tail_truncation = 0;
  return r;
}

OccurrenceDistribution fixed_point_distribution(int n) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  std::vector<Integer> der(static_cast<std::size_t>(n) + 1);
  der[0] = 1;
  if (n >= 1) der[1] = 0;
  for (int k = 2; k <= n; ++k)
    der[static_cast<std::size_t>(k)] = Integer(k - 1) * (der[static_cast<std::size_t>(k - 1)] + der[static_cast<std::size_t>(k - 2)]);
  OccurrenceDistribution d;
  d.n = n;
  d.pattern = "fixed-points";
  d.mode = Mode::classical;
  const Integer nf = factorial_int(static_cast<unsigned>(n));
  for (int k = 0; k <= n; ++k)
    d.pmf_exact.push_back(Rational(binomial_int(static_cast<unsigned>(n), static_cast<unsigned>(k)) *
                                       der[static_cast<std::size_t>(n - k)],
                                   nf));
  fill_double_view(d);
  return d;
}

OccurrenceDistribution monte_carlo_distribution(long n, const Pattern& tau, Mode mode, const Measure& measure,
                                                const MonteCarloOptions& options) {
  if (options.samples < 1) throw InvalidInput("samples must be >= 1");
  if (options.shards < 1) throw InvalidInput("shards must be >= 1");
  if (measure.q <= 0) throw InvalidInput("q must be positive");
  const auto shards = static_cast<std::size_t>(options.shards);
  std::vector<std::vector<std::uint64_t>> counts(shards);
  const GeometricParam q{BigScalar(measure.q)};

  auto run_shard = [&](std::size_t s) {
    const std::uint64_t share = options.samples / shards + (s < options.samples % shards ? 1 : 0);
    Rng rng(derive_seed(options.seed, s));
    auto& c = counts[s];
    for (std::uint64_t i = 0; i < share; ++i) {
      std::size_t k = 0;
      if (tau.size() <= n) {
        const Permutation p = materialize(sample_variates(n, q, rng), options.strategy);
        k = static_cast<std::size_t>(count_occurrences(p.values(), tau, mode));
      }
      if (c.size() <= k) c.resize(k + 1, 0);
      ++c[k];
    }
  };
  const int workers = std::clamp(options.workers, 1, options.shards);
  if (workers == 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t s = static_cast<std::size_t>(w); s < shards; s += static_cast<std::size_t>(workers)) run_shard(s);
      });
  }

  std::vector<std::uint64_t> total;
  for (const auto& c : counts) {
    if (total.size() < c.size()) total.resize(c.size(), 0);
    for (std::size_t k = 0; k < c.size(); ++k) total[k] += c[k];
  }
  OccurrenceDistribution d;
  d.n = n;
  d.pattern = tau.to_string();
  d.mode = mode;
  d.measure = measure;
  d.exact = false;
  d.samples = options.samples;
  d.seed = options.seed;
  const double N = static_cast<double>(options.samples);
  for (auto c : total) {
    const double p = static_cast<double>(c) / N;
    d.pmf.push_back(p);
    d.stderr_.push_back(std::sqrt(p * (1 - p) / N));
  }
  return d;
}

ProcessTVReport process_tv_exact(int n, const Pattern& tau, int guard) {
  const int m = tau.size();
  if (m > n) throw InvalidInput("pattern longer than n");
  if (n > std::min(guard, kEnumerationHardLimit))
    throw ResourceLimit("process TV enumerates S_" + std::to_string(n) + ", above guard " + std::to_string(guard));
  const int windows = n - m + 1;
  std::vector<std::uint64_t> joint(std::size_t{1} << windows, 0);
  std::vector<std::uint64_t> ones(static_cast<std::size_t>(windows), 0);
  for_each_permutation(n, [&](std::span<const int> v, int) {
    std::size_t mask = 0;
    for (int i = 0; i < windows; ++i)
      if (tau.matches(v.subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(m)))) {
        mask |= std::size_t{1} << i;
        ++ones[static_cast<std::size_t>(i)];
      }
    ++joint[mask];
  });
  const Integer nf = factorial_int(static_cast<unsigned>(n));
  std::vector<Rational> p(static_cast<std::size_t>(windows));
  for (int i = 0; i < windows; ++i) p[static_cast<std::size_t>(i)] = Rational(Integer(ones[static_cast<std::size_t>(i)]), nf);
  Rational tv = 0;
  for (std::size_t mask = 0; mask < joint.size(); ++mask) {
    Rational prod = 1;
    for (int i = 0; i < windows; ++i)
      prod *= (mask >> i) & 1 ? p[static_cast<std::size_t>(i)] : Rational(1 - p[static_cast<std::size_t>(i)]);
    tv += mp::abs(Rational(Integer(joint[mask]), nf) - prod);
  }
  tv /= 2;

  ProcessTVReport r;
  r.exact_tv_rational = tv;
  r.atoms = joint.size();
  r.tv.exact_tv = to_real(tv);
  r.tv.bound = uniform_consecutive_bounds(n, m, D2Method::exact_overlap, tau).tv_process_bound;
  r.tv.slack = r.tv.bound.to_real() - r.tv.exact_tv;
  return r;
}

CertificationResult certify_consecutive(int n, const Pattern& tau, const Rational& q) {
  CertificationResult c;
  c.n = n;
  c.pattern = tau.to_string();
  c.q = q;
  const auto dist = exact_distribution(n, tau, Mode::consecutive, Measure{q}, kEnumerationHardLimit);
  if (q == 1) {
    const auto ub = uniform_consecutive_bounds(n, tau.size(), D2Method::exact_overlap, tau);
    c.tv = exact_tv_to_poisson(dist, ub.mean, ub.tv_count_bound);
    c.tv_literal = exact_tv_to_poisson(dist, ub.lambda, ub.tv_count_bound);
    c.avoiders = Integer(mp::numerator(Rational(dist.pmf_exact[0] * Rational(factorial_int(static_cast<unsigned>(n))))));
    const BigScalar count(c.avoiders);
    c.lower = ub.mean_count_lower;
    c.upper = ub.mean_count_upper;
    c.interval_checked = ub.mean_count_lower.sign() > 0;
    if (c.interval_checked) c.interval_ok = c.lower <= count && count <= c.upper;
    if (ub.count_lower.sign() > 0) c.literal_interval_ok = ub.count_lower <= count && count <= ub.count_upper;
  } else {
    const auto mb = mallows_consecutive_bounds(n, BigScalar(q), tau);
    c.tv = exact_tv_to_poisson(dist, mb.mean, mb.tv_count_bound);
    c.tv_literal = exact_tv_to_poisson(dist, mb.lambda, mb.tv_count_bound);
  }
  return c;
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size()) throw InvalidInput("observed and expected sizes differ");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  std::vector<double> obs, exp;
  double pooled_o = 0, pooled_e = 0;
  int pooled = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected[i] * total;
    if (e < 5) {
      pooled_o += static_cast<double>(observed[i]);
      pooled_e += e;
      ++pooled;
    } else {
      obs.push_back(static_cast<double>(observed[i]));
      exp.push_back(e);
    }
  }
  if (pooled > 0) {
    if (pooled_e >= 5 || exp.empty()) {
      obs.push_back(pooled_o);
      exp.push_back(pooled_e);
    } else {
      auto it = std::min_element(exp.begin(), exp.end());
      const auto idx = static_cast<std::size_t>(it - exp.begin());
      obs[idx] += pooled_o;
      exp[idx] += pooled_e;
    }
  }
  ChiSquareResult r;
  r.pooled_bins = pooled;
  for (std::size_t i = 0; i < obs.size(); ++i)
    if (exp[i] > 0) r.statistic += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  r.df = static_cast<int>(obs.size()) - 1;
  if (r.df >= 1) {
    boost::math::chi_squared dist(r.df);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  }
  return r;
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<std::uint64_t>>& table) {
  std::vector<double> rows, cols;
  const std::size_t nc = table.empty() ? 0 : table[0].size();
  cols.assign(nc, 0);
  double total = 0;
  for (const auto& row : table) {
    double s = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      s += static_cast<double>(row[j]);
      cols[j] += static_cast<double>(row[j]);
    }
    rows.push_back(s);
    total += s;
  }
  ChiSquareResult r;
  int live_rows = 0, live_cols = 0;
  for (double v : rows) live_rows += v > 0;
  for (double v : cols) live_cols += v > 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (rows[i] == 0) continue;
    for (std::size_t j = 0; j < nc; ++j) {
      if (cols[j] == 0) continue;
      const double e = rows[i] * cols[j] / total;
      const double o = static_cast<double>(table[i][j]);
      r.statistic += (o - e) * (o - e) / e;
    }
  }
  r.df = (live_rows - 1) * (live_cols - 1);
  if (r.df >= 1) {
    boost::math::chi_squared dist(r.df);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  }
  return r;
}

std::size_t permutation_rank(std::span<const int> values) {
  const std::size_t k = values.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < k; ++j) smaller += values[j] < values[i];
    rank = rank * (k - i) + smaller;
  }
  return rank;
}

StatTest sampler_goodness_of_fit(int n, const Rational& q, Strategy strategy, std::uint64_t samples,
                                 std::uint64_t seed) {
  const auto expected = mallows_pmf_table(n, q);
  const GeometricParam gq{BigScalar(q)};
  auto run = [&](std::uint64_t s) {
    Rng rng(s);
    std::vector<std::uint64_t> observed(expected.size(), 0);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const Permutation p = materialize(sample_variates(n, gq, rng), strategy);
      ++observed[permutation_rank(p.values())];
    }
    return chi_square_gof(observed, expected);
  };
  return with_retry("sampler n=" + std::to_string(n) + " q=" + q_label(q) + " " + std::string(to_string(strategy)),
                    seed, false, run);
}

StatTest prefix_consistency_test(int n, int m, const Rational& q, std::uint64_t samples, std::uint64_t seed) {
  if (m < 1 || m > n) throw InvalidInput("need 1 <= m <= n");
  const auto expected = mallows_pmf_table(m, q);
  const GeometricParam gq{BigScalar(q)};
  std::vector<int> values(static_cast<std::size_t>(m));
  std::iota(values.begin(), values.end(), 1);
  auto run = [&](std::uint64_t s) {
    Rng rng(s);
    std::vector<std::uint64_t> observed(expected.size(), 0);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const Permutation p = materialize(sample_variates(n, gq, rng), Strategy::ordering);
      const auto sub = restrict_to_values(p, values);
      ++observed[permutation_rank(sub)];
    }
    return chi_square_gof(observed, expected);
  };
  return with_retry("prefix n=" + std::to_string(n) + " m=" + std::to_string(m) + " q=" + q_label(q), seed, false, run);
}

bool is_consecutive(const IndexSet& s) {
  for (std::size_t i = 1; i < s.indices.size(); ++i)
    if (s.indices[i] != s.indices[i - 1] + 1) return false;
  return !s.indices.empty();
}

std::vector<StatTest> homogeneity_dissociation_suite(int n, const Rational& q, const std::vector<IndexSet>& index_sets,
                                                     const SuiteOptions& options) {
  for (const auto& s : index_sets) {
    if (s.indices.empty() || s.indices.front() < 1 || s.indices.back() > n)
      throw InvalidInput("index set outside 1.." + std::to_string(n));
    for (std::size_t i = 1; i < s.indices.size(); ++i)
      if (s.indices[i] <= s.indices[i - 1]) throw InvalidInput("index sets must be strictly increasing");
  }
  const bool uniform = q == 1;
  const std::size_t count = index_sets.size();
  std::vector<std::vector<double>> expected;
  for (const auto& s : index_sets) expected.push_back(mallows_pmf_table(static_cast<int>(s.indices.size()), q));

  auto disjoint = [](const IndexSet& a, const IndexSet& b) {
    for (int x : a.indices)
      if (std::find(b.indices.begin(), b.indices.end(), x) != b.indices.end()) return false;
    return true;
  };
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = a + 1; b < count; ++b)
      if (disjoint(index_sets[a], index_sets[b])) pairs.emplace_back(a, b);

  struct Tables {
    std::vector<std::vector<std::uint64_t>> marginal;
    std::vector<std::vector<std::vector<std::uint64_t>>> joint;
  };
  const GeometricParam gq{BigScalar(q)};
  auto collect = [&](std::uint64_t seed) {
    Tables t;
    for (const auto& e : expected) t.marginal.emplace_back(e.size(), 0);
    for (auto [a, b] : pairs)
      t.joint.emplace_back(expected[a].size(), std::vector<std::uint64_t>(expected[b].size(), 0));
    Rng rng(seed);
    std::vector<std::size_t> ranks(count);
    std::vector<int> window;
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      const Permutation p = materialize(sample_variates(n, gq, rng), options.strategy);
      for (std::size_t s = 0; s < count; ++s) {
        window.clear();
        for (int idx : index_sets[s].indices) window.push_back(p.at(idx));
        ranks[s] = permutation_rank(window);
        ++t.marginal[s][ranks[s]];
      }
      for (std::size_t k = 0; k < pairs.size(); ++k) ++t.joint[k][ranks[pairs[k].first]][ranks[pairs[k].second]];
    }
    return t;
  };

  auto describe = [](const IndexSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.indices.size(); ++i) out += (i ? "," : "") + std::to_string(s.indices[i]);
    return out + "}";
  };

  auto evaluate = [&](const Tables& t) {
    std::vector<StatTest> tests;
    for (std::size_t s = 0; s < count; ++s) {
      StatTest st;
      st.name = "homogeneity " + describe(index_sets[s]) + " q=" + q_label(q);
      st.informational = !uniform && !is_consecutive(index_sets[s]);
      st.result = chi_square_gof(t.marginal[s], expected[s]);
      st.passed = passes(st.result);
      tests.push_back(st);
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& A = index_sets[pairs[k].first];
      const auto& B = index_sets[pairs[k].second];
      StatTest st;
      st.name = "dissociation " + describe(A) + " x " + describe(B) + " q=" + q_label(q);
      st.informational = !uniform && !(is_consecutive(A) && is_consecutive(B));
      st.result = chi_square_independence(t.joint[k]);
      st.passed = passes(st.result);
      tests.push_back(st);
    }
    return tests;
  };

  auto tests = evaluate(collect(options.seed));
  const bool any_failed = std::any_of(tests.begin(), tests.end(), [](const StatTest& t) { return !t.passed && !t.informational; });
  if (any_failed && options.retry_once) {
    auto second = evaluate(collect(derive_seed(options.seed, 0xFFFF)));
    for (std::size_t i = 0; i < tests.size(); ++i) {
      if (tests[i].passed || tests[i].informational) continue;
      second[i].retried = true;
      tests[i] = second[i];
    }
  }
  return tests;
}

}  // namespace patpoisson
