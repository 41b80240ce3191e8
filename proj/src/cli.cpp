#include "patpoisson/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "patpoisson/bounds.hpp"
#include "patpoisson/errors.hpp"
#include "patpoisson/mallows.hpp"
#include "patpoisson/overlap.hpp"
#include "patpoisson/report_json.hpp"
#include "patpoisson/verify.hpp"

namespace patpoisson {

namespace {

enum class Format { text, json, csv };

struct Globals {
  std::string format = "text";
  std::uint64_t seed = 1;
  int guard_factorial = kEnumerationGuard;
  std::string out;
  int digits = 6;

  Format fmt() const {
    if (format == "json") return Format::json;
    if (format == "csv") return Format::csv;
    return Format::text;
  }
};

// Output of one subcommand: config header plus a body in the chosen format.
struct Emitter {
  Format format;
  Json config;
  std::ostringstream body;
  Json result = Json::object();

  std::string render() const {
    std::ostringstream os;
    if (format == Format::json) {
      Json j;
      j["config"] = config;
      j["result"] = result;
      os << j.dump(2) << '\n';
    } else {
      os << "# patpoisson " << config.dump() << '\n' << body.str();
    }
    return os.str();
  }
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += csv_field(f);
    first = false;
  }
  return line + "\r\n";
}

long parse_count(const std::string& text, const std::string& name) {
  const Rational r = parse_rational(text);
  if (mp::denominator(r) != 1) throw InvalidInput(name + " must be an integer");
  const Integer z = mp::numerator(r);
  if (z < 1 || z > Integer(std::numeric_limits<long>::max())) throw InvalidInput(name + " out of range");
  return static_cast<long>(z);
}

Rational parse_q(const std::string& text) {
  const Rational q = parse_rational(text);
  if (q <= 0) throw InvalidInput("q must be positive");
  return q;
}

std::string show(const BigScalar& x, int digits) { return x.scientific(digits); }

std::string show(const Real& x) { return x.str(12, std::ios_base::scientific); }

// ---------------------------------------------------------------- tables

struct GoldenRow {
  long n;
  int j;
  const char* lower;
  const char* factorial;
};

constexpr GoldenRow kClassicalRows[] = {
    {100, 36, "6.85456e157", "9.3326e157"},
    {1000, 133, "3.4433e2567", "4.6045e2567"},
    {10000, 442, "8.3847e35658", "2.8463e35659"},
    {100000, 14353, "9.9451e65657058", "1.2024e65657059"},
};

constexpr GoldenRow kConsecutiveRows[] = {
    {100, 6, "3.98735e157", "9.33262e157"},
    {1000, 7, "5.77948e2566", "4.02387e2567"},
    {10000, 9, "2.49966e35659", "2.84626e35659"},
    {100000, 10, "2.48004e456573", "2.82423e456573"},
    {1000000, 11, "7.34802e5565708", "8.26393e5565708"},
};

int significant_digits(std::string_view golden) {
  int count = 0;
  for (char c : golden) {
    if (c == 'e') break;
    if (c >= '0' && c <= '9') ++count;
  }
  return count;
}

bool matches_golden(const BigScalar& x, std::string_view golden) {
  return x.scientific(significant_digits(golden)) == golden;
}

int cmd_tables(const Globals& g, const std::string& which, Emitter& e) {
  e.config["table"] = which;
  if (e.format == Format::csv)
    e.body << csv_row({"table", "n", "j", "method", "lower", "upper", "factorial", "golden_lower", "golden_factorial",
                       "lower_match", "factorial_match"});
  Json rows = Json::array();
  auto emit = [&](int table, const GoldenRow& row, const UniformBoundsReport& r) {
    const bool lower_ok = matches_golden(r.count_lower, row.lower);
    const bool fact_ok = matches_golden(r.factorial_n, row.factorial);
    const int d = g.digits;
    switch (e.format) {
      case Format::csv:
        e.body << csv_row({std::to_string(table), std::to_string(row.n), std::to_string(row.j),
                           std::string(to_string(r.d2_method)), show(r.count_lower, d), show(r.count_upper, d),
                           show(r.factorial_n, d), row.lower, row.factorial, lower_ok ? "yes" : "no",
                           fact_ok ? "yes" : "no"});
        break;
      case Format::text:
        e.body << std::left << std::setw(8) << row.n << std::setw(7) << row.j << std::setw(9) << to_string(r.d2_method)
               << std::setw(18) << show(r.count_lower, d) << std::setw(18) << show(r.factorial_n, d)
               << (lower_ok ? "" : " lower-mismatch(printed " + std::string(row.lower) + ")")
               << (fact_ok ? "" : " n!-mismatch(printed " + std::string(row.factorial) + ")") << '\n';
        break;
      case Format::json: {
        Json j;
        j["table"] = table;
        j["golden_lower"] = row.lower;
        j["golden_factorial"] = row.factorial;
        j["lower_match"] = lower_ok;
        j["factorial_match"] = fact_ok;
        j["report"] = to_json(r);
        rows.push_back(std::move(j));
        break;
      }
    }
    return lower_ok;
  };

  if (which == "1" || which == "all") {
    if (e.format == Format::text)
      e.body << "classical avoidance: |S_n(tau)| for tau in S_j\n"
             << std::left << std::setw(8) << "n" << std::setw(7) << "j" << std::setw(9) << "d2" << std::setw(18)
             << "lower" << std::setw(18) << "n!" << '\n';
    for (const auto& row : kClassicalRows) {
      const auto crude = uniform_classical_bounds(row.n, row.j, D2Method::crude);
      if (!emit(1, row, crude)) emit(1, row, uniform_classical_bounds(row.n, row.j, D2Method::robbins));
    }
  }
  if (which == "2" || which == "all") {
    if (e.format == Format::text)
      e.body << (which == "all" ? "\n" : "") << "consecutive avoidance: |S-bar_n(tau)| for tau in S_j\n"
             << std::left << std::setw(8) << "n" << std::setw(7) << "j" << std::setw(9) << "d2" << std::setw(18)
             << "lower" << std::setw(18) << "n!" << '\n';
    for (const auto& row : kConsecutiveRows) emit(2, row, uniform_consecutive_bounds(row.n, row.j, D2Method::crude));
  }
  if (which != "1" && which != "2" && which != "all") throw InvalidInput("--table must be 1, 2 or all");
  e.result["rows"] = std::move(rows);
  return kExitOk;
}

// ---------------------------------------------------------------- curves

struct QRule {
  bool power = false;
  Rational value;  // q for const, exponent for power

  BigScalar at(long n) const {
    if (!power) return BigScalar(value);
    if (mp::denominator(value) == 1) return pow(BigScalar(Rational(n)), static_cast<long>(mp::numerator(value)));
    return BigScalar::from_real(mp::pow(Real(n), to_real(value)));
  }
};

QRule parse_q_rule(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("q rule must be const:<q> or power:<a>");
  const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
  if (kind == "const") return {false, parse_q(arg)};
  if (kind == "power") return {true, parse_rational(arg)};
  throw InvalidInput("q rule must be const:<q> or power:<a>");
}

std::vector<long> log_grid(long n_min, long n_max, int per_decade) {
  if (per_decade < 1) throw InvalidInput("--points-per-decade must be >= 1");
  if (n_min > n_max) throw InvalidInput("--n-min must not exceed --n-max");
  std::vector<long> grid;
  const int k0 = static_cast<int>(std::floor(std::log10(static_cast<double>(n_min)) * per_decade)) - 1;
  for (int k = std::max(k0, 0);; ++k) {
    const long n = std::lround(std::pow(10.0, static_cast<double>(k) / per_decade));
    if (n > n_max) break;
    if (n >= n_min && (grid.empty() || grid.back() != n)) grid.push_back(n);
  }
  return grid;
}

int cmd_curves(const Globals& g, const std::string& pattern, const std::string& rule_text, const std::string& n_min,
               const std::string& n_max, int per_decade, const std::string& convention, Emitter& e) {
  const Pattern tau = Pattern::parse(pattern);
  const QRule rule = parse_q_rule(rule_text);
  const CountConvention conv = parse_count_convention(convention);
  const long lo = std::max<long>(parse_count(n_min, "--n-min"), tau.size());
  const long hi = parse_count(n_max, "--n-max");
  e.config["pattern"] = pattern;
  e.config["q_rule"] = rule_text;
  e.config["n_min"] = lo;
  e.config["n_max"] = hi;
  e.config["points_per_decade"] = per_decade;
  e.config["convention"] = std::string(to_string(conv));

  Json points = Json::array();
  if (e.format == Format::csv) e.body << csv_row({"n", "lower", "mid", "upper"});
  if (e.format == Format::text)
    e.body << std::left << std::setw(10) << "n" << std::setw(14) << "lower" << std::setw(14) << "mid" << "upper\n";
  MallowsOptions options;
  options.convention = conv;
  for (long n : log_grid(lo, hi, per_decade)) {
    const auto r = mallows_consecutive_bounds(n, rule.at(n), tau, options);
    const int d = g.digits;
    if (e.format == Format::csv)
      e.body << csv_row({std::to_string(n), show(r.avoid_prob_lower, d), show(r.avoid_prob_center, d),
                         show(r.avoid_prob_upper, d)});
    else if (e.format == Format::text)
      e.body << std::left << std::setw(10) << n << std::setw(14) << show(r.avoid_prob_lower, d) << std::setw(14)
             << show(r.avoid_prob_center, d) << show(r.avoid_prob_upper, d) << '\n';
    else
      points.push_back(Json{{"n", n},
                            {"lower", to_json(r.avoid_prob_lower)},
                            {"mid", to_json(r.avoid_prob_center)},
                            {"upper", to_json(r.avoid_prob_upper)},
                            {"report", to_json(r)}});
  }
  e.result["points"] = std::move(points);
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

void text_uniform(std::ostream& os, const UniformBoundsReport& r, int d) {
  os << "mode: " << to_string(r.mode) << "\nn: " << r.n << "\nj: " << r.j << "\n";
  if (r.pattern) os << "pattern: " << *r.pattern << "\n";
  os << "d2 method: " << to_string(r.d2_method) << "\nlambda: " << show(r.lambda, d) << "\nmean: " << show(r.mean, d)
     << "\nd1: " << show(r.d1, d) << "\nd2: " << show(r.d2, d) << "\nD: " << show(r.D, d)
     << "\nTV bound (count): " << show(r.tv_count_bound, d) << "\nTV bound (process): " << show(r.tv_process_bound, d)
     << "\nn!: " << show(r.factorial_n, d) << "\ncenter n! e^-lambda: " << show(r.count_center, d)
     << "\ninterval: [" << show(r.count_lower, d) << ", " << show(r.count_upper, d) << "]\n";
  if (r.lower_clamped) os << "lower end clamped at 0 (unclamped " << show(r.count_lower_unclamped, d) << ")\n";
  if (r.mode == Mode::consecutive)
    os << "interval centred at n! e^-mean: [" << show(r.mean_count_lower, d) << ", " << show(r.mean_count_upper, d)
       << "]\n";
  if (r.d2_pair_multiplicity) os << "d2 with pair multiplicity: " << show(*r.d2_pair_multiplicity, d) << "\n";
  for (std::size_t s = 0; s < r.d2_terms.size(); ++s)
    os << "d2 term s=" << s + 1 << ": " << show(r.d2_terms[s], d) << "\n";
  for (const auto& note : r.notes) os << "note: " << note << "\n";
}

void csv_uniform(std::ostream& os, const UniformBoundsReport& r, int d) {
  os << csv_row({"mode", "n", "j", "d2_method", "lambda", "d1", "d2", "D", "tv_count_bound", "factorial", "lower",
                 "upper"});
  os << csv_row({std::string(to_string(r.mode)), std::to_string(r.n), std::to_string(r.j),
                 std::string(to_string(r.d2_method)), show(r.lambda, d), show(r.d1, d), show(r.d2, d), show(r.D, d),
                 show(r.tv_count_bound, d), show(r.factorial_n, d), show(r.count_lower, d), show(r.count_upper, d)});
}

void text_mallows(std::ostream& os, const MallowsBoundsReport& r, int d) {
  os << "pattern: " << r.pattern << "\nn: " << r.n << "\nm: " << r.m << "\nq: " << show(r.q, d)
     << "\nconvention: " << to_string(r.convention) << "\nlambda: " << show(r.lambda, d)
     << "\nmean: " << show(r.mean, d) << "\nb1: " << show(r.b1, d) << "\nb1 (n1 count): " << show(r.b1_n1, d)
     << "\nb1 (boundary count): " << show(r.b1_boundary, d) << "\n";
  if (r.b1_corrected) os << "b1 (squared power): " << show(*r.b1_corrected, d) << "\n";
  os << "b2: " << show(r.b2, d) << "\nb3: " << show(r.b3, d) << "\n";
  for (std::size_t s = 0; s < r.b2_terms.size(); ++s)
    os << "b2 term s=" << s + 1 << ": " << show(r.b2_terms[s], d) << "\n";
  os << "TV bound: " << show(r.tv_count_bound, d) << "\nP(W=0) interval: [" << show(r.avoid_prob_lower, d) << ", "
     << show(r.avoid_prob_upper, d) << "], centre e^-lambda = " << show(r.avoid_prob_center, d) << "\n";
  for (const auto& note : r.notes) os << "note: " << note << "\n";
}

void csv_mallows(std::ostream& os, const MallowsBoundsReport& r, int d) {
  os << csv_row({"pattern", "n", "q", "convention", "lambda", "b1", "b2", "tv_count_bound", "lower", "mid", "upper"});
  os << csv_row({r.pattern, std::to_string(r.n), show(r.q, d), std::string(to_string(r.convention)),
                 show(r.lambda, d), show(r.b1, d), show(r.b2, d), show(r.tv_count_bound, d),
                 show(r.avoid_prob_lower, d), show(r.avoid_prob_center, d), show(r.avoid_prob_upper, d)});
}

struct BoundsArgs {
  std::string n;
  int j = 0;
  std::string mode = "classical";
  std::string d2_method = "crude";
  std::string pattern;
  std::string q;
  std::string convention = "symmetric";
  std::string closed_form = "none";
  bool fixed_points = false;
};

int cmd_bounds(const Globals& g, const BoundsArgs& a, Emitter& e) {
  const long n = parse_count(a.n, "--n");
  e.config["n"] = n;
  const int d = g.digits;
  if (a.fixed_points) {
    const auto r = fixed_point_bound(n);
    e.config["fixed_points"] = true;
    if (e.format == Format::json) e.result = to_json(r);
    else if (e.format == Format::csv)
      e.body << csv_row({"n", "tv_bound", "lower", "upper", "derangements"})
             << csv_row({std::to_string(n), show(r.tv_bound, d), show(r.lower, d), show(r.upper, d),
                         r.derangements.str()});
    else
      e.body << "fixed points, n = " << n << "\nTV bound: " << show(r.tv_bound, d) << "\nderangements: ["
             << show(r.lower, d) << ", " << show(r.upper, d) << "], exact " << r.derangements.str() << "\n";
    return kExitOk;
  }

  std::optional<Pattern> tau;
  if (!a.pattern.empty()) tau = Pattern::parse(a.pattern);
  const int j = a.j ? a.j : (tau ? tau->size() : 0);
  if (j == 0) throw InvalidInput("give --j or --pattern");
  e.config["j"] = j;
  e.config["pattern"] = a.pattern.empty() ? Json(nullptr) : Json(a.pattern);

  if (!a.q.empty() || a.closed_form != "none") {
    const BigScalar q(a.q.empty() ? Rational(1) : parse_q(a.q));
    e.config["q"] = a.q.empty() ? "1" : a.q;
    e.config["convention"] = a.convention;
    e.config["closed_form"] = a.closed_form;
    MallowsBoundsReport r;
    if (a.closed_form == "monotone-increasing") r = monotone_mallows_bounds(n, j, q, Monotone::increasing);
    else if (a.closed_form == "monotone-decreasing") r = monotone_mallows_bounds(n, j, q, Monotone::decreasing);
    else if (a.closed_form == "length3") {
      if (!tau) throw InvalidInput("--closed-form length3 needs --pattern");
      r = length3_mallows_bounds(n, q, *tau);
    } else if (a.closed_form == "none") {
      if (!tau) throw InvalidInput("Mallows bounds need --pattern");
      MallowsOptions options;
      options.convention = parse_count_convention(a.convention);
      r = mallows_consecutive_bounds(n, q, *tau, options);
    } else {
      throw InvalidInput("--closed-form must be none, monotone-increasing, monotone-decreasing or length3");
    }
    if (e.format == Format::json) e.result = to_json(r);
    else if (e.format == Format::csv) csv_mallows(e.body, r, d);
    else text_mallows(e.body, r, d);
    return kExitOk;
  }

  const Mode mode = parse_mode(a.mode);
  const D2Method method = parse_d2_method(a.d2_method);
  e.config["mode"] = std::string(to_string(mode));
  e.config["d2_method"] = std::string(to_string(method));
  const auto r = mode == Mode::classical ? uniform_classical_bounds(n, j, method, tau)
                                         : uniform_consecutive_bounds(n, j, method, tau);
  if (e.format == Format::json) e.result = to_json(r);
  else if (e.format == Format::csv) csv_uniform(e.body, r, d);
  else text_uniform(e.body, r, d);
  return kExitOk;
}

// ---------------------------------------------------------------- overlap

void text_overlap(std::ostream& os, const OverlapTable& t) {
  const auto poly = inversion_polynomial(t);
  os << "s = " << t.s << ": " << t.size() << " permutation" << (t.size() == 1 ? "" : "s");
  if (!t.witnesses.empty()) os << ", inversion polynomial " << poly.to_string();
  if (t.mode == OverlapMode::classical) os << ", index-set pairs " << t.pair_multiplicity;
  os << "\n";
  if (t.witnesses.empty()) return;
  const std::size_t width = std::max<std::size_t>(11, t.witnesses.front().perm.to_string().size());
  os << "  " << std::left << std::setw(static_cast<int>(width)) << "permutation" << " | no. inversions | "
     << std::setw(static_cast<int>(width)) << "permutation" << " | no. inversions\n";
  for (std::size_t i = 0; i < t.witnesses.size(); i += 2) {
    os << "  " << std::setw(static_cast<int>(width)) << t.witnesses[i].perm.to_string() << " | " << std::setw(14)
       << t.witnesses[i].inv_count;
    if (i + 1 < t.witnesses.size())
      os << " | " << std::setw(static_cast<int>(width)) << t.witnesses[i + 1].perm.to_string() << " | "
         << t.witnesses[i + 1].inv_count;
    os << "\n";
  }
}

int cmd_overlap(const std::string& pattern, const std::string& mode_text, int s, int workers,
                const std::string& cache_dir, Emitter& e) {
  const Pattern tau = Pattern::parse(pattern);
  OverlapMode mode;
  if (mode_text == "sequential" || mode_text == "consecutive") mode = OverlapMode::sequential;
  else if (mode_text == "classical") mode = OverlapMode::classical;
  else throw InvalidInput("--mode must be sequential or classical");
  e.config["pattern"] = pattern;
  e.config["mode"] = std::string(to_string(mode));
  e.config["s"] = s;
  OverlapOptions options;
  options.workers = workers;
  if (!cache_dir.empty()) options.cache_dir = cache_dir;

  const int m = tau.size();
  if (s < 0 || s >= m) throw InvalidInput("--s must lie in 1..m-1 (0 for all)");
  std::vector<OverlapTable> tables;
  for (int k = (s ? s : 1); k <= (s ? s : m - 1); ++k)
    tables.push_back(mode == OverlapMode::sequential ? sequential_overlap(tau, k, options)
                                                     : classical_overlap(tau, k, options));

  Json arr = Json::array();
  if (e.format == Format::csv) e.body << csv_row({"pattern", "mode", "s", "permutation", "inversions"});
  if (e.format == Format::text)
    e.body << (mode == OverlapMode::sequential ? "sequential" : "classical") << " overlaps of " << pattern << "\n";
  for (const auto& t : tables) {
    if (e.format == Format::json) arr.push_back(to_json(t));
    else if (e.format == Format::text) text_overlap(e.body, t);
    else
      for (const auto& w : t.witnesses)
        e.body << csv_row({pattern, std::string(to_string(mode)), std::to_string(t.s), w.perm.to_string(),
                           std::to_string(w.inv_count)});
  }
  e.result["tables"] = std::move(arr);
  return kExitOk;
}

// ---------------------------------------------------------------- sample

int cmd_sample(const Globals& g, const std::string& n_text, const std::string& q_text, long count,
               const std::string& strategy_text, Emitter& e) {
  const long n = parse_count(n_text, "--n");
  const Rational q = parse_q(q_text);
  const Strategy strategy = parse_strategy(strategy_text);
  if (count < 1) throw InvalidInput("--count must be >= 1");
  e.config["n"] = n;
  e.config["q"] = rational_to_string(q);
  e.config["count"] = count;
  e.config["strategy"] = std::string(to_string(strategy));
  const GeometricParam gq{BigScalar(q)};
  Json samples = Json::array();
  if (e.format == Format::csv) e.body << csv_row({"index", "permutation"});
  for (long i = 0; i < count; ++i) {
    Rng rng(derive_seed(g.seed, static_cast<std::uint64_t>(i)));
    const std::string p = materialize(sample_variates(n, gq, rng), strategy).to_string();
    if (e.format == Format::json) samples.push_back(p);
    else if (e.format == Format::csv) e.body << csv_row({std::to_string(i + 1), p});
    else e.body << p << '\n';
  }
  e.result["samples"] = std::move(samples);
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite = "certify";
  std::string n = "7";
  std::string pattern;
  int m = 0;
  std::string mode = "consecutive";
  std::string q = "1";
  std::uint64_t samples = 0;
  std::string strategy;
  std::string index_sets;
};

std::vector<IndexSet> parse_index_sets(const std::string& text) {
  std::vector<IndexSet> sets;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    IndexSet s;
    s.indices = parse_word(part);
    sets.push_back(std::move(s));
  }
  return sets;
}

std::vector<Pattern> all_patterns(int m) {
  std::vector<Pattern> out;
  for_each_permutation(m, [&](std::span<const int> v, int) { out.emplace_back(Permutation({v.begin(), v.end()})); });
  return out;
}

int report_tests(const std::vector<StatTest>& tests, Emitter& e) {
  bool ok = true;
  Json arr = Json::array();
  if (e.format == Format::csv) e.body << csv_row({"test", "statistic", "df", "p_value", "informational", "retried", "passed"});
  for (const auto& t : tests) {
    ok = ok && (t.passed || t.informational);
    std::ostringstream p;
    p << std::setprecision(6) << t.result.p_value;
    if (e.format == Format::json) arr.push_back(to_json(t));
    else if (e.format == Format::csv)
      e.body << csv_row({t.name, std::to_string(t.result.statistic), std::to_string(t.result.df), p.str(),
                         t.informational ? "yes" : "no", t.retried ? "yes" : "no", t.passed ? "yes" : "no"});
    else
      e.body << (t.passed ? "PASS " : (t.informational ? "INFO " : "FAIL ")) << t.name << "  chi2=" << std::fixed
             << std::setprecision(3) << t.result.statistic << std::defaultfloat << " df=" << t.result.df
             << " p=" << p.str() << (t.retried ? " (retried)" : "") << (t.informational ? " (informational)" : "")
             << "\n";
  }
  e.result["tests"] = std::move(arr);
  e.result["passed"] = ok;
  return ok ? kExitOk : kExitCertificationFailure;
}

int cmd_verify(const Globals& g, const VerifyArgs& a, Emitter& e) {
  const long n = parse_count(a.n, "--n");
  e.config["suite"] = a.suite;
  e.config["n"] = n;
  const int guard = g.guard_factorial;
  const auto small_n = [&] {
    if (n > kEnumerationHardLimit) throw ResourceLimit("n exceeds the enumeration limit");
    return static_cast<int>(n);
  };

  if (a.suite == "certify") {
    const Rational q = parse_q(a.q);
    e.config["q"] = rational_to_string(q);
    std::vector<Pattern> patterns;
    if (!a.pattern.empty()) patterns.push_back(Pattern::parse(a.pattern));
    else if (a.m >= 3) patterns = all_patterns(a.m);
    else throw InvalidInput("certify needs --pattern or --m >= 3");
    e.config["patterns"] = a.pattern.empty() ? "all of S_" + std::to_string(a.m) : a.pattern;
    if (small_n() > guard) throw ResourceLimit("certification enumerates S_n above --guard-factorial");
    bool ok = true;
    Json arr = Json::array();
    if (e.format == Format::csv)
      e.body << csv_row({"pattern", "n", "q", "exact_tv", "bound", "slack", "avoiders", "interval_checked", "interval_ok"});
    for (const auto& tau : patterns) {
      const auto c = certify_consecutive(small_n(), tau, q);
      const bool pass = c.tv.ok() && c.interval_ok;
      ok = ok && pass;
      if (e.format == Format::json) arr.push_back(to_json(c));
      else if (e.format == Format::csv)
        e.body << csv_row({c.pattern, std::to_string(c.n), rational_to_string(c.q), show(c.tv.exact_tv),
                           show(c.tv.bound, g.digits), show(c.tv.slack), c.avoiders.str(),
                           c.interval_checked ? "yes" : "no", c.interval_ok ? "yes" : "no"});
      else {
        e.body << (pass ? "PASS " : "FAIL ") << c.pattern << " n=" << c.n << " q=" << rational_to_string(c.q)
               << "  TV=" << show(c.tv.exact_tv) << " <= bound " << show(c.tv.bound, g.digits);
        if (c.interval_checked)
          e.body << "  avoiders " << c.avoiders.str() << " in [" << show(c.lower, g.digits) << ", "
                 << show(c.upper, g.digits) << "]";
        e.body << "\n";
      }
    }
    e.result["certifications"] = std::move(arr);
    e.result["passed"] = ok;
    return ok ? kExitOk : kExitCertificationFailure;
  }

  if (a.suite == "catalan") {
    const int k = small_n();
    if (k > guard) throw ResourceLimit("catalan check enumerates S_n above --guard-factorial");
    const Integer catalan = binomial_int(2u * static_cast<unsigned>(k), static_cast<unsigned>(k)) / (k + 1);
    bool ok = true;
    Json arr = Json::array();
    if (e.format == Format::csv) e.body << csv_row({"pattern", "n", "avoiders", "catalan"});
    for (const auto& tau : all_patterns(3)) {
      const Integer c = exact_avoidance_count(k, tau, Mode::classical, guard);
      ok = ok && c == catalan;
      if (e.format == Format::json)
        arr.push_back(Json{{"pattern", tau.to_string()}, {"avoiders", c.str()}, {"catalan", catalan.str()}});
      else if (e.format == Format::csv) e.body << csv_row({tau.to_string(), std::to_string(k), c.str(), catalan.str()});
      else
        e.body << (c == catalan ? "PASS " : "FAIL ") << tau.to_string() << " n=" << k << " avoiders " << c.str()
               << " catalan " << catalan.str() << "\n";
    }
    e.result["rows"] = std::move(arr);
    e.result["passed"] = ok;
    return ok ? kExitOk : kExitCertificationFailure;
  }

  if (a.suite == "fixed-points") {
    const int k = small_n();
    const auto dist = fixed_point_distribution(k);
    const auto fb = fixed_point_bound(k);
    const auto tv = exact_tv_to_poisson(dist, BigScalar(1), fb.tv_bound);
    const BigScalar der(fb.derangements);
    const bool in_interval = fb.lower <= der && der <= fb.upper;
    const bool ok = tv.ok() && in_interval;
    if (e.format == Format::json) {
      e.result["tv"] = to_json(tv);
      e.result["bound"] = to_json(fb);
      e.result["distribution"] = to_json(dist);
      e.result["passed"] = ok;
    } else if (e.format == Format::csv) {
      e.body << csv_row({"n", "exact_tv", "bound", "derangements", "lower", "upper"})
             << csv_row({std::to_string(k), show(tv.exact_tv), show(tv.bound, g.digits), fb.derangements.str(),
                         show(fb.lower, g.digits), show(fb.upper, g.digits)});
    } else {
      e.body << (ok ? "PASS" : "FAIL") << " fixed points n=" << k << "  TV=" << show(tv.exact_tv) << " <= "
             << show(tv.bound, g.digits) << "  D_n=" << fb.derangements.str() << " in [" << show(fb.lower, g.digits)
             << ", " << show(fb.upper, g.digits) << "]\n";
    }
    return ok ? kExitOk : kExitCertificationFailure;
  }

  if (a.suite == "process") {
    if (a.pattern.empty()) throw InvalidInput("process suite needs --pattern");
    e.config["pattern"] = a.pattern;
    const auto r = process_tv_exact(small_n(), Pattern::parse(a.pattern), std::min(guard, kProcessGuard));
    if (e.format == Format::json) {
      e.result["tv"] = to_json(r.tv);
      e.result["exact_tv"] = rational_to_string(r.exact_tv_rational);
      e.result["atoms"] = r.atoms;
    } else if (e.format == Format::csv) {
      e.body << csv_row({"pattern", "n", "exact_tv", "bound", "slack"})
             << csv_row({a.pattern, std::to_string(n), show(r.tv.exact_tv), show(r.tv.bound, g.digits),
                         show(r.tv.slack)});
    } else {
      e.body << (r.tv.ok() ? "PASS" : "FAIL") << " process TV " << a.pattern << " n=" << n
             << "  TV=" << show(r.tv.exact_tv) << " <= " << show(r.tv.bound, g.digits) << "\n";
    }
    return r.tv.ok() ? kExitOk : kExitCertificationFailure;
  }

  if (a.suite == "sampler") {
    const Rational q = parse_q(a.q);
    const std::uint64_t samples = a.samples ? a.samples : 1'000'000;
    e.config["q"] = rational_to_string(q);
    e.config["samples"] = samples;
    std::vector<StatTest> tests;
    const int k = small_n();
    if (k > 8) throw ResourceLimit("sampler goodness of fit tabulates n! cells; n <= 8");
    for (Strategy s : {Strategy::ordering, Strategy::bumping})
      if (a.strategy.empty() || parse_strategy(a.strategy) == s)
        tests.push_back(sampler_goodness_of_fit(k, q, s, samples, derive_seed(g.seed, static_cast<std::uint64_t>(s))));
    return report_tests(tests, e);
  }

  if (a.suite == "structure") {
    const Rational q = parse_q(a.q);
    SuiteOptions options;
    options.samples = a.samples ? a.samples : 1'000'000;
    options.seed = g.seed;
    if (!a.strategy.empty()) options.strategy = parse_strategy(a.strategy);
    const std::string sets_text = a.index_sets.empty() ? "1,2,3;5,6,7;1,4,7;2,5,8" : a.index_sets;
    e.config["q"] = rational_to_string(q);
    e.config["samples"] = options.samples;
    e.config["index_sets"] = sets_text;
    return report_tests(homogeneity_dissociation_suite(static_cast<int>(n), q, parse_index_sets(sets_text), options), e);
  }

  if (a.suite == "distribution") {
    if (a.pattern.empty()) throw InvalidInput("distribution suite needs --pattern");
    const Pattern tau = Pattern::parse(a.pattern);
    const Mode mode = parse_mode(a.mode);
    const Measure measure{parse_q(a.q)};
    e.config["pattern"] = a.pattern;
    e.config["mode"] = std::string(to_string(mode));
    e.config["q"] = rational_to_string(measure.q);
    e.config["samples"] = a.samples;
    OccurrenceDistribution d;
    if (a.samples == 0) {
      if (n > kEnumerationHardLimit) throw ResourceLimit("exact distribution needs n <= 12; pass --samples");
      d = exact_distribution(static_cast<int>(n), tau, mode, measure, guard);
    } else {
      MonteCarloOptions mc;
      mc.samples = a.samples;
      mc.seed = g.seed;
      if (!a.strategy.empty()) mc.strategy = parse_strategy(a.strategy);
      d = monte_carlo_distribution(n, tau, mode, measure, mc);
    }
    if (e.format == Format::json) e.result = to_json(d);
    else {
      if (e.format == Format::csv) e.body << csv_row({"k", "probability", d.exact ? "exact" : "stderr"});
      for (std::size_t k = 0; k < d.pmf.size(); ++k) {
        std::ostringstream p;
        p << std::setprecision(10) << d.pmf[k];
        const std::string extra = d.exact ? rational_to_string(d.pmf_exact[k]) : std::to_string(d.stderr_[k]);
        if (e.format == Format::csv) e.body << csv_row({std::to_string(k), p.str(), extra});
        else e.body << "P(W=" << k << ") = " << p.str() << (d.exact ? " = " : " +- ") << extra << "\n";
      }
    }
    return kExitOk;
  }

  throw InvalidInput("unknown --suite '" + a.suite +
                     "' (certify, catalan, fixed-points, process, sampler, structure, distribution)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poisson-approximation bounds for pattern occurrences in random permutations", "patpoisson"};
  app.require_subcommand(1);
  Globals g;
  auto add_globals = [&](CLI::App* a) {
    a->add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
    a->add_option("--seed", g.seed, "Base seed for all randomness");
    a->add_option("--guard-factorial", g.guard_factorial, "Largest n for which S_n may be enumerated")
        ->check(CLI::Range(1, kEnumerationHardLimit));
    a->add_option("--out", g.out, "Write output to this file instead of stdout");
    a->add_option("--digits", g.digits, "Significant digits in displayed values")->check(CLI::Range(1, 30));
  };
  add_globals(&app);

  std::string table = "all";
  auto* tables = app.add_subcommand("tables", "Regenerate the avoidance-count tables");
  tables->add_option("--table", table, "1, 2 or all");

  std::string c_pattern = "2341", c_rule = "const:1", c_min = "10", c_max = "1e6", c_conv = "boundary";
  int c_ppd = 4;
  auto* curves = app.add_subcommand("curves", "Avoidance-probability bound curves as plot data");
  curves->add_option("--pattern", c_pattern);
  curves->add_option("--q-rule", c_rule, "const:<q> or power:<a> (q = n^a)");
  curves->add_option("--n-min", c_min);
  curves->add_option("--n-max", c_max);
  curves->add_option("--points-per-decade", c_ppd);
  curves->add_option("--convention", c_conv, "literal, symmetric, boundary or exact");

  BoundsArgs b;
  auto* bounds = app.add_subcommand("bounds", "Poisson-approximation bounds");
  bounds->add_option("--n", b.n)->required();
  bounds->add_option("--j,--m", b.j, "Pattern length");
  bounds->add_option("--mode", b.mode, "classical or consecutive");
  bounds->add_option("--d2-method", b.d2_method, "exact, crude, robbins or lemma");
  bounds->add_option("--pattern", b.pattern);
  bounds->add_option("--q", b.q, "Mallows parameter (consecutive patterns)");
  bounds->add_option("--convention", b.convention, "literal, symmetric, boundary or exact");
  bounds->add_option("--closed-form", b.closed_form, "none, monotone-increasing, monotone-decreasing or length3");
  bounds->add_flag("--fixed-points", b.fixed_points, "Bounds for the number of fixed points");

  std::string o_pattern, o_mode = "sequential", o_cache;
  int o_s = 0, o_workers = 1;
  auto* overlap = app.add_subcommand("overlap", "Overlap tables");
  overlap->add_option("--pattern", o_pattern)->required();
  overlap->add_option("--mode", o_mode, "sequential or classical");
  overlap->add_option("--s", o_s, "Overlap size (0 for all)");
  overlap->add_option("--workers", o_workers)->check(CLI::Range(1, 256));
  overlap->add_option("--cache-dir", o_cache);

  std::string s_n, s_q = "1", s_strategy = "ordering";
  long s_count = 1;
  auto* sample_cmd = app.add_subcommand("sample", "Sample Mallows permutations");
  sample_cmd->add_option("--n", s_n)->required();
  sample_cmd->add_option("--q", s_q);
  sample_cmd->add_option("--count", s_count);
  sample_cmd->add_option("--strategy", s_strategy, "ordering or bumping");

  VerifyArgs v;
  auto* verify = app.add_subcommand("verify", "Exact and statistical verification suites");
  verify->add_option("--suite", v.suite, "certify, catalan, fixed-points, process, sampler, structure, distribution");
  verify->add_option("--n", v.n);
  verify->add_option("--pattern", v.pattern);
  verify->add_option("--m", v.m, "Certify every pattern of this length");
  verify->add_option("--mode", v.mode);
  verify->add_option("--q", v.q);
  verify->add_option("--samples", v.samples);
  verify->add_option("--strategy", v.strategy);
  verify->add_option("--index-sets", v.index_sets, "e.g. \"1,2,3;5,6,7\"");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalidInput;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Emitter e{g.fmt(), Json::object(), {}, Json::object()};
  e.config["command"] = chosen->get_name();
  e.config["format"] = g.format;
  e.config["seed"] = g.seed;
  e.config["guard_factorial"] = g.guard_factorial;
  e.config["digits"] = g.digits;

  int code = kExitOk;
  try {
    if (chosen == tables) code = cmd_tables(g, table, e);
    else if (chosen == curves) code = cmd_curves(g, c_pattern, c_rule, c_min, c_max, c_ppd, c_conv, e);
    else if (chosen == bounds) code = cmd_bounds(g, b, e);
    else if (chosen == overlap) code = cmd_overlap(o_pattern, o_mode, o_s, o_workers, o_cache, e);
    else if (chosen == sample_cmd) code = cmd_sample(g, s_n, s_q, s_count, s_strategy, e);
    else code = cmd_verify(g, v, e);
  } catch (const ResourceLimit& ex) {
    err << "resource limit: " << ex.what() << '\n';
    return kExitResourceLimit;
  } catch (const InvalidInput& ex) {
    err << "invalid input: " << ex.what() << '\n';
    return kExitInvalidInput;
  }

  const std::string text = e.render();
  if (g.out.empty()) {
    out << text;
  } else {
    std::ofstream file(g.out, std::ios::binary);
    if (!file) {
      err << "cannot open " << g.out << '\n';
      return kExitInvalidInput;
    }
    file << text;
  }
  return code;
}

}  // namespace patpoisson
