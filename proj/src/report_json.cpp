#include "patpoisson/report_json.hpp"

#include <ios>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

Json scalars(const std::vector<BigScalar>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(to_json(x));
  return a;
}

std::vector<BigScalar> scalars_from(const Json& j) {
  std::vector<BigScalar> out;
  for (const auto& x : j) out.push_back(big_scalar_from_json(x));
  return out;
}

Json optional_scalar(const std::optional<BigScalar>& x) { return x ? to_json(*x) : Json(nullptr); }

std::optional<BigScalar> optional_scalar_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return big_scalar_from_json(j);
}

OverlapMode parse_overlap_mode(const std::string& s) {
  if (s == "sequential") return OverlapMode::sequential;
  if (s == "classical") return OverlapMode::classical;
  throw InvalidInput("unknown overlap mode '" + s + "'");
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace

Json to_json(const BigScalar& x) {
  Json j;
  j["display"] = x.scientific(6);
  j["sign"] = x.sign();
  j["log10"] = x.is_zero() ? Json(nullptr) : to_json(x.log10_abs());
  j["exact"] = x.is_exact() ? Json(rational_to_string(x.rational())) : Json(nullptr);
  return j;
}

BigScalar big_scalar_from_json(const Json& j) {
  return guarded([&] {
    if (!j.at("exact").is_null()) return BigScalar(parse_rational(j.at("exact").get<std::string>()));
    const int sign = j.at("sign").get<int>();
    if (sign == 0) return BigScalar();
    return BigScalar::from_log10(sign, real_from_json(j.at("log10")));
  });
}

Json to_json(const Real& x) { return x.str(40, std::ios_base::scientific); }

Real real_from_json(const Json& j) {
  return guarded([&] { return Real(j.get<std::string>()); });
}

Json to_json(const UniformBoundsReport& r) {
  Json j;
  j["kind"] = "uniform_bounds";
  j["mode"] = std::string(to_string(r.mode));
  j["n"] = r.n;
  j["j"] = r.j;
  j["pattern"] = r.pattern ? Json(*r.pattern) : Json(nullptr);
  j["d2_method"] = std::string(to_string(r.d2_method));
  j["lambda"] = to_json(r.lambda);
  j["mean"] = to_json(r.mean);
  j["d1"] = to_json(r.d1);
  j["d2"] = to_json(r.d2);
  j["D"] = to_json(r.D);
  j["tv_count_bound"] = to_json(r.tv_count_bound);
  j["tv_process_bound"] = to_json(r.tv_process_bound);
  j["factorial_n"] = to_json(r.factorial_n);
  j["count_center"] = to_json(r.count_center);
  j["count_lower"] = to_json(r.count_lower);
  j["count_upper"] = to_json(r.count_upper);
  j["count_lower_unclamped"] = to_json(r.count_lower_unclamped);
  j["lower_clamped"] = r.lower_clamped;
  j["mean_count_lower"] = to_json(r.mean_count_lower);
  j["mean_count_upper"] = to_json(r.mean_count_upper);
  j["d2_pair_multiplicity"] = optional_scalar(r.d2_pair_multiplicity);
  j["d2_terms"] = scalars(r.d2_terms);
  j["small_n_exact_counts"] = r.small_n_exact_counts;
  j["notes"] = r.notes;
  return j;
}

UniformBoundsReport uniform_report_from_json(const Json& j) {
  return guarded([&] {
    UniformBoundsReport r;
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.n = j.at("n").get<long>();
    r.j = j.at("j").get<int>();
    if (!j.at("pattern").is_null()) r.pattern = j.at("pattern").get<std::string>();
    r.d2_method = parse_d2_method(j.at("d2_method").get<std::string>());
    r.lambda = big_scalar_from_json(j.at("lambda"));
    r.mean = big_scalar_from_json(j.at("mean"));
    r.d1 = big_scalar_from_json(j.at("d1"));
    r.d2 = big_scalar_from_json(j.at("d2"));
    r.D = big_scalar_from_json(j.at("D"));
    r.tv_count_bound = big_scalar_from_json(j.at("tv_count_bound"));
    r.tv_process_bound = big_scalar_from_json(j.at("tv_process_bound"));
    r.factorial_n = big_scalar_from_json(j.at("factorial_n"));
    r.count_center = big_scalar_from_json(j.at("count_center"));
    r.count_lower = big_scalar_from_json(j.at("count_lower"));
    r.count_upper = big_scalar_from_json(j.at("count_upper"));
    r.count_lower_unclamped = big_scalar_from_json(j.at("count_lower_unclamped"));
    r.lower_clamped = j.at("lower_clamped").get<bool>();
    r.mean_count_lower = big_scalar_from_json(j.at("mean_count_lower"));
    r.mean_count_upper = big_scalar_from_json(j.at("mean_count_upper"));
    r.d2_pair_multiplicity = optional_scalar_from(j.at("d2_pair_multiplicity"));
    r.d2_terms = scalars_from(j.at("d2_terms"));
    r.small_n_exact_counts = j.at("small_n_exact_counts").get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  });
}

Json to_json(const MallowsBoundsReport& r) {
  Json j;
  j["kind"] = "mallows_bounds";
  j["n"] = r.n;
  j["m"] = r.m;
  j["q"] = to_json(r.q);
  j["pattern"] = r.pattern;
  j["convention"] = std::string(to_string(r.convention));
  j["lambda"] = to_json(r.lambda);
  j["mean"] = to_json(r.mean);
  j["b1"] = to_json(r.b1);
  j["b2"] = to_json(r.b2);
  j["b3"] = to_json(r.b3);
  j["b1_n1"] = to_json(r.b1_n1);
  j["b1_boundary"] = to_json(r.b1_boundary);
  j["b1_corrected"] = optional_scalar(r.b1_corrected);
  j["b2_terms"] = scalars(r.b2_terms);
  j["tv_count_bound"] = to_json(r.tv_count_bound);
  j["avoid_prob_center"] = to_json(r.avoid_prob_center);
  j["avoid_prob_lower"] = to_json(r.avoid_prob_lower);
  j["avoid_prob_upper"] = to_json(r.avoid_prob_upper);
  j["small_n_exact_counts"] = r.small_n_exact_counts;
  j["notes"] = r.notes;
  return j;
}

MallowsBoundsReport mallows_report_from_json(const Json& j) {
  return guarded([&] {
    MallowsBoundsReport r;
    r.n = j.at("n").get<long>();
    r.m = j.at("m").get<int>();
    r.q = big_scalar_from_json(j.at("q"));
    r.pattern = j.at("pattern").get<std::string>();
    r.convention = parse_count_convention(j.at("convention").get<std::string>());
    r.lambda = big_scalar_from_json(j.at("lambda"));
    r.mean = big_scalar_from_json(j.at("mean"));
    r.b1 = big_scalar_from_json(j.at("b1"));
    r.b2 = big_scalar_from_json(j.at("b2"));
    r.b3 = big_scalar_from_json(j.at("b3"));
    r.b1_n1 = big_scalar_from_json(j.at("b1_n1"));
    r.b1_boundary = big_scalar_from_json(j.at("b1_boundary"));
    r.b1_corrected = optional_scalar_from(j.at("b1_corrected"));
    r.b2_terms = scalars_from(j.at("b2_terms"));
    r.tv_count_bound = big_scalar_from_json(j.at("tv_count_bound"));
    r.avoid_prob_center = big_scalar_from_json(j.at("avoid_prob_center"));
    r.avoid_prob_lower = big_scalar_from_json(j.at("avoid_prob_lower"));
    r.avoid_prob_upper = big_scalar_from_json(j.at("avoid_prob_upper"));
    r.small_n_exact_counts = j.at("small_n_exact_counts").get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  });
}

Json to_json(const FixedPointBound& r) {
  Json j;
  j["kind"] = "fixed_point_bound";
  j["tv_bound"] = to_json(r.tv_bound);
  j["lower"] = to_json(r.lower);
  j["upper"] = to_json(r.upper);
  j["derangements"] = r.derangements.str();
  return j;
}

FixedPointBound fixed_point_bound_from_json(const Json& j) {
  return guarded([&] {
    FixedPointBound r;
    r.tv_bound = big_scalar_from_json(j.at("tv_bound"));
    r.lower = big_scalar_from_json(j.at("lower"));
    r.upper = big_scalar_from_json(j.at("upper"));
    r.derangements = Integer(j.at("derangements").get<std::string>());
    return r;
  });
}

Json to_json(const OverlapTable& t) {
  Json j;
  j["kind"] = "overlap_table";
  j["pattern"] = t.tau.perm().to_string();
  j["s"] = t.s;
  j["mode"] = std::string(to_string(t.mode));
  j["count"] = t.witnesses.size();
  j["pair_multiplicity"] = t.pair_multiplicity;
  j["polynomial"] = inversion_polynomial(t).to_string();
  Json w = Json::array();
  for (const auto& x : t.witnesses) w.push_back(Json{{"perm", x.perm.to_string()}, {"inv", x.inv_count}});
  j["witnesses"] = std::move(w);
  return j;
}

OverlapTable overlap_table_from_json(const Json& j) {
  return guarded([&] {
    OverlapTable t{Pattern::parse(j.at("pattern").get<std::string>()), j.at("s").get<int>(),
                   parse_overlap_mode(j.at("mode").get<std::string>()), {}, j.at("pair_multiplicity").get<std::uint64_t>()};
    for (const auto& w : j.at("witnesses"))
      t.witnesses.push_back({Permutation::parse(w.at("perm").get<std::string>()), w.at("inv").get<int>()});
    if (t.witnesses.size() != j.at("count").get<std::size_t>()) throw InvalidInput("witness count mismatch");
    return t;
  });
}

Json to_json(const OccurrenceDistribution& d) {
  Json j;
  j["kind"] = "occurrence_distribution";
  j["n"] = d.n;
  j["pattern"] = d.pattern;
  j["mode"] = std::string(to_string(d.mode));
  j["measure"] = d.measure.to_string();
  j["q"] = rational_to_string(d.measure.q);
  j["exact"] = d.exact;
  if (d.exact) {
    Json p = Json::array();
    for (const auto& x : d.pmf_exact) p.push_back(rational_to_string(x));
    j["pmf_exact"] = std::move(p);
  } else {
    j["samples"] = d.samples;
    j["seed"] = d.seed;
    j["stderr"] = d.stderr_;
  }
  j["pmf"] = d.pmf;
  return j;
}

OccurrenceDistribution distribution_from_json(const Json& j) {
  return guarded([&] {
    OccurrenceDistribution d;
    d.n = j.at("n").get<long>();
    d.pattern = j.at("pattern").get<std::string>();
    d.mode = parse_mode(j.at("mode").get<std::string>());
    d.measure.q = parse_rational(j.at("q").get<std::string>());
    d.exact = j.at("exact").get<bool>();
    if (d.exact) {
      for (const auto& x : j.at("pmf_exact")) d.pmf_exact.push_back(parse_rational(x.get<std::string>()));
    } else {
      d.samples = j.at("samples").get<std::uint64_t>();
      d.seed = j.at("seed").get<std::uint64_t>();
      d.stderr_ = j.at("stderr").get<std::vector<double>>();
    }
    d.pmf = j.at("pmf").get<std::vector<double>>();
    return d;
  });
}

Json to_json(const TVReport& r) {
  Json j;
  j["exact_tv"] = to_json(r.exact_tv);
  j["bound"] = to_json(r.bound);
  j["slack"] = to_json(r.slack);
  j["tail_truncation"] = to_json(r.tail_truncation);
  j["ok"] = r.ok();
  return j;
}

TVReport tv_report_from_json(const Json& j) {
  return guarded([&] {
    TVReport r;
    r.exact_tv = real_from_json(j.at("exact_tv"));
    r.bound = big_scalar_from_json(j.at("bound"));
    r.slack = real_from_json(j.at("slack"));
    r.tail_truncation = real_from_json(j.at("tail_truncation"));
    return r;
  });
}

Json to_json(const CertificationResult& c) {
  Json j;
  j["kind"] = "certification";
  j["n"] = c.n;
  j["pattern"] = c.pattern;
  j["q"] = rational_to_string(c.q);
  j["tv"] = to_json(c.tv);
  j["tv_literal"] = to_json(c.tv_literal);
  j["interval_checked"] = c.interval_checked;
  j["interval_ok"] = c.interval_ok;
  j["literal_interval_ok"] = c.literal_interval_ok;
  j["avoiders"] = c.avoiders.str();
  j["lower"] = to_json(c.lower);
  j["upper"] = to_json(c.upper);
  return j;
}

CertificationResult certification_from_json(const Json& j) {
  return guarded([&] {
    CertificationResult c;
    c.n = j.at("n").get<int>();
    c.pattern = j.at("pattern").get<std::string>();
    c.q = parse_rational(j.at("q").get<std::string>());
    c.tv = tv_report_from_json(j.at("tv"));
    c.tv_literal = tv_report_from_json(j.at("tv_literal"));
    c.interval_checked = j.at("interval_checked").get<bool>();
    c.interval_ok = j.at("interval_ok").get<bool>();
    c.literal_interval_ok = j.at("literal_interval_ok").get<bool>();
    c.avoiders = Integer(j.at("avoiders").get<std::string>());
    c.lower = big_scalar_from_json(j.at("lower"));
    c.upper = big_scalar_from_json(j.at("upper"));
    return c;
  });
}

Json to_json(const StatTest& t) {
  Json j;
  j["kind"] = "stat_test";
  j["name"] = t.name;
  j["statistic"] = t.result.statistic;
  j["df"] = t.result.df;
  j["p_value"] = t.result.p_value;
  j["pooled_bins"] = t.result.pooled_bins;
  j["informational"] = t.informational;
  j["retried"] = t.retried;
  j["passed"] = t.passed;
  return j;
}

StatTest stat_test_from_json(const Json& j) {
  return guarded([&] {
    StatTest t;
    t.name = j.at("name").get<std::string>();
    t.result.statistic = j.at("statistic").get<double>();
    t.result.df = j.at("df").get<int>();
    t.result.p_value = j.at("p_value").get<double>();
    t.result.pooled_bins = j.at("pooled_bins").get<int>();
    t.informational = j.at("informational").get<bool>();
    t.retried = j.at("retried").get<bool>();
    t.passed = j.at("passed").get<bool>();
    return t;
  });
}

}  // namespace patpoisson
