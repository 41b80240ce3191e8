#include "patpoisson/overlap.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

using json = nlohmann::json;

void check_s(const Pattern& tau, int s) {
  if (s < 1 || s > tau.size() - 1)
    throw InvalidInput("overlap size s=" + std::to_string(s) + " outside 1.." + std::to_string(tau.size() - 1));
}

// Depth-first construction of sequences in S_N whose first m and last m
// entries reduce to tau, restricted to a fixed first value.
class SequentialSearch {
 public:
  SequentialSearch(const Pattern& tau, int s) : tau_(tau), m_(tau.size()), n_(2 * tau.size() - s), off_(tau.size() - s) {
    seq_.resize(static_cast<std::size_t>(n_));
  }

  std::vector<OverlapWitness> run(int first_value) {
    out_.clear();
    used_ = 0;
    if (accept(0, first_value)) {
      place(0, first_value);
      extend(1);
    }
    return std::move(out_);
  }

 private:
  bool window_ok(int p, int v, int base) const {
    const int d = p - base;
    const int lo = tau_.lower_neighbor(d);
    const int hi = tau_.upper_neighbor(d);
    if (lo >= 0 && v < seq_[static_cast<std::size_t>(base + lo)]) return false;
    if (hi >= 0 && v > seq_[static_cast<std::size_t>(base + hi)]) return false;
    return true;
  }

  bool accept(int p, int v) const {
    if (p < m_ && !window_ok(p, v, 0)) return false;
    if (p >= off_ && !window_ok(p, v, off_)) return false;
    return true;
  }

  void place(int p, int v) {
    seq_[static_cast<std::size_t>(p)] = v;
    used_ |= 1u << v;
  }

  void extend(int p) {
    if (p == n_) {
      std::vector<int> values(seq_.begin(), seq_.end());
      const int inv = static_cast<int>(inversion_count(values));
      out_.push_back(OverlapWitness{Permutation(std::move(values)), inv});
      return;
    }
    for (int v = 1; v <= n_; ++v) {
      if (used_ & (1u << v)) continue;
      if (!accept(p, v)) continue;
      place(p, v);
      extend(p + 1);
      used_ &= ~(1u << v);
    }
  }

  const Pattern& tau_;
  int m_, n_, off_;
  std::vector<int> seq_;
  std::uint32_t used_ = 0;
  std::vector<OverlapWitness> out_;
};

std::optional<OverlapTable> try_cache(const Pattern& tau, int s, OverlapMode mode, const OverlapOptions& options) {
  if (!options.cache_dir) return std::nullopt;
  auto table = load_overlap_table(*options.cache_dir / overlap_cache_name(tau, s, mode));
  if (table && table->tau == tau && table->s == s && table->mode == mode) return table;
  return std::nullopt;
}

void store_cache(const OverlapTable& table, const OverlapOptions& options) {
  if (!options.cache_dir) return;
  std::filesystem::create_directories(*options.cache_dir);
  save_overlap_table(table, *options.cache_dir / overlap_cache_name(table.tau, table.s, table.mode));
}

}  // namespace

std::string_view to_string(OverlapMode mode) { return mode == OverlapMode::sequential ? "sequential" : "classical"; }

OverlapTable sequential_overlap(const Pattern& tau, int s, const OverlapOptions& options) {
  check_s(tau, s);
  if (auto cached = try_cache(tau, s, OverlapMode::sequential, options)) return *cached;
  if (tau.size() > options.max_m)
    throw ResourceLimit("sequential overlap for m=" + std::to_string(tau.size()) + " exceeds guard m<=" +
                        std::to_string(options.max_m));

  const int n = 2 * tau.size() - s;
  const int workers = std::clamp(options.workers, 1, n);
  std::vector<std::vector<OverlapWitness>> by_first(static_cast<std::size_t>(n) + 1);
  auto work = [&](int w) {
    SequentialSearch search(tau, s);
    for (int v = 1 + w; v <= n; v += workers) by_first[static_cast<std::size_t>(v)] = search.run(v);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  OverlapTable table{tau, s, OverlapMode::sequential, {}, 0};
  for (auto& part : by_first)
    for (auto& w : part) table.witnesses.push_back(std::move(w));
  store_cache(table, options);
  return table;
}

std::vector<OverlapTable> sequential_overlap_all(const Pattern& tau, const OverlapOptions& options) {
  std::vector<OverlapTable> out;
  for (int s = 1; s <= tau.size() - 1; ++s) out.push_back(sequential_overlap(tau, s, options));
  return out;
}

OverlapTable classical_overlap(const Pattern& tau, int s, const OverlapOptions& options) {
  check_s(tau, s);
  if (auto cached = try_cache(tau, s, OverlapMode::classical, options)) return *cached;
  const int m = tau.size();
  const int n = 2 * m - s;
  if (n > options.max_classical_length)
    throw ResourceLimit("classical overlap enumerates S_" + std::to_string(n) + ", above guard " +
                        std::to_string(options.max_classical_length));

  OverlapTable table{tau, s, OverlapMode::classical, {}, 0};
  std::vector<int> sigma(static_cast<std::size_t>(n));
  std::iota(sigma.begin(), sigma.end(), 1);
  std::vector<std::uint32_t> masks;
  std::vector<int> window(static_cast<std::size_t>(m));
  do {
    masks.clear();
    // Occurrences as position bitmasks.
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      for (int k = 0; k < m; ++k) window[static_cast<std::size_t>(k)] = sigma[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      if (tau.matches(window)) {
        std::uint32_t mask = 0;
        for (int i : idx) mask |= 1u << i;
        masks.push_back(mask);
      }
      int k = m - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - m + k) --k;
      if (k < 0) break;
      ++idx[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    std::uint64_t pairs = 0;
    for (std::size_t a = 0; a < masks.size(); ++a)
      for (std::size_t b = a + 1; b < masks.size(); ++b)
        if (std::popcount(masks[a] & masks[b]) == s) ++pairs;
    if (pairs > 0) {
      table.witnesses.push_back(OverlapWitness{Permutation(sigma), static_cast<int>(inversion_count(sigma))});
      table.pair_multiplicity += pairs;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  store_cache(table, options);
  return table;
}

InversionPolynomial::InversionPolynomial(std::map<int, std::uint64_t> coefficients) {
  for (auto [k, c] : coefficients)
    if (c != 0) coeffs_[k] = c;
}

std::uint64_t InversionPolynomial::coefficient(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? 0 : it->second;
}

std::uint64_t InversionPolynomial::total() const {
  std::uint64_t t = 0;
  for (auto [k, c] : coeffs_) t += c;
  return t;
}

Rational InversionPolynomial::evaluate(const Rational& q) const {
  Rational out = 0;
  for (auto [k, c] : coeffs_) {
    Rational term = 1;
    for (int i = 0; i < k; ++i) term *= q;
    out += term * Rational(c);
  }
  return out;
}

BigScalar InversionPolynomial::evaluate(const BigScalar& q) const {
  BigScalar out;
  for (auto [k, c] : coeffs_) out += pow(q, k) * BigScalar(Rational(c));
  return out;
}

std::string InversionPolynomial::to_string() const {
  if (coeffs_.empty()) return "0";
  auto monomial = [](int k) -> std::string {
    if (k == 0) return "";
    if (k == 1) return "q";
    return "q^" + std::to_string(k);
  };
  const int low = coeffs_.begin()->first;
  std::string inner;
  for (auto [k, c] : coeffs_) {
    const int d = k - low;
    if (!inner.empty()) inner += "+";
    std::string mono = monomial(d);
    if (c != 1 || mono.empty()) inner += std::to_string(c);
    inner += mono;
  }
  const bool single = coeffs_.size() == 1;
  std::string prefix = monomial(low);
  if (single) {
    if (prefix.empty()) return inner;
    return inner == "1" ? prefix : inner + prefix;
  }
  return prefix.empty() ? inner : prefix + "(" + inner + ")";
}

InversionPolynomial inversion_polynomial(const OverlapTable& table) {
  std::map<int, std::uint64_t> c;
  for (const auto& w : table.witnesses) ++c[w.inv_count];
  return InversionPolynomial(std::move(c));
}

std::string overlap_cache_name(const Pattern& tau, int s, OverlapMode mode) {
  std::string key = tau.to_string();
  std::replace(key.begin(), key.end(), ',', '-');
  return std::string(to_string(mode)) + "_" + key + "_s" + std::to_string(s) + ".json";
}

std::optional<OverlapTable> load_overlap_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    json doc = json::parse(in);
    Pattern tau = Pattern::parse(doc.at("tau").get<std::string>());
    const std::string mode = doc.at("mode").get<std::string>();
    OverlapTable table{tau, doc.at("s").get<int>(),
                       mode == "classical" ? OverlapMode::classical : OverlapMode::sequential, {},
                       doc.value("pair_multiplicity", std::uint64_t{0})};
    for (const auto& w : doc.at("witnesses")) {
      Permutation p = Permutation::parse(w.at("perm").get<std::string>());
      const int inv = w.at("inv").get<int>();
      if (inv != inversion_count(p.values())) return std::nullopt;
      if (p.size() != 2 * tau.size() - table.s) return std::nullopt;
      if (table.mode == OverlapMode::sequential) {
        const auto m = static_cast<std::size_t>(tau.size());
        if (!tau.matches(p.values().first(m)) || !tau.matches(p.values().last(m))) return std::nullopt;
      }
      table.witnesses.push_back(OverlapWitness{std::move(p), inv});
    }
    return table;
  } catch (const std::exception&) {
    // A corrupt cache entry is recomputed.
    return std::nullopt;
  }
}

void save_overlap_table(const OverlapTable& table, const std::filesystem::path& file) {
  json doc;
  doc["tau"] = table.tau.to_string();
  doc["s"] = table.s;
  doc["mode"] = std::string(to_string(table.mode));
  doc["pair_multiplicity"] = table.pair_multiplicity;
  doc["witnesses"] = json::array();
  for (const auto& w : table.witnesses) doc["witnesses"].push_back({{"perm", w.perm.to_string()}, {"inv", w.inv_count}});
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write overlap cache " + file.string());
  out << doc.dump(1) << '\n';
}

}  // namespace patpoisson
