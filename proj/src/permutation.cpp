#include "patpoisson/permutation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <numeric>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

bool is_separator(char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void validate_bijection(const std::vector<int>& values) {
  const auto n = values.size();
  if (n == 0) throw InvalidInput("permutation must be nonempty");
  std::vector<char> seen(n + 1, 0);
  for (int v : values) {
    if (v < 1 || static_cast<std::size_t>(v) > n)
      throw InvalidInput("value " + std::to_string(v) + " out of range 1.." + std::to_string(n));
    if (seen[static_cast<std::size_t>(v)])
      throw InvalidInput("value " + std::to_string(v) + " repeated");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

// Fenwick tree over 1..n counting inserted values.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  std::int64_t prefix(std::size_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

template <typename Visit>
void classical_dfs(std::span<const int> values, const Pattern& tau, Visit&& visit) {
  const int n = static_cast<int>(values.size());
  const int m = tau.size();
  if (m > n) return;
  std::vector<int> pos(static_cast<std::size_t>(m));
  std::vector<int> val(static_cast<std::size_t>(m));
  // Explicit stack: next candidate index per depth.
  std::vector<int> next(static_cast<std::size_t>(m) + 1);
  int d = 0;
  next[0] = 0;
  while (d >= 0) {
    const auto du = static_cast<std::size_t>(d);
    const int last = n - (m - d);
    bool advanced = false;
    while (next[du] <= last) {
      const int i = next[du]++;
      const int v = values[static_cast<std::size_t>(i)];
      const int lo = tau.lower_neighbor(d);
      const int hi = tau.upper_neighbor(d);
      if (lo >= 0 && v < val[static_cast<std::size_t>(lo)]) continue;
      if (hi >= 0 && v > val[static_cast<std::size_t>(hi)]) continue;
      pos[du] = i;
      val[du] = v;
      if (d + 1 == m) {
        if (!visit(std::span<const int>(pos))) return;
        continue;
      }
      next[du + 1] = i + 1;
      ++d;
      advanced = true;
      break;
    }
    if (!advanced) --d;
  }
}

}  // namespace

Permutation::Permutation(std::vector<int> values) : values_(std::move(values)) {
  validate_bijection(values_);
}

Permutation Permutation::identity(int n) {
  if (n < 1) throw InvalidInput("permutation length must be >= 1");
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  return Permutation(std::move(v), Unchecked{});
}

Permutation Permutation::parse(std::string_view text) { return Permutation(parse_word(text)); }

std::string Permutation::to_string() const {
  std::string out;
  const bool digits = values_.size() <= 9;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!digits && i > 0) out.push_back(',');
    out += std::to_string(values_[i]);
  }
  return out;
}

std::vector<int> parse_word(std::string_view text) {
  while (!text.empty() && is_separator(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_separator(text.back())) text.remove_suffix(1);
  if (text.empty()) throw InvalidInput("empty word");

  std::vector<int> out;
  const bool tokenized = std::any_of(text.begin(), text.end(), is_separator);
  if (!tokenized) {
    for (char c : text) {
      if (c < '0' || c > '9') throw InvalidInput(std::string("unexpected character '") + c + "'");
      out.push_back(c - '0');
    }
  } else {
    std::size_t i = 0;
    while (i < text.size()) {
      if (is_separator(text[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && !is_separator(text[j])) ++j;
      int v = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + j, v);
      if (ec != std::errc() || ptr != text.data() + j)
        throw InvalidInput("bad token '" + std::string(text.substr(i, j - i)) + "'");
      out.push_back(v);
      i = j;
    }
  }
  for (int v : out)
    if (v < 1) throw InvalidInput("entries must be positive integers");
  return out;
}

Pattern::Pattern(Permutation perm) : perm_(std::move(perm)) {
  const int m = perm_.size();
  inv_count_ = static_cast<int>(patpoisson::inversion_count(perm_.values()));
  value_positions_.assign(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) value_positions_[static_cast<std::size_t>(perm_.at(i + 1) - 1)] = i;
  lower_neighbor_.assign(static_cast<std::size_t>(m), -1);
  upper_neighbor_.assign(static_cast<std::size_t>(m), -1);
  for (int d = 0; d < m; ++d) {
    const int v = perm_.at(d + 1);
    int lo_val = 0, hi_val = m + 1;
    for (int e = 0; e < d; ++e) {
      const int w = perm_.at(e + 1);
      if (w < v && w > lo_val) {
        lo_val = w;
        lower_neighbor_[static_cast<std::size_t>(d)] = e;
      }
      if (w > v && w < hi_val) {
        hi_val = w;
        upper_neighbor_[static_cast<std::size_t>(d)] = e;
      }
    }
  }
}

bool Pattern::matches(std::span<const int> window) const {
  const auto m = value_positions_.size();
  if (window.size() != m) return false;
  for (std::size_t k = 1; k < m; ++k) {
    if (window[static_cast<std::size_t>(value_positions_[k - 1])] >
        window[static_cast<std::size_t>(value_positions_[k])])
      return false;
  }
  return true;
}

std::string_view to_string(Mode mode) {
  return mode == Mode::classical ? "classical" : "consecutive";
}

Mode parse_mode(std::string_view text) {
  if (text == "classical") return Mode::classical;
  if (text == "consecutive") return Mode::consecutive;
  throw InvalidInput("mode must be 'classical' or 'consecutive'");
}

Permutation reduce(std::span<const int> word) {
  if (word.empty()) throw InvalidInput("cannot reduce an empty word");
  std::vector<int> order(word.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return word[static_cast<std::size_t>(a)] < word[static_cast<std::size_t>(b)];
  });
  std::vector<int> out(word.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r > 0 && word[static_cast<std::size_t>(order[r])] == word[static_cast<std::size_t>(order[r - 1])])
      throw InvalidInput("word entries must be distinct");
    out[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
  }
  return Permutation(std::move(out), Permutation::Unchecked{});
}

Inversions inversions(const Permutation& p) {
  Inversions out;
  const int n = p.size();
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (p.at(i) > p.at(j)) out.pairs.emplace_back(i, j);
  out.count = static_cast<std::int64_t>(out.pairs.size());
  return out;
}

std::int64_t inversion_count(std::span<const int> values) {
  if (values.empty()) return 0;
  // Compress to ranks so arbitrary distinct integers are accepted.
  std::vector<int> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Fenwick fw(values.size());
  std::int64_t inv = 0;
  std::int64_t seen = 0;
  for (int v : values) {
    const auto rank = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin()) + 1;
    inv += seen - fw.prefix(rank);
    fw.add(rank);
    ++seen;
  }
  return inv;
}

Permutation reverse(const Permutation& p) {
  std::vector<int> v(p.values().rbegin(), p.values().rend());
  return Permutation(std::move(v), Permutation::Unchecked{});
}

std::vector<int> restrict_to_values(const Permutation& p, std::span<const int> values) {
  std::vector<char> keep(static_cast<std::size_t>(p.size()) + 1, 0);
  for (int v : values) {
    if (v < 1 || v > p.size()) throw InvalidInput("restriction value out of range");
    keep[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<int> out;
  for (int v : p.values())
    if (keep[static_cast<std::size_t>(v)]) out.push_back(v);
  return out;
}

ClassicalOccurrences occurrences_classical(const Permutation& p, const Pattern& tau) {
  ClassicalOccurrences out;
  classical_dfs(p.values(), tau, [&](std::span<const int> pos) {
    IndexSet s;
    s.indices.reserve(pos.size());
    for (int i : pos) s.indices.push_back(i + 1);
    out.witnesses.push_back(std::move(s));
    return true;
  });
  out.count = static_cast<std::int64_t>(out.witnesses.size());
  return out;
}

ConsecutiveOccurrences occurrences_consecutive(const Permutation& p, const Pattern& tau) {
  ConsecutiveOccurrences out;
  const int n = p.size();
  const int m = tau.size();
  for (int i = 0; i + m <= n; ++i)
    if (tau.matches(p.values().subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(m))))
      out.starts.push_back(i + 1);
  out.count = static_cast<std::int64_t>(out.starts.size());
  return out;
}

std::int64_t count_classical(std::span<const int> values, const Pattern& tau) {
  std::int64_t c = 0;
  classical_dfs(values, tau, [&](std::span<const int>) {
    ++c;
    return true;
  });
  return c;
}

bool contains_classical(std::span<const int> values, const Pattern& tau) {
  bool found = false;
  classical_dfs(values, tau, [&](std::span<const int>) {
    found = true;
    return false;
  });
  return found;
}

std::int64_t count_consecutive(std::span<const int> values, const Pattern& tau) {
  const auto m = static_cast<std::size_t>(tau.size());
  std::int64_t c = 0;
  for (std::size_t i = 0; i + m <= values.size(); ++i)
    if (tau.matches(values.subspan(i, m))) ++c;
  return c;
}

IndicatorVector::IndicatorVector(Mode mode, std::vector<IndexSet> index_sets, std::vector<std::uint8_t> bits)
    : mode_(mode), index_sets_(std::move(index_sets)), bits_(std::move(bits)) {
  if (index_sets_.size() != bits_.size()) throw InvalidInput("indicator vector size mismatch");
}

std::int64_t IndicatorVector::sum() const {
  return std::accumulate(bits_.begin(), bits_.end(), std::int64_t{0});
}

std::uint64_t binomial_saturating(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

IndicatorVector indicator_vector(const Permutation& p, const Pattern& tau, Mode mode, std::size_t guard) {
  const int n = p.size();
  const int m = tau.size();
  std::vector<IndexSet> sets;
  std::vector<std::uint8_t> bits;
  if (m > n) return IndicatorVector(mode, {}, {});

  if (mode == Mode::consecutive) {
    const auto count = static_cast<std::size_t>(n - m + 1);
    if (count > guard) throw ResourceLimit("indicator vector has " + std::to_string(count) + " entries");
    for (int i = 1; i + m - 1 <= n; ++i) {
      IndexSet s;
      for (int k = 0; k < m; ++k) s.indices.push_back(i + k);
      bits.push_back(tau.matches(p.values().subspan(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(m))));
      sets.push_back(std::move(s));
    }
    return IndicatorVector(mode, std::move(sets), std::move(bits));
  }

  const std::uint64_t count = binomial_saturating(n, m);
  if (count > guard) throw ResourceLimit("indicator vector would have C(" + std::to_string(n) + "," +
                                         std::to_string(m) + ") entries");
  std::vector<int> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 1);
  std::vector<int> window(static_cast<std::size_t>(m));
  while (true) {
    for (std::size_t k = 0; k < idx.size(); ++k) window[k] = p.at(idx[k]);
    bits.push_back(tau.matches(window));
    sets.push_back(IndexSet{idx});
    int k = m - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - m + k + 1) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return IndicatorVector(mode, std::move(sets), std::move(bits));
}

}  // namespace patpoisson
