#pragma once

// Permutations of [n] and single-pattern occurrence machinery.
//
// Positions and values are 1-based throughout. A permutation of length n
// stores the values sigma_1 ... sigma_n; `at(i)` returns sigma_i.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace patpoisson {

class Permutation {
 public:
  // Throws InvalidInput unless `values` is a bijection of {1, ..., n}, n >= 1.
  explicit Permutation(std::vector<int> values);

  static Permutation identity(int n);

  // Accepts the digit-string form ("251463", n <= 9) and the comma-separated
  // form ("10,2,1,..."); whitespace-separated tokens are also accepted.
  static Permutation parse(std::string_view text);

  int size() const { return static_cast<int>(values_.size()); }
  int at(int position) const { return values_[static_cast<std::size_t>(position - 1)]; }
  std::span<const int> values() const { return values_; }

  // Digit string when n <= 9, comma-separated otherwise.
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  struct Unchecked {};
  Permutation(std::vector<int> values, Unchecked) : values_(std::move(values)) {}
  friend Permutation reduce(std::span<const int> word);
  friend Permutation reverse(const Permutation& p);

  std::vector<int> values_;
};

// A permutation used as a pattern; caches its inversion count and the
// positions of its values in increasing order, which makes order-isomorphism
// tests O(m).
class Pattern {
 public:
  explicit Pattern(Permutation perm);
  static Pattern parse(std::string_view text) { return Pattern(Permutation::parse(text)); }

  const Permutation& perm() const { return perm_; }
  int size() const { return perm_.size(); }
  int inversion_count() const { return inv_count_; }
  std::span<const int> values() const { return perm_.values(); }
  std::string to_string() const { return perm_.to_string(); }

  // 0-based offsets of the values 1, 2, ..., m inside the pattern.
  std::span<const int> value_positions() const { return value_positions_; }

  // True iff `window` (length m, distinct entries) is order-isomorphic to
  // this pattern.
  bool matches(std::span<const int> window) const;

  // For prefix pruning: offset d' < d of the nearest smaller (larger) pattern
  // value among the first d entries, or -1.
  int lower_neighbor(int d) const { return lower_neighbor_[static_cast<std::size_t>(d)]; }
  int upper_neighbor(int d) const { return upper_neighbor_[static_cast<std::size_t>(d)]; }

  friend bool operator==(const Pattern& a, const Pattern& b) { return a.perm_ == b.perm_; }

 private:
  Permutation perm_;
  int inv_count_ = 0;
  std::vector<int> value_positions_;
  std::vector<int> lower_neighbor_;
  std::vector<int> upper_neighbor_;
};

// Strictly increasing, nonempty list of 1-based positions.
struct IndexSet {
  std::vector<int> indices;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  friend auto operator<=>(const IndexSet&, const IndexSet&) = default;
};

enum class Mode { classical, consecutive };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct Inversions {
  std::int64_t count = 0;
  std::vector<std::pair<int, int>> pairs;  // (i, j), i < j, sigma_i > sigma_j
};

// Rank transform of a word of distinct positive integers.
Permutation reduce(std::span<const int> word);

// Parses a whitespace- or comma-separated word of positive integers; a single
// token without separators is read digit by digit.
std::vector<int> parse_word(std::string_view text);

Inversions inversions(const Permutation& p);

// O(n log n) inversion count, usable on any sequence of distinct integers.
std::int64_t inversion_count(std::span<const int> values);

Permutation reverse(const Permutation& p);

// Subsequence of p made of exactly the values in `values` (in p's order).
std::vector<int> restrict_to_values(const Permutation& p, std::span<const int> values);

struct ClassicalOccurrences {
  std::int64_t count = 0;
  std::vector<IndexSet> witnesses;  // lexicographic order
};

struct ConsecutiveOccurrences {
  std::int64_t count = 0;
  std::vector<int> starts;  // increasing
};

ClassicalOccurrences occurrences_classical(const Permutation& p, const Pattern& tau);
ConsecutiveOccurrences occurrences_consecutive(const Permutation& p, const Pattern& tau);

// Allocation-free kernels used by the enumeration oracles. `values` need not
// be validated; they must hold distinct integers.
std::int64_t count_classical(std::span<const int> values, const Pattern& tau);
bool contains_classical(std::span<const int> values, const Pattern& tau);
std::int64_t count_consecutive(std::span<const int> values, const Pattern& tau);

// The vector of occurrence indicators X_alpha over all alpha (classical: every
// m-subset of positions, lexicographic; consecutive: every window).
class IndicatorVector {
 public:
  IndicatorVector(Mode mode, std::vector<IndexSet> index_sets, std::vector<std::uint8_t> bits);

  Mode mode() const { return mode_; }
  std::size_t size() const { return bits_.size(); }
  const std::vector<IndexSet>& index_sets() const { return index_sets_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::int64_t sum() const;

 private:
  Mode mode_;
  std::vector<IndexSet> index_sets_;
  std::vector<std::uint8_t> bits_;
};

inline constexpr std::size_t kDefaultIndicatorGuard = 1'000'000;

// Throws ResourceLimit when the vector would exceed `guard` entries.
IndicatorVector indicator_vector(const Permutation& p, const Pattern& tau, Mode mode,
                                 std::size_t guard = kDefaultIndicatorGuard);

// C(n, k) when it fits in 64 bits, otherwise UINT64_MAX.
std::uint64_t binomial_saturating(int n, int k);

}  // namespace patpoisson
