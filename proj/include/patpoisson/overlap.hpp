#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patpoisson/permutation.hpp"
#include "patpoisson/scalar.hpp"

namespace patpoisson {

enum class OverlapMode { sequential, classical };

std::string_view to_string(OverlapMode mode);

struct OverlapWitness {
  Permutation perm;
  int inv_count = 0;
};

struct OverlapTable {
  Pattern tau;
  int s = 0;
  OverlapMode mode = OverlapMode::sequential;
  std::vector<OverlapWitness> witnesses;  // lexicographic by permutation
  // Classical mode only: number of unordered index-set pairs {alpha, beta}
  // with |alpha ∩ beta| = s, summed over all witnesses.
  std::uint64_t pair_multiplicity = 0;

  std::size_t size() const { return witnesses.size(); }
};

struct OverlapOptions {
  int max_m = 6;  // sequential guard on the pattern length
  int max_classical_length = 9;  // classical guard on 2m - s
  int workers = 1;
  // When set, tables are read from and written to this directory.
  std::optional<std::filesystem::path> cache_dir;
};

// All sigma in S_{2m-s} whose first m and last m entries both reduce to tau.
OverlapTable sequential_overlap(const Pattern& tau, int s, const OverlapOptions& options = {});

// One table per s = 1, ..., m-1 (empty tables included).
std::vector<OverlapTable> sequential_overlap_all(const Pattern& tau, const OverlapOptions& options = {});

// All sigma in S_{2m-s} with index sets alpha, beta, |alpha ∩ beta| = s,
// both reducing to tau. Each permutation is listed once.
OverlapTable classical_overlap(const Pattern& tau, int s, const OverlapOptions& options = {});

class InversionPolynomial {
 public:
  InversionPolynomial() = default;
  explicit InversionPolynomial(std::map<int, std::uint64_t> coefficients);

  const std::map<int, std::uint64_t>& coefficients() const { return coeffs_; }
  std::uint64_t coefficient(int k) const;
  std::uint64_t total() const;  // value at q = 1
  bool is_zero() const { return coeffs_.empty(); }

  Rational evaluate(const Rational& q) const;
  BigScalar evaluate(const BigScalar& q) const;

  // Factored display such as "q^9(1+q+2q^2+2q^3+2q^4+q^5+q^6)".
  std::string to_string() const;

  friend bool operator==(const InversionPolynomial&, const InversionPolynomial&) = default;

 private:
  std::map<int, std::uint64_t> coeffs_;  // zero coefficients are not stored
};

InversionPolynomial inversion_polynomial(const OverlapTable& table);

// Cache file name for a table key, e.g. "sequential_2341_s1.json".
std::string overlap_cache_name(const Pattern& tau, int s, OverlapMode mode);
std::optional<OverlapTable> load_overlap_table(const std::filesystem::path& file);
void save_overlap_table(const OverlapTable& table, const std::filesystem::path& file);

}  // namespace patpoisson
