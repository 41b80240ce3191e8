#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "patpoisson/scalar.hpp"

namespace patpoisson {

// All sampling draws from a 64-bit Mersenne Twister; the conversion to
// doubles and bounded integers below is explicit so streams are identical
// across standard libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
// Independent stream seed for shard `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Uniform on [0, 1) with 53 random bits.
double uniform01(Rng& rng);
// Uniform on {0, ..., bound-1}; bound >= 1.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// Parameter of the truncated geometric law P(X = k) ∝ q^{k-1}, k = 1..n.
class GeometricParam {
 public:
  explicit GeometricParam(const BigScalar& q);

  double value() const { return q_; }
  bool is_one() const { return one_; }
  // Numerator and denominator when q is a rational with 32-bit parts.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> small_rational() const { return rational_; }
  GeometricParam inverse() const;

 private:
  GeometricParam() = default;
  double q_ = 1;
  double log_q_ = 0;
  bool one_ = true;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> rational_;

  friend long truncated_geometric(long n, const GeometricParam& q, Rng& rng);
};

// Exact integer inverse CDF for small rational q and n; otherwise a
// log-space inverse CDF on one uniform variate.
long truncated_geometric(long n, const GeometricParam& q, Rng& rng);

}  // namespace patpoisson
