#pragma once

// Mallows(q) permutations: P(sigma) = q^{inv(sigma)} / I_n(q).

#include <vector>

#include "patpoisson/permutation.hpp"
#include "patpoisson/random.hpp"
#include "patpoisson/scalar.hpp"

namespace patpoisson {

struct MallowsParams {
  long n = 1;
  BigScalar q{1};
};

enum class Strategy { ordering, bumping };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

// Insert n+1 at position k (1 <= k <= n+1); creates n+1-k inversions.
Permutation ordering_step(const Permutation& p, int k);
// Increment every value >= k, then append k (1 <= k <= n+1); creates
// n+1-k inversions.
Permutation bumping_step(const Permutation& p, int k);

// Builds the permutation encoded by insertion variates X_1..X_n
// (X_i in 1..i) in O(n log n).
Permutation materialize(const std::vector<int>& variates, Strategy strategy);

// X_1..X_n with X_i ~ Geometric(i, 1/q) truncated to 1..i.
std::vector<int> sample_variates(long n, const GeometricParam& q, Rng& rng);

Permutation sample(const MallowsParams& params, Rng& rng, Strategy strategy = Strategy::ordering);

BigScalar mallows_pmf(const Permutation& p, const BigScalar& q);

// A growing Mallows(q) sequence; the permutation is rebuilt from the stored
// variates on demand, so each step costs O(1) amortised.
class MallowsProcessState {
 public:
  MallowsProcessState(const BigScalar& q, std::uint64_t seed, long initial_length = 1);

  long length() const { return static_cast<long>(variates_.size()); }
  const std::vector<int>& variates() const { return variates_; }
  Permutation current(Strategy strategy = Strategy::ordering) const { return materialize(variates_, strategy); }

  // Append X_{n+1}; returns it.
  int step();

 private:
  GeometricParam q_;
  Rng rng_;
  std::vector<int> variates_;
};

}  // namespace patpoisson
