#include "patpoisson/mallows.hpp"

#include <bit>

#include "patpoisson/bounds.hpp"
#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

// Fenwick tree over n slots, each initially free; supports "k-th free slot".
class FreeSlots {
 public:
  explicit FreeSlots(std::size_t n) : tree_(n + 1, 0), log_(std::bit_floor(n)) {
    for (std::size_t i = 1; i <= n; ++i) {
      tree_[i] += 1;
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= n) tree_[parent] += tree_[i];
    }
  }

  // Removes and returns (1-based) the k-th free slot.
  std::size_t take(std::size_t k) {
    std::size_t pos = 0;
    for (std::size_t step = log_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] < k) {
        pos = next;
        k -= tree_[next];
      }
    }
    const std::size_t slot = pos + 1;
    for (std::size_t i = slot; i < tree_.size(); i += i & (~i + 1)) --tree_[i];
    return slot;
  }

 private:
  std::vector<std::size_t> tree_;
  std::size_t log_;
};

}  // namespace

std::string_view to_string(Strategy s) { return s == Strategy::ordering ? "ordering" : "bumping"; }

Strategy parse_strategy(std::string_view text) {
  if (text == "ordering") return Strategy::ordering;
  if (text == "bumping") return Strategy::bumping;
  throw InvalidInput("strategy must be 'ordering' or 'bumping'");
}

Permutation ordering_step(const Permutation& p, int k) {
  const int n = p.size();
  if (k < 1 || k > n + 1) throw InvalidInput("insertion position must lie in 1.." + std::to_string(n + 1));
  std::vector<int> v(p.values().begin(), p.values().end());
  v.insert(v.begin() + (k - 1), n + 1);
  return Permutation(std::move(v));
}

Permutation bumping_step(const Permutation& p, int k) {
  const int n = p.size();
  if (k < 1 || k > n + 1) throw InvalidInput("bumped value must lie in 1.." + std::to_string(n + 1));
  std::vector<int> v;
  v.reserve(static_cast<std::size_t>(n) + 1);
  for (int x : p.values()) v.push_back(x >= k ? x + 1 : x);
  v.push_back(k);
  return Permutation(std::move(v));
}

Permutation materialize(const std::vector<int>& variates, Strategy strategy) {
  const std::size_t n = variates.size();
  if (n == 0) throw InvalidInput("no variates");
  for (std::size_t i = 0; i < n; ++i)
    if (variates[i] < 1 || static_cast<std::size_t>(variates[i]) > i + 1)
      throw InvalidInput("variate X_" + std::to_string(i + 1) + " out of range");
  std::vector<int> out(n);
  FreeSlots free(n);
  if (strategy == Strategy::ordering) {
    // Value v sits at the X_v-th slot not taken by larger values.
    for (std::size_t v = n; v >= 1; --v) out[free.take(static_cast<std::size_t>(variates[v - 1])) - 1] = static_cast<int>(v);
  } else {
    // Position i holds the X_i-th smallest value not used by later positions.
    for (std::size_t i = n; i >= 1; --i) out[i - 1] = static_cast<int>(free.take(static_cast<std::size_t>(variates[i - 1])));
  }
  return Permutation(std::move(out));
}

std::vector<int> sample_variates(long n, const GeometricParam& q, Rng& rng) {
  if (n < 1) throw InvalidInput("n must be >= 1");
  const GeometricParam inv = q.inverse();
  std::vector<int> x(static_cast<std::size_t>(n));
  for (long i = 1; i <= n; ++i) x[static_cast<std::size_t>(i - 1)] = static_cast<int>(truncated_geometric(i, inv, rng));
  return x;
}

Permutation sample(const MallowsParams& params, Rng& rng, Strategy strategy) {
  return materialize(sample_variates(params.n, GeometricParam(params.q), rng), strategy);
}

BigScalar mallows_pmf(const Permutation& p, const BigScalar& q) {
  return pow(q, static_cast<long>(inversion_count(p.values()))) / inversion_poly_value(p.size(), q);
}

MallowsProcessState::MallowsProcessState(const BigScalar& q, std::uint64_t seed, long initial_length)
    : q_(GeometricParam(q).inverse()), rng_(seed) {
  if (initial_length < 1) throw InvalidInput("initial length must be >= 1");
  for (long i = 0; i < initial_length; ++i) step();
}

int MallowsProcessState::step() {
  const long next = length() + 1;
  const int x = static_cast<int>(truncated_geometric(next, q_, rng_));
  variates_.push_back(x);
  return x;
}

}  // namespace patpoisson
