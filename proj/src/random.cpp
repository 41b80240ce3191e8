#include "patpoisson/random.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

using u128 = unsigned __int128;

int bit_length(std::uint64_t x) { return 64 - std::countl_zero(x); }

long exact_geometric(long n, std::uint64_t a, std::uint64_t b, Rng& rng) {
  // Weights a^{k-1} b^{n-k}, k = 1..n, as exact integers.
  std::array<u128, 64> cumulative, pow_a, pow_b;
  pow_a[0] = pow_b[0] = 1;
  for (long i = 1; i < n; ++i) {
    pow_a[static_cast<std::size_t>(i)] = pow_a[static_cast<std::size_t>(i - 1)] * a;
    pow_b[static_cast<std::size_t>(i)] = pow_b[static_cast<std::size_t>(i - 1)] * b;
  }
  u128 total = 0;
  for (long k = 1; k <= n; ++k) {
    total += pow_a[static_cast<std::size_t>(k - 1)] * pow_b[static_cast<std::size_t>(n - k)];
    cumulative[static_cast<std::size_t>(k - 1)] = total;
  }
  const u128 threshold = (u128(0) - total) % total;
  u128 r;
  do {
    r = (u128(rng()) << 64) | u128(rng());
  } while (r < threshold);
  r %= total;
  long k = 1;
  while (cumulative[static_cast<std::size_t>(k - 1)] <= r) ++k;
  return k;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw InvalidInput("uniform_below needs a positive bound");
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r < threshold);
  return r % bound;
}

GeometricParam::GeometricParam(const BigScalar& q) {
  if (q.sign() <= 0) throw InvalidInput("q must be positive");
  one_ = q == BigScalar(1);
  q_ = q.to_double();
  log_q_ = static_cast<double>(q.log());
  if (q.is_exact()) {
    const Integer& num = mp::numerator(q.rational());
    const Integer& den = mp::denominator(q.rational());
    const Integer limit = Integer(1) << 32;
    if (num < limit && den < limit)
      rational_ = std::make_pair(static_cast<std::uint64_t>(num), static_cast<std::uint64_t>(den));
  }
}

GeometricParam GeometricParam::inverse() const {
  GeometricParam out;
  out.one_ = one_;
  out.q_ = 1.0 / q_;
  out.log_q_ = -log_q_;
  if (rational_) out.rational_ = std::make_pair(rational_->second, rational_->first);
  return out;
}

long truncated_geometric(long n, const GeometricParam& q, Rng& rng) {
  if (n < 1) throw InvalidInput("truncated geometric needs n >= 1");
  if (n == 1) return 1;
  if (q.one_) return static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(n))) + 1;

  if (q.rational_ && n <= 64) {
    const auto [a, b] = *q.rational_;
    const int bits = static_cast<int>(n - 1) * std::max(bit_length(a), bit_length(b)) + bit_length(static_cast<std::uint64_t>(n));
    if (bits <= 126) return exact_geometric(n, a, b, rng);
  }

  if (q.log_q_ > 0) return n + 1 - truncated_geometric(n, q.inverse(), rng);
  // P(X <= k) = (1 - q^k) / (1 - q^n) for q < 1.
  const double u = uniform01(rng);
  const double c = -std::expm1(static_cast<double>(n) * q.log_q_);
  const double k = std::ceil(std::log1p(-u * c) / q.log_q_);
  if (!(k >= 1)) return 1;
  if (k > static_cast<double>(n)) return n;
  return static_cast<long>(k);
}

}  // namespace patpoisson
