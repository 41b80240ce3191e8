#pragma once

// Scalars for bound arithmetic. Values stay exact rationals while their size
// is moderate; anything irrational (exp, roots) or enormous (n! for large n)
// moves to a signed log10 representation carried in 60-digit MPFR.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace patpoisson {

namespace mp = boost::multiprecision;

using Integer = mp::mpz_int;
using Rational = mp::mpq_rational;
using Real = mp::number<mp::mpfr_float_backend<60>, mp::et_off>;

// Exact rationals larger than this many bits (numerator plus denominator)
// are converted to log mode.
inline constexpr std::size_t kExactBitLimit = 1u << 17;

Real to_real(const Rational& q);
Real to_real(const Integer& z);
Real ln10();

// Parses "3", "-2/7", "0.125", "1e-3", "2.5E4" exactly.
Rational parse_rational(std::string_view text);
std::string rational_to_string(const Rational& q);

Integer factorial_int(unsigned n);
Integer binomial_int(unsigned n, unsigned k);

class BigScalar {
 public:
  BigScalar() = default;  // exact zero
  BigScalar(const Rational& q) : exact_(true), q_(q) { normalize(); }  // NOLINT(implicit)
  BigScalar(const Integer& z) : BigScalar(Rational(z)) {}              // NOLINT(implicit)
  BigScalar(long v) : BigScalar(Rational(v)) {}                         // NOLINT(implicit)
  BigScalar(int v) : BigScalar(Rational(v)) {}                          // NOLINT(implicit)

  static BigScalar from_log10(int sign, const Real& log10_abs);
  static BigScalar from_real(const Real& x);

  bool is_exact() const { return exact_; }
  const Rational& rational() const;  // throws std::logic_error in log mode
  int sign() const;
  bool is_zero() const { return sign() == 0; }

  // log10|x|; -inf for zero.
  Real log10_abs() const;
  // Natural log of a positive value.
  Real log() const;
  // May overflow to +-inf for enormous magnitudes.
  Real to_real() const;
  double to_double() const;

  // "6.85456e157" style with `sig` significant digits; "0" for zero.
  std::string scientific(int sig = 6) const;
  // Exact "p/q" string in exact mode, otherwise a 30-digit scientific string.
  std::string exact_string() const;

  BigScalar operator-() const;
  friend BigScalar operator+(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator-(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator*(const BigScalar& a, const BigScalar& b);
  friend BigScalar operator/(const BigScalar& a, const BigScalar& b);
  BigScalar& operator+=(const BigScalar& b) { return *this = *this + b; }
  BigScalar& operator-=(const BigScalar& b) { return *this = *this - b; }
  BigScalar& operator*=(const BigScalar& b) { return *this = *this * b; }
  BigScalar& operator/=(const BigScalar& b) { return *this = *this / b; }

  friend std::partial_ordering operator<=>(const BigScalar& a, const BigScalar& b);
  friend bool operator==(const BigScalar& a, const BigScalar& b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }

 private:
  void normalize();

  bool exact_ = true;
  Rational q_{0};
  int sign_ = 0;   // log mode only
  Real log10_{0};  // log mode only
};

BigScalar pow(const BigScalar& x, long k);
BigScalar exp(const BigScalar& x);
BigScalar sqrt(const BigScalar& x);
BigScalar min(const BigScalar& a, const BigScalar& b);
BigScalar max(const BigScalar& a, const BigScalar& b);

// n! exactly when it is small enough, otherwise in log mode via lgamma.
BigScalar factorial(unsigned long n);

}  // namespace patpoisson
