#include "patpoisson/scalar.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "patpoisson/errors.hpp"

namespace patpoisson {

namespace {

std::size_t bit_size(const Rational& q) {
  const Integer& num = mp::numerator(q);
  const Integer& den = mp::denominator(q);
  std::size_t bits = 0;
  if (num != 0) bits += mp::msb(mp::abs(num)) + 1;
  bits += mp::msb(den) + 1;
  return bits;
}

Real log10_of(const Rational& q) {
  // Split numerator and denominator to stay accurate for very large values.
  return mp::log10(Real(mp::abs(mp::numerator(q)))) - mp::log10(Real(mp::denominator(q)));
}

// Below this, a relative difference is treated as complete cancellation.
const Real& cancellation_floor() {
  static const Real floor("1e-55");
  return floor;
}

}  // namespace

Real to_real(const Rational& q) { return Real(q); }
Real to_real(const Integer& z) { return Real(z); }

Real ln10() {
  static const Real v = mp::log(Real(10));
  return v;
}

Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational { throw InvalidInput("not a number: '" + std::string(text) + "'"); };
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational a = parse_rational(text.substr(0, slash));
    Rational b = parse_rational(text.substr(slash + 1));
    if (b == 0) throw InvalidInput("zero denominator in '" + std::string(text) + "'");
    return a / b;
  }

  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_digit = false, seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  long exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    ++i;
    std::string e(text.substr(i));
    if (e.empty()) return fail();
    std::size_t used = 0;
    try {
      exponent = std::stol(e, &used);
    } catch (const std::exception&) {
      return fail();
    }
    if (used != e.size() || std::labs(exponent) > 100000) return fail();
  }
  // GMP reads a leading zero as an octal prefix.
  const auto nz = digits.find_first_not_of('0');
  Integer mant(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  long shift = exponent - frac_digits;
  Rational out(mant);
  if (shift > 0) out *= Rational(mp::pow(Integer(10), static_cast<unsigned>(shift)));
  if (shift < 0) out /= Rational(mp::pow(Integer(10), static_cast<unsigned>(-shift)));
  return negative ? Rational(-out) : out;
}

std::string rational_to_string(const Rational& q) {
  const Integer& den = mp::denominator(q);
  if (den == 1) return mp::numerator(q).str();
  return mp::numerator(q).str() + "/" + den.str();
}

Integer factorial_int(unsigned n) {
  Integer z;
  mpz_fac_ui(z.backend().data(), n);
  return z;
}

Integer binomial_int(unsigned n, unsigned k) {
  Integer z;
  if (k > n) return z;
  mpz_bin_uiui(z.backend().data(), n, k);
  return z;
}

void BigScalar::normalize() {
  if (!exact_) return;
  if (bit_size(q_) > kExactBitLimit) {
    sign_ = q_ < 0 ? -1 : 1;
    log10_ = log10_of(q_);
    exact_ = false;
    q_ = 0;
  }
}

BigScalar BigScalar::from_log10(int sign, const Real& log10_abs) {
  BigScalar out;
  if (sign == 0 || (mp::isinf)(log10_abs)) return out;
  out.exact_ = false;
  out.sign_ = sign > 0 ? 1 : -1;
  out.log10_ = log10_abs;
  return out;
}

BigScalar BigScalar::from_real(const Real& x) {
  if (x == 0) return BigScalar();
  if ((mp::isnan)(x)) throw std::domain_error("NaN scalar");
  return from_log10(x < 0 ? -1 : 1, mp::log10(mp::abs(x)));
}

const Rational& BigScalar::rational() const {
  if (!exact_) throw std::logic_error("scalar is not exact");
  return q_;
}

int BigScalar::sign() const {
  if (exact_) return q_ < 0 ? -1 : (q_ > 0 ? 1 : 0);
  return sign_;
}

Real BigScalar::log10_abs() const {
  if (is_zero()) return -std::numeric_limits<Real>::infinity();
  return exact_ ? log10_of(q_) : log10_;
}

Real BigScalar::log() const {
  if (sign() <= 0) throw std::domain_error("log of a non-positive scalar");
  return log10_abs() * ln10();
}

Real BigScalar::to_real() const {
  if (exact_) return Real(q_);
  Real mag = mp::pow(Real(10), log10_);
  return sign_ < 0 ? Real(-mag) : mag;
}

double BigScalar::to_double() const { return static_cast<double>(to_real()); }

std::string BigScalar::scientific(int sig) const {
  if (is_zero()) return "0";
  if (sig < 1) sig = 1;
  if (sig > 40) sig = 40;
  const Real l = log10_abs();
  Real e = mp::floor(l);
  Real mant = mp::pow(Real(10), l - e);
  // Round the mantissa to `sig` digits in MPFR so large `sig` stays exact.
  Real scale = mp::pow(Real(10), sig - 1);
  Real rounded = mp::round(mant * scale);
  if (rounded >= scale * 10) {
    rounded = mp::round(rounded / 10);
    e += 1;
  }
  std::string digits = static_cast<Integer>(rounded).str();
  std::string out = sign() < 0 ? "-" : "";
  out += digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  out += "e" + static_cast<Integer>(e).str();
  return out;
}

std::string BigScalar::exact_string() const {
  if (exact_) return rational_to_string(q_);
  return scientific(30);
}

BigScalar BigScalar::operator-() const {
  if (exact_) return BigScalar(Rational(-q_));
  return from_log10(-sign_, log10_);
}

BigScalar operator+(const BigScalar& a, const BigScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.exact_ && b.exact_) return BigScalar(Rational(a.q_ + b.q_));
  Real la = a.log10_abs(), lb = b.log10_abs();
  int sa = a.sign(), sb = b.sign();
  if (la < lb) {
    std::swap(la, lb);
    std::swap(sa, sb);
  }
  const Real t = mp::pow(Real(10), lb - la);
  const Real f = sa == sb ? Real(1 + t) : Real(1 - t);
  if (f <= cancellation_floor()) return BigScalar();
  return BigScalar::from_log10(sa, la + mp::log10(f));
}

BigScalar operator-(const BigScalar& a, const BigScalar& b) { return a + (-b); }

BigScalar operator*(const BigScalar& a, const BigScalar& b) {
  if (a.is_zero() || b.is_zero()) return BigScalar();
  if (a.exact_ && b.exact_) return BigScalar(Rational(a.q_ * b.q_));
  return BigScalar::from_log10(a.sign() * b.sign(), a.log10_abs() + b.log10_abs());
}

BigScalar operator/(const BigScalar& a, const BigScalar& b) {
  if (b.is_zero()) throw InvalidInput("division by zero");
  if (a.is_zero()) return BigScalar();
  if (a.exact_ && b.exact_) return BigScalar(Rational(a.q_ / b.q_));
  return BigScalar::from_log10(a.sign() * b.sign(), a.log10_abs() - b.log10_abs());
}

std::partial_ordering operator<=>(const BigScalar& a, const BigScalar& b) {
  if (a.exact_ && b.exact_) {
    if (a.q_ < b.q_) return std::partial_ordering::less;
    if (a.q_ > b.q_) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
  }
  const int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa < sb ? std::partial_ordering::less : std::partial_ordering::greater;
  if (sa == 0) return std::partial_ordering::equivalent;
  const Real la = a.log10_abs(), lb = b.log10_abs();
  if (la == lb) return std::partial_ordering::equivalent;
  const bool a_bigger_mag = la > lb;
  if (sa > 0) return a_bigger_mag ? std::partial_ordering::greater : std::partial_ordering::less;
  return a_bigger_mag ? std::partial_ordering::less : std::partial_ordering::greater;
}

BigScalar pow(const BigScalar& x, long k) {
  if (k == 0) return BigScalar(1);
  if (x.is_zero()) {
    if (k < 0) throw InvalidInput("zero to a negative power");
    return BigScalar();
  }
  const unsigned long ak = static_cast<unsigned long>(k < 0 ? -k : k);
  if (x.is_exact()) {
    const Rational& q = x.rational();
    if (bit_size(q) * ak <= kExactBitLimit) {
      Integer num = mp::pow(mp::numerator(q), static_cast<unsigned>(ak));
      Integer den = mp::pow(mp::denominator(q), static_cast<unsigned>(ak));
      return k > 0 ? BigScalar(Rational(num, den)) : BigScalar(Rational(den, num));
    }
  }
  const int s = (x.sign() < 0 && (ak % 2 == 1)) ? -1 : 1;
  return BigScalar::from_log10(s, x.log10_abs() * Real(k));
}

BigScalar exp(const BigScalar& x) {
  if (x.is_zero()) return BigScalar(1);
  return BigScalar::from_log10(1, x.to_real() / ln10());
}

BigScalar sqrt(const BigScalar& x) {
  if (x.sign() < 0) throw std::domain_error("sqrt of a negative scalar");
  if (x.is_zero()) return BigScalar();
  return BigScalar::from_log10(1, x.log10_abs() / 2);
}

BigScalar min(const BigScalar& a, const BigScalar& b) { return (b < a) ? b : a; }
BigScalar max(const BigScalar& a, const BigScalar& b) { return (b > a) ? b : a; }

BigScalar factorial(unsigned long n) {
  if (n <= 4000) return BigScalar(factorial_int(static_cast<unsigned>(n)));
  return BigScalar::from_log10(1, mp::lgamma(Real(n + 1)) / ln10());
}

}  // namespace patpoisson
