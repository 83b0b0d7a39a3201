#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cknscope {

// Exact rational arithmetic for the exponent algebra of the interpolation
// inequalities and the iteration traces.  Keeps exponent identities checkable
// without floating-point slack.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw std::invalid_argument("Rational: division by zero");
    return Rational(a.num * b.den, a.den * b.num);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a == b || a < b; }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Parses a decimal string ("2", "0.25", "1.9", "-3/4") into an exact rational.
Rational parse_rational(const std::string& text);

// Admissible exponent window (q, k): 9/5 <= q <= 2 and
// (3-q)/(5q-6) <= k <= (3-q)/3.
bool q_admissible(const Rational& q);
bool k_admissible(const Rational& q, const Rational& k);
Rational k_lower_bound(const Rational& q);
Rational k_upper_bound(const Rational& q);

// Exponents of the velocity interpolation bound
//   C~(r) <= const * A(r)^a E_q(r)^b,
// a = (9-3q-3qk)/(6-2q), b = 3k/(3-q).
Rational interp_exponent_a(const Rational& q, const Rational& k);
Rational interp_exponent_b(const Rational& q, const Rational& k);

// Exponent (5-q)/(q-1) in the q<2 gradient criterion.
Rational gradient_criterion_exponent(const Rational& q);

}  // namespace cknscope
