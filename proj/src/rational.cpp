#include "cknscope/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace cknscope {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::int64_t n = std::stoll(text.substr(0, slash));
    const std::int64_t d = std::stoll(text.substr(slash + 1));
    return Rational(n, d);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac_len = text.size() - dot - 1;
  if (frac_len > 15) throw std::invalid_argument("parse_rational: too many decimals: " + text);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

bool q_admissible(const Rational& q) { return Rational(9, 5) <= q && q <= Rational(2); }

Rational k_lower_bound(const Rational& q) { return (Rational(3) - q) / (Rational(5) * q - Rational(6)); }

Rational k_upper_bound(const Rational& q) { return (Rational(3) - q) / Rational(3); }

bool k_admissible(const Rational& q, const Rational& k) {
  if (!q_admissible(q)) return false;
  return k_lower_bound(q) <= k && k <= k_upper_bound(q);
}

Rational interp_exponent_a(const Rational& q, const Rational& k) {
  return (Rational(9) - Rational(3) * q - Rational(3) * q * k) / (Rational(6) - Rational(2) * q);
}

Rational interp_exponent_b(const Rational& q, const Rational& k) {
  return Rational(3) * k / (Rational(3) - q);
}

Rational gradient_criterion_exponent(const Rational& q) {
  return (Rational(5) - q) / (q - Rational(1));
}

}  // namespace cknscope
