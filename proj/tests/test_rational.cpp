#include <doctest.h>

#include "cknscope/rational.hpp"

using namespace cknscope;

TEST_CASE("decimal and fraction parsing is exact") {
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("1.9") == Rational(19, 10));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-0.4") == Rational(-2, 5));
  CHECK_THROWS(parse_rational(""));
}

TEST_CASE("admissible window of (q, k)") {
  const Rational q95(9, 5);
  CHECK(k_lower_bound(q95) == Rational(2, 5));
  CHECK(k_upper_bound(q95) == Rational(2, 5));
  CHECK(k_admissible(q95, Rational(2, 5)));
  CHECK_FALSE(k_admissible(q95, Rational(1, 4)));

  const Rational q2(2);
  CHECK(k_lower_bound(q2) == Rational(1, 4));
  CHECK(k_upper_bound(q2) == Rational(1, 3));
  CHECK(k_admissible(q2, Rational(1, 4)));
  CHECK(k_admissible(q2, Rational(1, 3)));
  CHECK_FALSE(k_admissible(q2, Rational(1, 5)));
  CHECK_FALSE(k_admissible(Rational(3, 2), Rational(1, 4)));
}

TEST_CASE("interpolation exponents reproduce the closed forms exactly") {
  // q = 2, k = 1/4: the classical (3/4, 3/4) pair.
  CHECK(interp_exponent_a(Rational(2), Rational(1, 4)) == Rational(3, 4));
  CHECK(interp_exponent_b(Rational(2), Rational(1, 4)) == Rational(3, 4));

  // k = (3-q)/3 collapses to ((3-q)/2, 1).
  for (const Rational& q : {Rational(9, 5), Rational(19, 10), Rational(2)}) {
    const Rational k = (Rational(3) - q) / Rational(3);
    CHECK(interp_exponent_a(q, k) == (Rational(3) - q) / Rational(2));
    CHECK(interp_exponent_b(q, k) == Rational(1));
  }
}

TEST_CASE("interpolation exponents carry velocity homogeneity degree three") {
  // 2a + q b = 3 for admissible (q, k): both sides of the interpolation
  // inequality scale as the cube of the velocity amplitude.
  for (const Rational& q : {Rational(9, 5), Rational(19, 10), Rational(2)}) {
    for (const Rational& k : {k_lower_bound(q), k_upper_bound(q)}) {
      const Rational a = interp_exponent_a(q, k);
      const Rational b = interp_exponent_b(q, k);
      CHECK(Rational(2) * a + q * b == Rational(3));
    }
  }
}

TEST_CASE("gradient criterion exponent") {
  CHECK(gradient_criterion_exponent(Rational(9, 5)) == Rational(4));
  CHECK(gradient_criterion_exponent(Rational(19, 10)) == Rational(31, 9));
}

TEST_CASE("bound-chain exponent identities of the q < 2 argument") {
  // With theta = [M^{-q/(q-1)} m]^{1/5} both monomials carry the exponents of
  // (M^{(5-q)/(q-1)} m)^{3/5}.
  for (const Rational& q : {Rational(9, 5), Rational(19, 10)}) {
    const Rational theta_M_exp = Rational(-1, 5) * q / (q - Rational(1));
    const Rational theta_m_exp = Rational(1, 5);
    // First monomial theta^3 M^{3/(q-1)}.
    const Rational m1_M = Rational(3) * theta_M_exp + Rational(3) / (q - Rational(1));
    const Rational m1_m = Rational(3) * theta_m_exp;
    // Second monomial theta^-2 M^{(3-q)/(q-1)} m.
    const Rational m2_M = Rational(-2) * theta_M_exp + (Rational(3) - q) / (q - Rational(1));
    const Rational m2_m = Rational(-2) * theta_m_exp + Rational(1);
    const Rational eps_M = Rational(3, 5) * (Rational(5) - q) / (q - Rational(1));
    const Rational eps_m = Rational(3, 5);
    CHECK(m1_M == eps_M);
    CHECK(m1_m == eps_m);
    CHECK(m2_M == eps_M);
    CHECK(m2_m == eps_m);
  }
}

TEST_CASE("rational arithmetic basics") {
  CHECK(Rational(6, 4) == Rational(3, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(3, 4).str() == "3/4");
  CHECK(Rational(2).str() == "2");
  CHECK_THROWS(Rational(1, 0));
  CHECK(Rational(1, 4) < Rational(1, 3));
}
