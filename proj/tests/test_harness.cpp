#include <doctest.h>

#include <cmath>

#include "cknscope/harness.hpp"
#include "cknscope/pressure.hpp"

using namespace cknscope;

namespace {

GridSpec balance_grid(int n) { return {n, kTwoPi, 3 * n / 4 + 1, 0.0, 2.7}; }

}  // namespace

TEST_CASE("energy balance holds with small residual on the Beltrami flow") {
  double res[2];
  int idx = 0;
  for (int n : {32, 64}) {
    const GridSpec g = balance_grid(n);
    const SampledFlow flow = make_beltrami_flow(g);
    const auto chk = check_energy_balance(flow, {g.center(), g.t1, 0.8});
    res[idx++] = chk.residual;
    CHECK(chk.lhs > 0.0);
    CHECK(chk.rhs_sum > 0.0);
  }
  CHECK(res[1] <= 0.02);
  CHECK(res[0] / res[1] >= 3.0);
}

TEST_CASE("energy balance on the zero flow is degenerate-zero") {
  GridSpec g = balance_grid(32);
  SampledFlow flow;
  flow.grid = g;
  flow.velocity = VectorField(g);
  flow.pressure = ScalarField(g);
  const auto chk = check_energy_balance(flow, {g.center(), g.t1, 0.8});
  CHECK(chk.lhs == 0.0);
  CHECK(chk.rhs_sum == 0.0);
  CHECK(chk.residual == 0.0);
}

TEST_CASE("energy balance with a synthetic force participates through term IV") {
  GridSpec g = balance_grid(32);
  SampledFlow flow = make_beltrami_flow(g);
  flow.force = VectorField(g);
  for (int jt = 0; jt < g.n_times; ++jt) {
    const double decay = std::exp(-g.time_at(jt));
    for (int i1 = 0; i1 < g.n; ++i1) {
      const double f1 = std::sin(g.coord(i1)) * decay;
      for (int i2 = 0; i2 < g.n; ++i2)
        for (int i3 = 0; i3 < g.n; ++i3) flow.force->at(jt, i1, i2, i3, 0) = f1;
    }
  }
  // The forced field is not a solution of the forced system, so the identity
  // need not balance; the force term must still be finite and nonzero.
  const auto chk = check_energy_balance(flow, {g.center(), g.t1, 0.8});
  REQUIRE(chk.rhs_terms.size() == 4);
  CHECK(chk.rhs_terms[3].first == "force");
  CHECK(chk.rhs_terms[3].second != 0.0);
  CHECK(std::isfinite(chk.rhs_sum));
}

TEST_CASE("local energy checkers on the shear fixture") {
  GridSpec g{64, kTwoPi, 33, 0.0, 1.2};
  const SampledFlow flow = make_shear_flow(g);
  FunctionalEvaluator ev(flow);
  const Vec3 c = g.center();

  const auto l31 = check_local_energy_I(ev, c, 1.2, 0.5);
  CHECK_FALSE(l31.degenerate);
  CHECK(l31.rhs_sum > 0.0);
  CHECK(l31.lhs > 0.0);
  CHECK(std::isfinite(l31.ratio));

  const auto l55 = check_C23_bound(ev, c, 1.2, 0.5);
  // Frozen from the closed forms: C^{2/3} / (A + E) at r = 1/2.
  const double want =
      std::pow(M_PI / 6.0 * std::pow(0.5, 6), 2.0 / 3.0) /
      (4.0 * M_PI / 15.0 * std::pow(0.5, 4) + 4.0 * M_PI / 3.0 * std::pow(0.5, 4));
  CHECK(want == doctest::Approx(0.1292).epsilon(0.001));
  CHECK(l55.ratio == doctest::Approx(want).epsilon(0.03));
}

TEST_CASE("pressure checker I: constant pressure passes via a zero left side") {
  GridSpec g{32, kTwoPi, 102, 0.0, 4.04};
  SampledFlow flow = make_random_divfree_flow(g, 4, 6, 1.0);
  for (double& p : flow.pressure->raw()) p = 7.0;
  FunctionalParams params;
  params.limits = CylinderLimits::coarse();
  FunctionalEvaluator ev(flow, params);
  const auto chk = check_pressure_I(ev, g.center(), g.t1, 2.0, 0.2);
  CHECK(chk.lhs <= chk.abs_tol);
  CHECK(chk.pass);
  CHECK(chk.rhs_terms[1].second > 0.0);  // C~ term alive
}

TEST_CASE("checker preconditions reject out-of-hypothesis parameters") {
  GridSpec g{32, kTwoPi, 17, 0.0, 1.0};
  const SampledFlow flow = make_random_divfree_flow(g, 2, 5, 1.0);
  FunctionalEvaluator ev(flow);
  const Vec3 c = g.center();
  CHECK_THROWS_AS(check_local_energy_I(ev, c, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(check_pressure_I(ev, c, 1.0, 0.8, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(check_pressure_II(ev, c, 1.0, 0.8, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(check_C_split(ev, c, 1.0, 0.8, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(check_interp_I(ev, c, 1.0, 0.8, 2.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(check_interp_II(ev, c, 1.0, 0.8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_X_decay(ev, c, 1.0, 0.8, 0.3, 2.0, 0.25), std::invalid_argument);
}

TEST_CASE("interpolation checker uses the closed-form exponents") {
  GridSpec g{32, kTwoPi, 17, 0.0, 1.0};
  const SampledFlow flow = make_random_divfree_flow(g, 3, 5, 1.0);
  FunctionalEvaluator ev(flow);
  const Vec3 c = g.center();
  const auto chk = check_interp_I(ev, c, 1.0, 0.9, 2.0, 0.25);
  const double a = ev.A(c, 1.0, 0.9);
  const double e = ev.E(c, 1.0, 0.9);
  CHECK(chk.rhs_terms[0].second ==
        doctest::Approx(std::pow(a, 0.75) * std::pow(e, 0.75)).epsilon(1e-12));
}

TEST_CASE("amplitude homogeneity degree of each lemma's terms") {
  GridSpec g{32, kTwoPi, 102, 0.0, 4.04};
  RandomFlowOptions opt;
  opt.max_wavenumber = 6;
  opt.amplitude = 1.0;
  opt.force_wavenumber = 3;
  opt.force_amplitude = 0.4;
  const SampledFlow flow = make_random_divfree_flow(g, 21, opt);
  const double alpha = 1.4142135623730951;
  const SampledFlow scaled = amplitude_scaled(flow, alpha);
  FunctionalParams params;
  params.limits = CylinderLimits::coarse();
  FunctionalEvaluator ev(flow, params), evs(scaled, params);
  const Vec3 c = g.center();
  const double t = g.t1;

  auto term_ratio_matches = [&](const InequalityCheck& base, const InequalityCheck& big,
                                std::size_t term, double degree) {
    const double want = std::pow(alpha, degree);
    CHECK(big.rhs_terms[term].second ==
          doctest::Approx(want * base.rhs_terms[term].second).epsilon(1e-9));
  };

  {
    const auto b = check_pressure_I(ev, c, t, 2.0, 0.2);
    const auto s = check_pressure_I(evs, c, t, 2.0, 0.2);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 3) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 0, 3.0);
    term_ratio_matches(b, s, 1, 3.0);
  }
  {
    const auto b = check_pressure_II(ev, c, t, 0.9, 0.25);
    const auto s = check_pressure_II(evs, c, t, 0.9, 0.25);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 4) * b.lhs).epsilon(1e-6));
    term_ratio_matches(b, s, 0, 4.0);
    term_ratio_matches(b, s, 1, 4.0);
    term_ratio_matches(b, s, 2, 4.0);
  }
  {
    const auto b = check_C_split(ev, c, t, 0.8, 0.5);
    const auto s = check_C_split(evs, c, t, 0.8, 0.5);
    for (int form = 0; form < 2; ++form) {
      CHECK(s[form].lhs == doctest::Approx(std::pow(alpha, 3) * b[form].lhs).epsilon(1e-9));
      term_ratio_matches(b[form], s[form], 0, 3.0);
      term_ratio_matches(b[form], s[form], 1, 3.0);
    }
  }
  {
    const auto b = check_interp_I(ev, c, t, 0.7, 1.8, 0.4);
    const auto s = check_interp_I(evs, c, t, 0.7, 1.8, 0.4);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 3) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 0, 3.0);  // 2a + qb = 3
  }
  {
    const auto b = check_interp_II(ev, c, t, 0.8, 0.5);
    const auto s = check_interp_II(evs, c, t, 0.8, 0.5);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 2) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 0, 2.0);
    term_ratio_matches(b, s, 1, 2.0);
  }
  {
    const auto b = check_C23_bound(ev, c, t, 0.7);
    const auto s = check_C23_bound(evs, c, t, 0.7);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 2) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 0, 2.0);
    term_ratio_matches(b, s, 1, 2.0);
  }
  {
    // The Caccioppoli forms mix degrees by design; check each pure term.
    const auto b = check_local_energy_I(ev, c, t, 0.5);
    const auto s = check_local_energy_I(evs, c, t, 0.5);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 2) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 0, 2.0);  // C^{2/3}
    term_ratio_matches(b, s, 1, 3.0);  // C
    term_ratio_matches(b, s, 2, 3.0);  // C^{1/3} D^{2/3}
  }
  {
    const auto b = check_local_energy_II(ev, c, t, 0.5);
    const auto s = check_local_energy_II(evs, c, t, 0.5);
    CHECK(s.lhs == doctest::Approx(std::pow(alpha, 2) * b.lhs).epsilon(1e-9));
    term_ratio_matches(b, s, 1, 4.0);  // P
    term_ratio_matches(b, s, 2, 4.0);  // F
  }
}

TEST_CASE("suite runner: no samples rejected, single lemma honored, deterministic") {
  SuiteSpec bad;
  bad.n_fields = 0;
  CHECK_THROWS_WITH_AS(fit_constants(bad), doctest::Contains("no samples"),
                       std::invalid_argument);

  SuiteSpec spec;
  spec.n_fields = 2;
  spec.resolutions = {32};
  spec.force_fraction = 0.5;
  spec.only_lemma = "L52";
  const SuiteReport rep = fit_constants(spec);
  CHECK(rep.fits.size() == 1);
  CHECK(rep.fits[0].lemma == "L52");
  CHECK(rep.fits[0].samples == 8);  // 4 (q,k) pairs x 2 fields
  for (const auto& chk : rep.checks) CHECK(chk.lemma == "L52");

  const SuiteReport rep2 = fit_constants(spec);
  REQUIRE(rep2.checks.size() == rep.checks.size());
  for (std::size_t i = 0; i < rep.checks.size(); ++i)
    CHECK(rep.checks[i].ratio == rep2.checks[i].ratio);  // bit-for-bit
}

TEST_CASE("small two-resolution suite produces nine finite fits") {
  SuiteSpec spec;
  spec.n_fields = 3;
  spec.resolutions = {32, 48};
  spec.force_fraction = 1.0 / 3.0;
  spec.threads = 2;
  const SuiteReport rep = fit_constants(spec);
  REQUIRE(rep.fits.size() == 9);
  for (const auto& fit : rep.fits) {
    CAPTURE(fit.lemma);
    CHECK(fit.samples > 0);
    CHECK(std::isfinite(fit.max_ratio));
    CHECK(fit.max_ratio > 0.0);
    CHECK(fit.p95_ratio <= fit.max_ratio);
    CHECK(fit.max_by_resolution.size() == 2);
  }
  for (const auto& chk : rep.checks) {
    CAPTURE(chk.lemma);
    CHECK(chk.pass);
  }
}
