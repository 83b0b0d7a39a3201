#include <doctest.h>

#include <cmath>

#include "cknscope/criterion.hpp"
#include "cknscope/pressure.hpp"

using namespace cknscope;

namespace {

ScaleSweep synthetic_sweep(std::vector<double> radii, std::vector<double> values) {
  ScaleSweep sweep;
  sweep.q = 2.0;
  sweep.r = std::move(radii);
  sweep.Eq = std::move(values);
  sweep.A.assign(sweep.r.size(), 0.0);
  return sweep;
}

}  // namespace

TEST_CASE("ladder construction and the resolvable floor") {
  ScaleLadder ladder{0.8, 0.5, 3};
  const auto radii = ladder.radii();
  REQUIRE(radii.size() == 3);
  CHECK(radii[0] == 0.8);
  CHECK(radii[2] == doctest::Approx(0.2));
  CHECK_THROWS_AS((ScaleLadder{0.8, 1.5, 3}).radii(), std::invalid_argument);

  GridSpec g{64, kTwoPi, 33, 0.0, 1.0};
  const auto autol = auto_ladder(g, 0.8, 0.5);
  const auto r = autol.radii();
  const double floor_r = std::max(4.0 * g.spacing(), 2.0 * std::sqrt(g.dt()));
  CHECK(r.back() >= floor_r);
  CHECK(r.back() * 0.5 < floor_r);  // deepest admissible ladder
  CHECK_THROWS_AS(auto_ladder(g, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("shear sweep matches the closed form at every rung") {
  GridSpec g{64, kTwoPi, 25, 0.0, 1.5};
  const SampledFlow flow = make_shear_flow(g);
  ScaleLadder ladder{1.2, 0.5, 2};
  const ScaleSweep sweep = scale_sweep(flow, g.center(), g.t1, ladder, 2.0);
  REQUIRE(sweep.Eq.size() == 2);
  for (std::size_t i = 0; i < sweep.r.size(); ++i)
    CHECK(sweep.Eq[i] ==
          doctest::Approx(4.0 * M_PI / 3.0 * std::pow(sweep.r[i], 4)).epsilon(0.01));
  CHECK(sweep.has_pressure);
  CHECK(sweep.D[0] == 0.0);
  CHECK(sweep.P[0] == 0.0);
}

TEST_CASE("limit estimation over the ladder tail") {
  const auto monotone = synthetic_sweep({0.8, 0.4, 0.2, 0.1}, {8.0, 4.0, 2.0, 1.0});
  const auto lim = estimate_limits(monotone, 2);
  CHECK(lim.E_bar == 2.0);
  CHECK(lim.E_under == 1.0);

  const auto constant = synthetic_sweep({0.8, 0.4, 0.2, 0.1}, {3.0, 3.0, 3.0, 3.0});
  const auto climc = estimate_limits(constant);
  CHECK(climc.E_bar == 3.0);
  CHECK(climc.E_under == 3.0);
  CHECK(climc.tail_length == 2);  // default: half the ladder

  CHECK_THROWS_AS(estimate_limits(monotone, 9), std::invalid_argument);
  CHECK_THROWS_AS(estimate_limits(synthetic_sweep({}, {})), std::invalid_argument);
}

TEST_CASE("theorem 1 verdict") {
  ScaleLimits lim{2.0, 0.0, 2};
  auto v = theorem1_verdict(lim, 1.8, 0.05);
  CHECK(v.decision == Decision::Regular);  // m = 0 forces the product to zero
  CHECK(v.product == 0.0);

  // q = 1.8: the exponent is exactly 4.
  ScaleLimits lim2{2.0, 0.01, 2};
  v = theorem1_verdict(lim2, 1.8, 0.05);
  CHECK(v.product == doctest::Approx(std::pow(2.0, 4) * 0.01).epsilon(1e-14));
  CHECK(v.decision == Decision::NotImplied);  // 0.16 >= 0.05

  CHECK_THROWS_AS(theorem1_verdict(lim2, 2.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(theorem1_verdict(lim2, 1.9, 0.05, false), std::invalid_argument);
}

TEST_CASE("theorem 2 verdict and the quantitative threshold form") {
  ScaleLimits lim{4.0, 0.01, 2};
  auto v = theorem2_verdict(lim, 0.05);
  CHECK(v.product == doctest::Approx(0.04));
  CHECK(v.decision == Decision::Regular);
  CHECK(v.note.find("threshold form") != std::string::npos);

  const double eps = 0.05;
  const double edge = std::sqrt(eps) * 1.01;
  auto not_implied = theorem2_verdict({edge, edge, 2}, eps);
  CHECK(not_implied.decision == Decision::NotImplied);
}

TEST_CASE("ckn verdict") {
  auto sweep = synthetic_sweep({0.4, 0.2}, {0.0, 0.0});
  CHECK(ckn_verdict(sweep, 1e-9).decision == Decision::Regular);
  auto at_eps = synthetic_sweep({0.4, 0.2}, {0.05, 0.05});
  CHECK(ckn_verdict(at_eps, 0.05).decision == Decision::NotImplied);  // strict inequality
  sweep.q = 1.8;
  CHECK_THROWS_AS(ckn_verdict(sweep, 0.05), std::invalid_argument);
}

TEST_CASE("seregin verdict and the epsilon(M) relation") {
  CHECK(seregin_verdict({0.8, 0.0, 2}, 1.0, 0.05).decision == Decision::Regular);
  CHECK(seregin_verdict({3.0, 0.0, 2}, 1.0, 0.05).decision == Decision::NotImplied);
  CHECK(seregin_default_epsilon(0.05, 1.0) == 0.05);
  CHECK(seregin_default_epsilon(0.05, 2.0) == 0.025);
  CHECK(seregin_default_epsilon(0.05, 4.0) == 0.0125);
}

TEST_CASE("verdict monotonicity in epsilon") {
  const ScaleLimits cases[] = {{0.3, 0.1, 2}, {1.0, 0.2, 2}, {0.04, 0.01, 2}};
  const double eps_grid[] = {0.01, 0.05, 0.2, 1.0};
  for (const auto& lim : cases) {
    bool was_regular_t2 = false, was_regular_t1 = false, was_regular_ckn = false;
    for (double eps : eps_grid) {
      const bool t2 = theorem2_verdict(lim, eps).decision == Decision::Regular;
      const bool t1 = theorem1_verdict(lim, 1.9, eps).decision == Decision::Regular;
      auto sweep = synthetic_sweep({0.4, 0.2}, {lim.E_bar, lim.E_under});
      const bool ckn = ckn_verdict(sweep, eps).decision == Decision::Regular;
      CHECK((!was_regular_t2 || t2));
      CHECK((!was_regular_t1 || t1));
      CHECK((!was_regular_ckn || ckn));
      was_regular_t2 = t2;
      was_regular_t1 = t1;
      was_regular_ckn = ckn;
    }
  }
}

TEST_CASE("theorem 2 follows wherever the classical criterion fires small") {
  // For E_under <= E_bar < min(1, eps): product <= E_bar^2 < eps.
  for (double ebar : {0.01, 0.2, 0.8}) {
    for (double frac : {0.1, 1.0}) {
      const double eps = 0.9;
      if (ebar >= std::min(1.0, eps)) continue;
      ScaleLimits lim{ebar, frac * ebar, 2};
      auto sweep = synthetic_sweep({0.4, 0.2}, {lim.E_bar, lim.E_under});
      if (ckn_verdict(sweep, eps).decision == Decision::Regular)
        CHECK(theorem2_verdict(lim, eps).decision == Decision::Regular);
    }
  }
}

TEST_CASE("iteration trace: exact fixed point and geometric error decay") {
  const auto tr = iterate_Y(2.0, 2.0, 2.0, 0.0, 40);
  CHECK(tr.gamma == doctest::Approx(8192.0).epsilon(1e-15));
  CHECK(tr.limit == doctest::Approx(32768.0).epsilon(1e-15));
  REQUIRE(tr.Y.size() == 41);
  // |Y_k - limit| halves every step, exactly in floating point.
  for (std::size_t k = 1; k < tr.Y.size(); ++k) {
    const double want = std::ldexp(std::abs(tr.Y[0] - tr.limit), -static_cast<int>(k));
    CHECK(std::abs(tr.Y[k] - tr.limit) ==
          doctest::Approx(want).epsilon(1e-12));
  }

  // Fixed point stays fixed.
  const auto fixed = iterate_Y(2.0, 2.0, 2.0, 32768.0, 10);
  for (double y : fixed.Y) CHECK(y == doctest::Approx(32768.0).epsilon(1e-15));

  // Parameter grid: the limit always equals 2 (2 beta)^{6/(q-1)} M^{2/(q-1)}.
  for (double beta : {2.0, 3.0})
    for (double q : {1.8, 1.9, 2.0})
      for (double M : {1.5, 2.0, 4.0}) {
        const auto t = iterate_Y(beta, q, M, 5.0, 80);
        const double want =
            2.0 * std::pow(2.0 * beta, 6.0 / (q - 1.0)) * std::pow(M, 2.0 / (q - 1.0));
        CHECK(t.limit == doctest::Approx(want).epsilon(1e-13));
        CHECK(std::abs(t.Y.back() - t.limit) <= 1e-13 * t.limit + 1e-12);
      }

  CHECK_THROWS_AS(iterate_Y(1.5, 2.0, 2.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(iterate_Y(2.0, 2.0, 0.5, 0.0, 5), std::invalid_argument);
}

TEST_CASE("theorem 1 trace: branches and the recombination identity") {
  const auto trivial = theorem1_trace(2.0, 0.0, 1.8, 2.0);
  CHECK(trivial.trivial_branch);

  const auto tr = theorem1_trace(2.0, 0.01, 1.8, 2.0);
  CHECK_FALSE(tr.trivial_branch);
  const double eps = std::pow(2.0, 4.0) * 0.01;  // M^{(5-q)/(q-1)} m at q = 9/5
  CHECK(tr.epsilon == doctest::Approx(eps).epsilon(1e-14));
  CHECK(tr.theta == doctest::Approx(std::pow(std::pow(2.0, -2.25) * 0.01, 0.2)).epsilon(1e-14));
  // theta^3 and theta^-2 monomials recombine into beta eps^{3/5} each.
  CHECK(tr.term_velocity == doctest::Approx(2.0 * std::pow(eps, 0.6)).epsilon(1e-12));
  CHECK(tr.term_gradient == doctest::Approx(2.0 * std::pow(eps, 0.6)).epsilon(1e-12));
  CHECK(tr.bound_direct == doctest::Approx(tr.bound_recombined).epsilon(1e-12));
  CHECK(tr.final_threshold == doctest::Approx(3.0 * 2.0 * std::pow(eps, 0.6)).epsilon(1e-12));

  // The final bound is monotone in m (hence in eps) at fixed M.
  double last = 0.0;
  for (double m : {1e-6, 1e-4, 1e-2}) {
    const double bound = theorem1_trace(2.0, m, 1.8, 2.0).final_threshold;
    CHECK(bound > last);
    last = bound;
  }

  CHECK_THROWS_AS(theorem1_trace(0.5, 0.01, 1.8, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem1_trace(2.0, 0.01, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("theorem 2 trace: monomials at the canonical example") {
  const double eps = 1.0 / 32.0;
  const auto tr = theorem2_trace(1.0, eps / 2.0, eps, 1.0);
  CHECK(tr.theta == doctest::Approx(std::sqrt(eps)).epsilon(1e-15));
  REQUIRE(tr.monomials.size() == 5);
  for (const auto& [name, value] : tr.monomials) {
    CAPTURE(name);
    CHECK(value <= tr.sqrt_epsilon * (1.0 + 1e-12));
  }
  CHECK(tr.within_sqrt_eps);

  const auto nom = theorem2_trace(1.0, 0.0, eps, 1.0);
  CHECK(nom.monomials[0].second == 0.0);
  CHECK(nom.monomials[2].second == 0.0);
  CHECK(nom.monomials[3].second == 0.0);
  CHECK(nom.monomials[1].second > 0.0);

  CHECK_THROWS_AS(theorem2_trace(1.0, 0.001, 1.0 / 16.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem2_trace(1.0, 0.1, 0.05, 1.0), std::invalid_argument);  // Mm >= eps
}

TEST_CASE("control check: degenerate shear branch and finite Beltrami ratios") {
  GridSpec g{48, kTwoPi, 25, 0.0, 1.5};
  const SampledFlow shear = make_shear_flow(g);
  FunctionalEvaluator ev(shear);
  const auto rep = control_check(ev, g.center(), g.t1, {1.2, 0.5, 2}, 2.0);
  CHECK(rep.degenerate);  // E_bar << 1: outside the lemma hypothesis
  CHECK(rep.e_bar < 1.0);

  const SampledFlow bel = make_beltrami_flow(g, {.a = 3.0, .b = 3.0, .c = 3.0});
  FunctionalEvaluator evb(bel);
  const auto repb = control_check(evb, g.center(), g.t1, {1.2, 0.5, 2}, 2.0);
  CHECK(std::isfinite(repb.ratio_AD));
  CHECK(repb.ratio_AD > 0.0);
  CHECK(std::isfinite(repb.ratio_P));
}

TEST_CASE("scan: empty input, per-point errors, order independence") {
  GridSpec g{48, kTwoPi, 17, 0.0, 1.0};
  const SampledFlow flow = make_beltrami_flow(g);

  ScanSpec empty;
  empty.ladder = {0.7, 0.75, 2};
  CHECK(scan_grid(flow, empty).empty());

  ScanSpec spec;
  spec.ladder = {0.7, 0.75, 2};
  spec.criteria = {CriterionId::CKN, CriterionId::Theorem2};
  spec.epsilon = 0.1;
  const Vec3 c = g.center();
  spec.points = {{c, g.t1}, {c, 0.05}};  // the second has no time headroom
  auto rows = scan_grid(flow, spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ok);
  CHECK(rows[0].verdicts.size() == 2);
  CHECK_FALSE(rows[1].ok);
  CHECK_FALSE(rows[1].error.empty());

  spec.threads = 2;
  auto rows2 = scan_grid(flow, spec);
  REQUIRE(rows2.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows2[i].ok == rows[i].ok);
    if (rows[i].ok) CHECK(rows2[i].e_bar == rows[i].e_bar);
  }

  // Theorem 1 over a forced flow is rejected up front.
  GridSpec gf{48, kTwoPi, 17, 0.0, 1.0};
  RandomFlowOptions opt;
  opt.force_amplitude = 0.3;
  const SampledFlow forced = make_random_divfree_flow(gf, 1, opt);
  ScanSpec t1spec;
  t1spec.ladder = {0.7, 0.75, 2};
  t1spec.q = 1.9;
  t1spec.criteria = {CriterionId::Theorem1};
  t1spec.points = {{gf.center(), gf.t1}};
  CHECK_THROWS_AS(scan_grid(forced, t1spec), std::invalid_argument);
}

TEST_CASE("beltrami interior points are regular under every criterion") {
  GridSpec g{32, kTwoPi, 33, 0.0, 2.0};
  // Strong decay: by t = 2 the field is ~e^{-2} of its initial size and the
  // small-scale tail estimates sit far below the threshold.
  const SampledFlow flow = make_beltrami_flow(g, {.a = 0.5, .b = 0.5, .c = 0.5});
  ScanSpec spec;
  spec.ladder = auto_ladder(g, 0.8, 0.5);
  spec.epsilon = 0.1;
  spec.criteria = {CriterionId::CKN, CriterionId::Theorem2, CriterionId::Seregin};
  const Vec3 c = g.center();
  for (double dx : {-0.4, 0.0, 0.4})
    for (double dy : {-0.4, 0.4}) spec.points.push_back({{c[0] + dx, c[1] + dy, c[2]}, g.t1});
  const auto rows = scan_grid(flow, spec);
  for (const auto& row : rows) {
    REQUIRE(row.ok);
    for (const auto& v : row.verdicts) {
      CAPTURE(to_string(v.id));
      CHECK(v.decision == Decision::Regular);
    }
  }
}
