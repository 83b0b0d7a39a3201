#include "cknscope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cknscope {

namespace {

// Septic smoothstep: s(0)=0, s(1)=1 with three vanishing derivatives at both
// ends, so the assembled cutoff is C^3.
double sstep(double w) { return w * w * w * w * (35.0 - 84.0 * w + 70.0 * w * w - 20.0 * w * w * w); }
double sstep_d1(double w) {
  const double a = w * (1.0 - w);
  return 140.0 * a * a * a;
}
double sstep_d2(double w) {
  const double a = w * (1.0 - w);
  return 420.0 * a * a * (1.0 - 2.0 * w);
}

// Spatial profile: 1 for u <= 1, 0 for u >= 2 (u = |x - xc| / r).
double bump(double u) {
  if (u <= 1.0) return 1.0;
  if (u >= 2.0) return 0.0;
  return 1.0 - sstep(u - 1.0);
}
double bump_d1(double u) {
  if (u <= 1.0 || u >= 2.0) return 0.0;
  return -sstep_d1(u - 1.0);
}
double bump_d2(double u) {
  if (u <= 1.0 || u >= 2.0) return 0.0;
  return -sstep_d2(u - 1.0);
}

// Temporal profile: 1 for tau <= 1, 0 for tau >= 4 (tau = (t - s) / r^2).
double tbump(double tau) {
  if (tau <= 1.0) return 1.0;
  if (tau >= 4.0) return 0.0;
  return 1.0 - sstep((tau - 1.0) / 3.0);
}
double tbump_d1(double tau) {
  if (tau <= 1.0 || tau >= 4.0) return 0.0;
  return -sstep_d1((tau - 1.0) / 3.0) / 3.0;
}

void finish_check(InequalityCheck& chk, const FunctionalEvaluator& ev) {
  CompensatedSum sum;
  for (const auto& [name, value] : chk.rhs_terms) {
    (void)name;
    sum.add(value);
  }
  chk.rhs_sum = sum.value();
  const double scale = ev.amplitude_scale();
  chk.abs_tol = 1e-12 * scale * scale * scale;
  if (chk.rhs_sum > 0.0) {
    chk.ratio = chk.lhs / chk.rhs_sum;
    chk.degenerate = false;
    chk.pass = std::isfinite(chk.ratio) && chk.ratio >= 0.0;
  } else {
    chk.degenerate = true;
    chk.ratio = 0.0;
    chk.pass = chk.lhs <= chk.abs_tol;
  }
}

}  // namespace

InequalityCheck check_energy_balance(const SampledFlow& flow, const EnergyBalanceParams& params) {
  if (!flow.has_pressure()) throw std::invalid_argument("check_energy_balance: pressure required");
  const GridSpec& grid = flow.grid;
  require_valid_cylinder(grid, flow.region, {params.x, params.t, params.r},
                         CylinderLimits::standard());

  const double r = params.r;
  const double r2 = r * r;
  const double h = grid.spacing();
  const double h3 = h * h * h;
  const double L = grid.box_length;

  // Per-cell spatial factors of the cutoff, fixed across slices.
  struct CellFactor {
    std::uint32_t cell;
    double b;        // bump value
    double dir[3];   // grad phi spatial part: b'(u)/r * unit vector
    double lap;      // lap phi spatial part: (b'' + 2 b'/u) / r^2
  };
  std::vector<CellFactor> cells;
  for (int i1 = 0; i1 < grid.n; ++i1) {
    const double d1 = wrap_delta(grid.coord(i1) - params.x[0], L);
    for (int i2 = 0; i2 < grid.n; ++i2) {
      const double d2 = wrap_delta(grid.coord(i2) - params.x[1], L);
      for (int i3 = 0; i3 < grid.n; ++i3) {
        const double d3 = wrap_delta(grid.coord(i3) - params.x[2], L);
        const double rho = std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
        const double u = rho / r;
        if (u >= 2.0) continue;
        CellFactor cf;
        cf.cell = static_cast<std::uint32_t>(grid.cell_index(i1, i2, i3));
        cf.b = bump(u);
        const double b1 = bump_d1(u);
        if (rho > 1e-12 * r) {
          const double g = b1 / (r * rho);
          cf.dir[0] = g * d1;
          cf.dir[1] = g * d2;
          cf.dir[2] = g * d3;
          cf.lap = (bump_d2(u) + 2.0 * b1 / u) / r2;
        } else {
          cf.dir[0] = cf.dir[1] = cf.dir[2] = 0.0;
          cf.lap = 3.0 * bump_d2(0.0) / r2;  // zero in the flat core anyway
        }
        cells.push_back(cf);
      }
    }
  }

  FunctionalEvaluator ev(flow);
  const auto win = make_time_window(grid, params.t, 4.0 * r2, 5);
  if (std::abs(grid.time_at(win.inside_last) - params.t) > 1e-9 * (grid.t1 - grid.t0))
    throw std::invalid_argument("check_energy_balance: t must coincide with a time slice");

  CompensatedSum grad_term, term_heat, term_conv, term_pres, term_force;
  for (std::size_t wi = 0; wi < win.weight.size(); ++wi) {
    const int j = win.first + static_cast<int>(wi);
    const double wj = win.weight[wi];
    if (wj == 0.0) continue;
    const double tau = (params.t - grid.time_at(j)) / r2;
    const double tv = tbump(tau);
    // d/ds T((t-s)/r^2) = -T'(tau)/r^2, nonnegative since T falls in tau.
    const double tdot = -tbump_d1(tau) / r2;
    if (tv == 0.0 && tdot == 0.0) continue;

    const double* v = flow.velocity.slice(j).data();
    const double* p = flow.pressure->slice(j).data();
    const double* f = flow.has_force() ? flow.force->slice(j).data() : nullptr;
    auto gmag = ev.gradient_magnitude_slice(j);

    CompensatedSum sg, sh, sc, sp, sf;
    for (const auto& cf : cells) {
      const std::size_t c = cf.cell;
      const double* vv = v + 3 * c;
      const double vsq = vv[0] * vv[0] + vv[1] * vv[1] + vv[2] * vv[2];
      const double phi = cf.b * tv;
      const double dphi_ds = cf.b * tdot;
      const double lap_phi = cf.lap * tv;
      const double vdotgrad = (vv[0] * cf.dir[0] + vv[1] * cf.dir[1] + vv[2] * cf.dir[2]) * tv;
      if (phi != 0.0) sg.add(gmag[c] * gmag[c] * phi);
      sh.add(vsq * (dphi_ds + lap_phi));
      sc.add(vsq * vdotgrad);
      sp.add(p[c] * vdotgrad);
      if (f) {
        const double* ff = f + 3 * c;
        sf.add((ff[0] * vv[0] + ff[1] * vv[1] + ff[2] * vv[2]) * phi);
      }
    }
    grad_term.add(wj * sg.value() * h3);
    term_heat.add(wj * sh.value() * h3);
    term_conv.add(wj * sc.value() * h3);
    term_pres.add(wj * sp.value() * h3);
    if (f) term_force.add(wj * sf.value() * h3);
  }

  // End-time kinetic term; the cutoff equals its spatial profile at s = t.
  CompensatedSum end_term;
  {
    const int j_end = win.inside_last;
    const double* v = flow.velocity.slice(j_end).data();
    for (const auto& cf : cells) {
      const double* vv = v + 3 * cf.cell;
      end_term.add((vv[0] * vv[0] + vv[1] * vv[1] + vv[2] * vv[2]) * cf.b);
    }
  }

  InequalityCheck chk;
  chk.lemma = "E21";
  chk.config.x = params.x;
  chk.config.t = params.t;
  chk.config.r = params.r;
  const double lhs1 = end_term.value() * h3;
  const double lhs2 = 2.0 * grad_term.value();
  chk.lhs = lhs1 + lhs2;
  chk.rhs_terms = {{"heat", term_heat.value()},
                   {"convective", term_conv.value()},
                   {"pressure", 2.0 * term_pres.value()},
                   {"force", 2.0 * term_force.value()}};
  finish_check(chk, ev);
  double denom = std::max(std::abs(chk.lhs), std::abs(chk.rhs_sum));
  denom = std::max({denom, std::abs(lhs1), std::abs(lhs2)});
  for (const auto& [name, value] : chk.rhs_terms) {
    (void)name;
    denom = std::max(denom, std::abs(value));
  }
  chk.residual = denom > 0.0 ? std::abs(chk.lhs - chk.rhs_sum) / denom : 0.0;
  chk.pass = true;
  return chk;
}

InequalityCheck check_local_energy_I(const FunctionalEvaluator& ev, const Vec3& x, double t,
                                     double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("check_local_energy_I: need 0 < r <= 1");
  InequalityCheck chk;
  chk.lemma = "L31";
  chk.config = {.x = x, .t = t, .r = r};
  chk.lhs = ev.A(x, t, r) + ev.E(x, t, r);
  const double c2 = ev.C(x, t, 2.0 * r);
  const double d2 = ev.D(x, t, 2.0 * r);
  chk.rhs_terms = {{"C(2r)^{2/3}", std::pow(c2, 2.0 / 3.0)},
                   {"C(2r)", c2},
                   {"C(2r)^{1/3} D(2r)^{2/3}", std::cbrt(c2) * std::pow(d2, 2.0 / 3.0)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_local_energy_II(const FunctionalEvaluator& ev, const Vec3& x, double t,
                                      double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("check_local_energy_II: need 0 < r <= 1");
  InequalityCheck chk;
  chk.lemma = "L32";
  chk.config = {.x = x, .t = t, .r = r};
  chk.lhs = ev.A(x, t, r) + ev.E(x, t, r);
  const double e2 = ev.E(x, t, 2.0 * r);
  const double g2 = ev.G(x, t, 2.0 * r);
  chk.rhs_terms = {{"[1+E(2r)]G(2r)", (1.0 + e2) * g2}, {"P(2r)", ev.P(x, t, 2.0 * r)}};
  if (ev.flow().has_force()) chk.rhs_terms.emplace_back("F(2r)", ev.F(x, t, 2.0 * r));
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_pressure_I(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                 double theta) {
  if (!(theta > 0.0 && theta < 0.25))
    throw std::invalid_argument("check_pressure_I: need 0 < theta < 1/4");
  InequalityCheck chk;
  chk.lemma = "L41";
  chk.config = {.x = x, .t = t, .r = r, .theta = theta};
  chk.lhs = ev.D(x, t, theta * r);
  chk.rhs_terms = {{"theta D(r)", theta * ev.D(x, t, r)},
                   {"theta^-2 C~(r)", ev.C_tilde(x, t, r) / (theta * theta)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_pressure_II(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                  double theta) {
  if (!(theta > 0.0 && theta <= 0.25))
    throw std::invalid_argument("check_pressure_II: need 0 < theta <= 1/4");
  InequalityCheck chk;
  chk.lemma = "L44";
  chk.config = {.x = x, .t = t, .r = r, .theta = theta};
  chk.lhs = ev.P(x, t, 2.0 * theta * r);
  const double e = ev.E(x, t, r);
  chk.rhs_terms = {{"theta^2 P(r)", theta * theta * ev.P(x, t, r)},
                   {"theta^-2 E(r)^2", e * e / (theta * theta)}};
  if (ev.flow().has_force())
    chk.rhs_terms.emplace_back("theta^-2 F(r)", ev.F(x, t, r) / (theta * theta));
  finish_check(chk, ev);
  return chk;
}

std::vector<InequalityCheck> check_C_split(const FunctionalEvaluator& ev, const Vec3& x, double t,
                                           double r, double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("check_C_split: need 0 < theta <= 1");
  const double c_small = ev.C(x, t, theta * r);
  const double ct = ev.C_tilde(x, t, r);
  std::vector<InequalityCheck> out(2);

  out[0].lemma = "L51";
  out[0].variant = "C-split";
  out[0].config = {.x = x, .t = t, .r = r, .theta = theta};
  out[0].lhs = c_small;
  out[0].rhs_terms = {{"theta C(r)", theta * ev.C(x, t, r)},
                      {"theta^-2 C~(r)", ct / (theta * theta)}};
  finish_check(out[0], ev);

  out[1].lemma = "L51";
  out[1].variant = "A-split";
  out[1].config = out[0].config;
  out[1].lhs = c_small;
  out[1].rhs_terms = {{"theta^3 A(r)^{3/2}", theta * theta * theta * std::pow(ev.A(x, t, r), 1.5)},
                      {"theta^-2 C~(r)", ct / (theta * theta)}};
  finish_check(out[1], ev);
  return out;
}

InequalityCheck check_interp_I(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                               double q, double k) {
  const double klo = (3.0 - q) / (5.0 * q - 6.0);
  const double khi = (3.0 - q) / 3.0;
  if (q < 1.8 - 1e-12 || q > 2.0 + 1e-12 || k < klo - 1e-12 || k > khi + 1e-12)
    throw std::invalid_argument("check_interp_I: (q, k) outside the admissible window");
  InequalityCheck chk;
  chk.lemma = "L52";
  chk.config = {.x = x, .t = t, .r = r, .theta = 1.0, .q = q, .k = k};
  chk.lhs = ev.C_tilde(x, t, r);
  const double ea = (9.0 - 3.0 * q - 3.0 * q * k) / (6.0 - 2.0 * q);
  const double eb = 3.0 * k / (3.0 - q);
  chk.rhs_terms = {{"A^a Eq^b", std::pow(ev.A(x, t, r), ea) * std::pow(ev.E_q(x, t, r, q), eb)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_interp_II(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("check_interp_II: need 0 < theta <= 1");
  InequalityCheck chk;
  chk.lemma = "L54";
  chk.config = {.x = x, .t = t, .r = r, .theta = theta};
  chk.lhs = ev.G(x, t, theta * r);
  chk.rhs_terms = {{"theta^-1 E(r)", ev.E(x, t, r) / theta},
                   {"theta^2 A(r)", theta * theta * ev.A(x, t, r)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_C23_bound(const FunctionalEvaluator& ev, const Vec3& x, double t, double r) {
  InequalityCheck chk;
  chk.lemma = "L55";
  chk.config = {.x = x, .t = t, .r = r};
  chk.lhs = std::pow(ev.C(x, t, r), 2.0 / 3.0);
  chk.rhs_terms = {{"A(r)", ev.A(x, t, r)}, {"E(r)", ev.E(x, t, r)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_X_decay(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                              double theta, double q, double k) {
  if (!(theta > 0.0 && theta < 0.25))
    throw std::invalid_argument("check_X_decay: need 0 < theta < 1/4");
  const double klo = (3.0 - q) / (5.0 * q - 6.0);
  const double khi = (3.0 - q) / 3.0;
  if (q < 1.8 - 1e-12 || q > 2.0 + 1e-12 || k < klo - 1e-12 || k > khi + 1e-12)
    throw std::invalid_argument("check_X_decay: (q, k) outside the admissible window");
  InequalityCheck chk;
  chk.lemma = "L53";
  chk.config = {.x = x, .t = t, .r = r, .theta = theta, .q = q, .k = k};
  chk.lhs = ev.C(x, t, theta * r) + ev.D(x, t, theta * r);
  const double ea = (9.0 - 3.0 * q - 3.0 * q * k) / (6.0 - 2.0 * q);
  const double eb = 3.0 * k / (3.0 - q);
  chk.rhs_terms = {
      {"theta X(r)", theta * (ev.C(x, t, r) + ev.D(x, t, r))},
      {"theta^-2 A^a Eq^b",
       std::pow(ev.A(x, t, r), ea) * std::pow(ev.E_q(x, t, r, q), eb) / (theta * theta)}};
  finish_check(chk, ev);
  return chk;
}

InequalityCheck check_local_energy_I(const SampledFlow& flow, const Vec3& x, double t, double r) {
  return check_local_energy_I(FunctionalEvaluator(flow), x, t, r);
}
InequalityCheck check_local_energy_II(const SampledFlow& flow, const Vec3& x, double t, double r) {
  return check_local_energy_II(FunctionalEvaluator(flow), x, t, r);
}
InequalityCheck check_pressure_I(const SampledFlow& flow, const Vec3& x, double t, double r,
                                 double theta) {
  return check_pressure_I(FunctionalEvaluator(flow), x, t, r, theta);
}
InequalityCheck check_pressure_II(const SampledFlow& flow, const Vec3& x, double t, double r,
                                  double theta) {
  return check_pressure_II(FunctionalEvaluator(flow), x, t, r, theta);
}

SampledFlow amplitude_scaled(const SampledFlow& flow, double alpha) {
  SampledFlow out = flow;
  for (double& v : out.velocity.raw()) v *= alpha;
  if (out.has_pressure())
    for (double& p : out.pressure->raw()) p *= alpha * alpha;
  if (out.has_force())
    for (double& f : out.force->raw()) f *= alpha * alpha;
  if (flow.separable) {
    auto sep = std::make_shared<SeparableVelocity>(*flow.separable);
    for (auto& base : sep->bases)
      for (double& v : base) v *= alpha;
    out.separable = std::move(sep);
  }
  out.metadata += "|amplitude*" + std::to_string(alpha);
  return out;
}

GridSpec suite_grid(int n) {
  GridSpec grid;
  grid.n = n;
  grid.box_length = kTwoPi;
  grid.n_times = 102;
  grid.t0 = 0.0;
  grid.t1 = 4.04;
  return grid;
}

namespace {

struct SuiteJob {
  int field_index;
  int resolution;
};

bool lemma_selected(const SuiteSpec& spec, const char* lemma) {
  return spec.only_lemma.empty() || spec.only_lemma == lemma;
}

std::vector<InequalityCheck> run_suite_field(const SuiteSpec& spec, const SuiteJob& job) {
  const GridSpec grid = suite_grid(job.resolution);
  const std::uint64_t seed = spec.seed0 + static_cast<std::uint64_t>(job.field_index);

  RandomFlowOptions opt;
  opt.max_wavenumber = spec.max_wavenumber;
  opt.amplitude = spec.amplitude;
  if (spec.force_fraction > 0.0) {
    const int period = std::max(1, static_cast<int>(std::lround(1.0 / spec.force_fraction)));
    if (job.field_index % period == period - 1) {
      opt.force_wavenumber = spec.force_wavenumber;
      opt.force_amplitude = spec.force_amplitude;
    }
  }
  SampledFlow flow = make_random_divfree_flow(grid, seed, opt);

  FunctionalParams params;
  params.limits = CylinderLimits::coarse();
  params.q_grid = {2.0};
  FunctionalEvaluator ev(flow, params);

  const Vec3 x = grid.center();
  const double t = grid.t1;

  std::vector<InequalityCheck> checks;
  auto tag = [&](InequalityCheck chk) {
    chk.config.resolution = job.resolution;
    chk.config.seed = seed;
    checks.push_back(std::move(chk));
  };

  if (lemma_selected(spec, "L31")) tag(check_local_energy_I(ev, x, t, 0.5));
  if (lemma_selected(spec, "L32")) tag(check_local_energy_II(ev, x, t, 0.5));
  if (lemma_selected(spec, "L41")) tag(check_pressure_I(ev, x, t, 2.0, 0.2));
  if (lemma_selected(spec, "L44")) tag(check_pressure_II(ev, x, t, 0.9, 0.25));
  if (lemma_selected(spec, "L51"))
    for (auto& chk : check_C_split(ev, x, t, 0.8, 0.5)) tag(std::move(chk));
  if (lemma_selected(spec, "L52")) {
    const double pairs[4][2] = {{1.8, 0.4}, {2.0, 0.25}, {2.0, 1.0 / 3.0}, {1.9, 143.0 / 420.0}};
    for (const auto& qk : pairs) tag(check_interp_I(ev, x, t, 0.7, qk[0], qk[1]));
  }
  if (lemma_selected(spec, "L53")) {
    tag(check_X_decay(ev, x, t, 2.0, 0.2, 2.0, 0.25));
    tag(check_X_decay(ev, x, t, 2.0, 0.2, 1.8, 0.4));
  }
  if (lemma_selected(spec, "L54")) tag(check_interp_II(ev, x, t, 0.8, 0.5));
  if (lemma_selected(spec, "L55")) tag(check_C23_bound(ev, x, t, 0.7));
  return checks;
}

}  // namespace

SuiteReport fit_constants(const SuiteSpec& spec) {
  if (spec.n_fields < 1 || spec.resolutions.empty())
    throw std::invalid_argument("fit_constants: no samples");

  std::vector<SuiteJob> jobs;
  for (int f = 0; f < spec.n_fields; ++f)
    for (int n : spec.resolutions) jobs.push_back({f, n});

  std::vector<std::vector<InequalityCheck>> results(jobs.size());
  const int threads = std::max(1, spec.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      results[i] = run_suite_field(spec, jobs[i]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SuiteReport report;
  report.spec = spec;
  for (auto& r : results)
    for (auto& chk : r) report.checks.push_back(std::move(chk));

  std::map<std::string, std::vector<const InequalityCheck*>> by_lemma;
  for (const auto& chk : report.checks) by_lemma[chk.lemma].push_back(&chk);
  for (const auto& [lemma, list] : by_lemma) {
    ConstantFit fit;
    fit.lemma = lemma;
    std::vector<double> ratios;
    std::map<int, double> res_max;
    for (const auto* chk : list) {
      if (chk->degenerate) continue;
      ratios.push_back(chk->ratio);
      auto [it, inserted] = res_max.try_emplace(chk->config.resolution, chk->ratio);
      if (!inserted) it->second = std::max(it->second, chk->ratio);
    }
    fit.samples = static_cast<int>(ratios.size());
    if (!ratios.empty()) {
      std::sort(ratios.begin(), ratios.end());
      fit.max_ratio = ratios.back();
      fit.p95_ratio = ratios[static_cast<std::size_t>(std::ceil(0.95 * ratios.size())) - 1];
    }
    fit.max_by_resolution = res_max;
    if (res_max.size() >= 2) {
      double lo = res_max.begin()->second, hi = res_max.begin()->second;
      for (const auto& [n, v] : res_max) {
        (void)n;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      fit.stability_rel = hi > 0.0 ? (hi - lo) / hi : 0.0;
      fit.stable = fit.stability_rel <= 0.25;
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

}  // namespace cknscope
