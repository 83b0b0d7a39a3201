#include "cknscope/criterion.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace cknscope {

std::vector<double> ScaleLadder::radii() const {
  if (!(r_max > 0.0) || !(rho > 0.0 && rho < 1.0) || count < 1)
    throw std::invalid_argument("ScaleLadder: need r_max > 0, rho in (0,1), count >= 1");
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = r_max * std::pow(rho, k);
  return r;
}

ScaleLadder auto_ladder(const GridSpec& grid, double r_max, double rho, double min_r_cells) {
  const double floor_r = std::max(min_r_cells * grid.spacing(), 2.0 * std::sqrt(grid.dt()));
  if (r_max < floor_r) throw std::invalid_argument("auto_ladder: r_max below the resolvable floor");
  ScaleLadder ladder;
  ladder.r_max = r_max;
  ladder.rho = rho;
  ladder.count = 1 + static_cast<int>(std::floor(std::log(floor_r / r_max) / std::log(rho) + 1e-12));
  return ladder;
}

ScaleSweep scale_sweep(const FunctionalEvaluator& ev, const Vec3& x, double t,
                       const ScaleLadder& ladder, double q) {
  ScaleSweep sweep;
  sweep.x = x;
  sweep.t = t;
  sweep.q = q;
  sweep.has_pressure = ev.flow().has_pressure();
  sweep.r = ladder.radii();
  for (double r : sweep.r) {
    sweep.Eq.push_back(ev.E_q(x, t, r, q));
    sweep.A.push_back(ev.A(x, t, r));
    if (sweep.has_pressure) {
      sweep.D.push_back(ev.D(x, t, r));
      sweep.P.push_back(ev.P(x, t, r));
    }
  }
  return sweep;
}

ScaleSweep scale_sweep(const SampledFlow& flow, const Vec3& x, double t, const ScaleLadder& ladder,
                       double q) {
  FunctionalEvaluator ev(flow);
  return scale_sweep(ev, x, t, ladder, q);
}

ScaleLimits estimate_limits(const ScaleSweep& sweep, int tail_length) {
  const int K = static_cast<int>(sweep.r.size());
  if (K == 0) throw std::invalid_argument("estimate_limits: empty sweep");
  if (tail_length <= 0) tail_length = std::max(1, K / 2);
  if (tail_length > K) throw std::invalid_argument("estimate_limits: tail longer than ladder");
  ScaleLimits lim;
  lim.tail_length = tail_length;
  // Radii decrease along the ladder; the tail is the last tail_length rungs.
  lim.E_bar = sweep.Eq[K - tail_length];
  lim.E_under = sweep.Eq[K - tail_length];
  for (int i = K - tail_length; i < K; ++i) {
    lim.E_bar = std::max(lim.E_bar, sweep.Eq[i]);
    lim.E_under = std::min(lim.E_under, sweep.Eq[i]);
  }
  return lim;
}

const char* to_string(CriterionId id) {
  switch (id) {
    case CriterionId::Theorem1: return "theorem1";
    case CriterionId::Theorem2: return "theorem2";
    case CriterionId::CKN: return "ckn";
    case CriterionId::Seregin: return "seregin";
  }
  return "?";
}

const char* to_string(Decision d) { return d == Decision::Regular ? "regular" : "not-implied"; }

CriterionVerdict theorem1_verdict(const ScaleLimits& limits, double q, double epsilon,
                                  bool force_free) {
  if (!force_free) throw std::invalid_argument("theorem1_verdict: hypothesis requires f = 0");
  if (q < 1.8 - 1e-12 || q >= 2.0)
    throw std::invalid_argument(
        "theorem1_verdict: q must lie in [9/5, 2); q = 2 is theorem2_verdict");
  CriterionVerdict v;
  v.id = CriterionId::Theorem1;
  v.epsilon = epsilon;
  v.e_bar = limits.E_bar;
  v.e_under = limits.E_under;
  const double expo = (5.0 - q) / (q - 1.0);
  v.product = std::pow(limits.E_bar, expo) * limits.E_under;
  v.threshold = epsilon;
  v.decision = v.product < epsilon ? Decision::Regular : Decision::NotImplied;
  return v;
}

CriterionVerdict theorem2_verdict(const ScaleLimits& limits, double epsilon) {
  CriterionVerdict v;
  v.id = CriterionId::Theorem2;
  v.epsilon = epsilon;
  v.e_bar = limits.E_bar;
  v.e_under = limits.E_under;
  v.product = limits.E_bar * limits.E_under;
  v.threshold = epsilon;
  v.decision = v.product < epsilon ? Decision::Regular : Decision::NotImplied;
  if (limits.E_bar > 0.0) {
    const double cut = epsilon / limits.E_bar;
    v.note = "threshold form: E_under < eps/M = " + std::to_string(cut) +
             (limits.E_under < cut ? " (met)" : " (not met)");
  }
  return v;
}

CriterionVerdict ckn_verdict(const ScaleSweep& sweep, double epsilon, int tail_length) {
  if (std::abs(sweep.q - 2.0) > 1e-12)
    throw std::invalid_argument("ckn_verdict: the classical criterion reads the q = 2 sweep");
  const ScaleLimits limits = estimate_limits(sweep, tail_length);
  CriterionVerdict v;
  v.id = CriterionId::CKN;
  v.epsilon = epsilon;
  v.e_bar = limits.E_bar;
  v.e_under = limits.E_under;
  v.product = limits.E_bar;
  v.threshold = epsilon;
  v.decision = limits.E_bar < epsilon ? Decision::Regular : Decision::NotImplied;
  return v;
}

CriterionVerdict seregin_verdict(const ScaleLimits& limits, double M_cap, double epsilon_at_cap) {
  CriterionVerdict v;
  v.id = CriterionId::Seregin;
  v.epsilon = epsilon_at_cap;
  v.e_bar = limits.E_bar;
  v.e_under = limits.E_under;
  v.product = limits.E_under;
  v.threshold = epsilon_at_cap;
  v.decision = (limits.E_bar <= M_cap && limits.E_under < epsilon_at_cap) ? Decision::Regular
                                                                          : Decision::NotImplied;
  v.note = "M_cap=" + std::to_string(M_cap);
  return v;
}

double seregin_default_epsilon(double epsilon, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("seregin_default_epsilon: M must be positive");
  return epsilon / M;
}

IterationTrace iterate_Y(double beta, double q, double M, double Y0, int steps) {
  if (beta < 2.0) throw std::invalid_argument("iterate_Y: beta must be >= 2");
  if (!(M > 1.0)) throw std::invalid_argument("iterate_Y: M must exceed 1");
  if (q < 1.8 - 1e-12 || q > 2.0 + 1e-12)
    throw std::invalid_argument("iterate_Y: q must lie in [9/5, 2]");
  if (steps < 0) throw std::invalid_argument("iterate_Y: steps must be nonnegative");
  IterationTrace tr;
  tr.beta = beta;
  tr.q = q;
  tr.M = M;
  tr.theta = 1.0 / (2.0 * beta);
  tr.increment = std::pow(2.0 * beta, 6.0 / (q - 1.0)) * std::pow(M, 2.0 / (q - 1.0));
  tr.gamma = 2.0 * std::pow(2.0 * beta, 6.0 / (q - 1.0));
  tr.limit = tr.gamma * std::pow(M, 2.0 / (q - 1.0));
  tr.Y.reserve(steps + 1);
  tr.Y.push_back(Y0);
  double y = Y0;
  for (int k = 0; k < steps; ++k) {
    y = 0.5 * y + tr.increment;
    tr.Y.push_back(y);
  }
  return tr;
}

Theorem1Trace theorem1_trace(double M, double m, double q, double beta) {
  if (!(M > 1.0)) throw std::invalid_argument("theorem1_trace: needs M > 1");
  if (m < 0.0 || m > M) throw std::invalid_argument("theorem1_trace: needs 0 <= m <= M");
  if (q < 1.8 - 1e-12 || q >= 2.0)
    throw std::invalid_argument("theorem1_trace: q must lie in [9/5, 2)");
  if (!(beta > 0.0)) throw std::invalid_argument("theorem1_trace: beta must be positive");
  Theorem1Trace tr;
  tr.M = M;
  tr.m = m;
  tr.q = q;
  tr.beta = beta;
  if (m == 0.0) {
    // Trivial branch: theta can be taken arbitrarily small, then n large, so
    // the bound vanishes.
    tr.trivial_branch = true;
    return tr;
  }
  tr.epsilon = std::pow(M, (5.0 - q) / (q - 1.0)) * m;
  tr.theta = std::pow(std::pow(M, -q / (q - 1.0)) * m, 0.2);
  tr.term_velocity = beta * std::pow(tr.theta, 3.0) * std::pow(M, 3.0 / (q - 1.0));
  tr.term_gradient =
      beta * std::pow(tr.theta, -2.0) * std::pow(M, (3.0 - q) / (q - 1.0)) * m;
  tr.bound_direct = tr.term_velocity + tr.term_gradient;
  tr.bound_recombined = 2.0 * beta * std::pow(tr.epsilon, 0.6);
  tr.final_threshold = 3.0 * beta * std::pow(tr.epsilon, 0.6);
  return tr;
}

Theorem2Trace theorem2_trace(double M, double m, double epsilon, double beta_structural) {
  if (!(M >= 1.0)) throw std::invalid_argument("theorem2_trace: needs M >= 1");
  if (m < 0.0) throw std::invalid_argument("theorem2_trace: needs m >= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0 / 16.0))
    throw std::invalid_argument("theorem2_trace: needs 0 < epsilon < 1/16");
  if (!(M * m < epsilon)) throw std::invalid_argument("theorem2_trace: needs M m < epsilon");
  if (!(beta_structural > 0.0))
    throw std::invalid_argument("theorem2_trace: beta must be positive");
  Theorem2Trace tr;
  tr.M = M;
  tr.m = m;
  tr.epsilon = epsilon;
  tr.beta = beta_structural;
  tr.theta = std::sqrt(epsilon) / M;
  const double th = tr.theta;
  tr.monomials = {{"theta M^2 m", th * M * M * m},
                  {"theta^2 M^2", th * th * M * M},
                  {"theta^-1 m", m / th},
                  {"theta^-2 m^2", m * m / (th * th)},
                  {"theta^-2 M^-2 eps^2", epsilon * epsilon / (th * th * M * M)}};
  tr.max_monomial = 0.0;
  for (const auto& [name, value] : tr.monomials) {
    if (value >= tr.max_monomial) {
      tr.max_monomial = value;
      tr.dominating = name;
    }
  }
  tr.sqrt_epsilon = std::sqrt(epsilon);
  tr.within_sqrt_eps = tr.max_monomial <= beta_structural * tr.sqrt_epsilon;
  return tr;
}

ControlReport control_check(const FunctionalEvaluator& ev, const Vec3& x, double t,
                            const ScaleLadder& ladder, double q) {
  ControlReport rep;
  rep.q = q;
  const ScaleSweep sweep = scale_sweep(ev, x, t, ladder, q);
  rep.r = sweep.r;
  rep.A = sweep.A;
  rep.D = sweep.D;
  rep.P = sweep.P;
  rep.Eq = sweep.Eq;
  const ScaleLimits lim = estimate_limits(sweep, 0);
  rep.e_bar = lim.E_bar;
  const int K = static_cast<int>(sweep.r.size());
  const int tail0 = K - lim.tail_length;
  for (int i = tail0; i < K; ++i) {
    double ad = sweep.A[i] + (sweep.has_pressure ? sweep.D[i] : 0.0);
    rep.tail_AD = std::max(rep.tail_AD, ad);
    if (sweep.has_pressure) rep.tail_P = std::max(rep.tail_P, sweep.P[i]);
  }
  rep.degenerate = !(rep.e_bar > 1.0);
  if (rep.e_bar > 0.0) {
    rep.ratio_AD = rep.tail_AD / std::pow(rep.e_bar, 2.0 / (q - 1.0));
    rep.ratio_P = rep.tail_P / (rep.e_bar * rep.e_bar);
  }
  return rep;
}

std::vector<ScanRow> scan_grid(const SampledFlow& flow, const ScanSpec& spec) {
  bool need_q2 = false, need_t1 = false;
  for (CriterionId id : spec.criteria) {
    if (id == CriterionId::Theorem1) {
      need_t1 = true;
      if (flow.has_force())
        throw std::invalid_argument("scan_grid: theorem1 requires a force-free flow");
      if (spec.q >= 2.0)
        throw std::invalid_argument("scan_grid: theorem1 needs q < 2; q = 2 is theorem2");
    } else {
      need_q2 = true;  // the classical criteria read the q = 2 sweep
    }
  }

  FunctionalEvaluator ev(flow);
  std::vector<ScanRow> rows(spec.points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.points.size()) return;
      ScanRow& row = rows[i];
      row.z = spec.points[i];
      try {
        ScaleSweep sweep2, sweep1;
        ScaleLimits lim2, lim1;
        if (need_q2) {
          sweep2 = scale_sweep(ev, row.z.x, row.z.t, spec.ladder, 2.0);
          lim2 = estimate_limits(sweep2, spec.tail_length);
        }
        if (need_t1) {
          sweep1 = scale_sweep(ev, row.z.x, row.z.t, spec.ladder, spec.q);
          lim1 = estimate_limits(sweep1, spec.tail_length);
        }
        const ScaleLimits& lead = need_q2 ? lim2 : lim1;
        row.e_bar = lead.E_bar;
        row.e_under = lead.E_under;
        for (CriterionId id : spec.criteria) {
          switch (id) {
            case CriterionId::Theorem1:
              row.verdicts.push_back(theorem1_verdict(lim1, spec.q, spec.epsilon));
              break;
            case CriterionId::Theorem2:
              row.verdicts.push_back(theorem2_verdict(lim2, spec.epsilon));
              break;
            case CriterionId::CKN:
              row.verdicts.push_back(ckn_verdict(sweep2, spec.epsilon, spec.tail_length));
              break;
            case CriterionId::Seregin:
              row.verdicts.push_back(seregin_verdict(
                  lim2, spec.M_cap, seregin_default_epsilon(spec.epsilon, spec.M_cap)));
              break;
          }
        }
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const int threads = std::max(1, spec.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace cknscope
