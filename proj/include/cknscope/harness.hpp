#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cknscope/functionals.hpp"

namespace cknscope {

struct CheckConfig {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
  double r = 0.0;
  double theta = 1.0;
  double q = 2.0;
  double k = 0.25;
  int resolution = 0;
  std::uint64_t seed = 0;
};

// One lemma instance: left side, named right-side terms, and their ratio.
struct InequalityCheck {
  std::string lemma;
  std::string variant;  // distinguishes e.g. the two splittings of L51
  CheckConfig config;
  double lhs = 0.0;
  std::vector<std::pair<std::string, double>> rhs_terms;
  double rhs_sum = 0.0;
  double ratio = 0.0;       // lhs / rhs_sum when rhs_sum > 0
  bool degenerate = false;  // rhs_sum == 0; passes only when lhs <= abs_tol
  bool pass = false;
  double abs_tol = 0.0;
  double residual = 0.0;  // |lhs - rhs_sum| / scale; the energy balance gap
};

// Smooth space-time cutoff: 1 on Q(z, r), 0 outside Q(z, 2r), with
// |d_t phi| + |lap phi| + |grad phi|^2 of order r^-2.
struct EnergyBalanceParams {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
  double r = 0.0;
};

// Evaluates both sides of the localized energy identity on an exact-solution
// fixture; residual is the relative gap between them.
InequalityCheck check_energy_balance(const SampledFlow& flow, const EnergyBalanceParams& params);

InequalityCheck check_local_energy_I(const FunctionalEvaluator& ev, const Vec3& x, double t, double r);
InequalityCheck check_local_energy_II(const FunctionalEvaluator& ev, const Vec3& x, double t, double r);
InequalityCheck check_pressure_I(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                 double theta);
InequalityCheck check_pressure_II(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                  double theta);
std::vector<InequalityCheck> check_C_split(const FunctionalEvaluator& ev, const Vec3& x, double t,
                                           double r, double theta);
InequalityCheck check_interp_I(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                               double q, double k);
InequalityCheck check_interp_II(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                                double theta);
InequalityCheck check_C23_bound(const FunctionalEvaluator& ev, const Vec3& x, double t, double r);
InequalityCheck check_X_decay(const FunctionalEvaluator& ev, const Vec3& x, double t, double r,
                              double theta, double q, double k);

// Flow-taking wrappers (build a one-shot evaluator).
InequalityCheck check_local_energy_I(const SampledFlow& flow, const Vec3& x, double t, double r);
InequalityCheck check_local_energy_II(const SampledFlow& flow, const Vec3& x, double t, double r);
InequalityCheck check_pressure_I(const SampledFlow& flow, const Vec3& x, double t, double r,
                                 double theta);
InequalityCheck check_pressure_II(const SampledFlow& flow, const Vec3& x, double t, double r,
                                  double theta);

// (v, p, f) -> (a v, a^2 p, a^2 f); the transform under which every
// functional scales by a known power.
SampledFlow amplitude_scaled(const SampledFlow& flow, double alpha);

struct SuiteSpec {
  int n_fields = 200;
  std::uint64_t seed0 = 1;
  std::vector<int> resolutions{32, 64};
  double force_fraction = 0.25;
  int threads = 1;
  // Field family (fixed physical parameters across resolutions).
  int max_wavenumber = 6;
  double amplitude = 1.0;
  int force_wavenumber = 3;
  double force_amplitude = 0.4;
  // Restrict to one lemma id ("L52", ...); empty means all nine.
  std::string only_lemma;
};

struct ConstantFit {
  std::string lemma;
  int samples = 0;
  double max_ratio = 0.0;
  double p95_ratio = 0.0;
  std::map<int, double> max_by_resolution;
  double stability_rel = 0.0;  // spread of per-resolution maxima
  bool stable = false;         // spread within 25%
};

struct SuiteReport {
  SuiteSpec spec;
  std::vector<InequalityCheck> checks;
  std::vector<ConstantFit> fits;
};

// Runs every checker over the generated random suite at each resolution and
// aggregates the empirical constants.
SuiteReport fit_constants(const SuiteSpec& spec);

// The grid the suite evaluates on, exposed so tests and the CLI agree.
GridSpec suite_grid(int n);

}  // namespace cknscope
