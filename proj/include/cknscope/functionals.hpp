#pragma once

#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "cknscope/geometry.hpp"

namespace cknscope {

struct FunctionalParams {
  std::vector<double> q_grid{1.8, 1.9, 2.0};
  int pressure_search_iters = 60;  // ternary-search iterations for the inf over c in P
  CylinderLimits limits = CylinderLimits::tight();
};

// Every scaled functional at one (z, r).
struct FunctionalReport {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
  double r = 0.0;
  double A = 0.0;
  double C = 0.0;
  double C_tilde = 0.0;
  double G = 0.0;
  double E2 = 0.0;
  std::vector<std::pair<double, double>> Eq;  // (q, E_q)
  double D = 0.0;
  double P = 0.0;
  double F = 0.0;
  bool has_pressure = false;
  bool has_force = false;
};

// Evaluates the scaled functionals of one flow.  Caches the per-slice
// |grad v| field (combining per-base gradients for generator-separable
// velocities), so it is the right object to reuse across many (z, r).
// Thread safe for concurrent evaluations.
class FunctionalEvaluator {
 public:
  explicit FunctionalEvaluator(const SampledFlow& flow, FunctionalParams params = {});
  ~FunctionalEvaluator();

  const SampledFlow& flow() const { return *flow_; }
  const FunctionalParams& params() const { return params_; }

  double A(const Vec3& x, double t, double r) const;
  double C(const Vec3& x, double t, double r) const;
  double C_tilde(const Vec3& x, double t, double r) const;
  double D(const Vec3& x, double t, double r) const;
  double E_q(const Vec3& x, double t, double r, double q) const;
  double E(const Vec3& x, double t, double r) const { return E_q(x, t, r, 2.0); }
  double G(const Vec3& x, double t, double r) const;
  double P(const Vec3& x, double t, double r) const;
  double P_objective(const Vec3& x, double t, double r, double c) const;
  double P_minimizer(const Vec3& x, double t, double r) const;
  double F(const Vec3& x, double t, double r) const;

  FunctionalReport report(const Vec3& x, double t, double r) const;

  // Per-slice |grad v| (scalar slice view), lazily computed and cached.
  std::span<const double> gradient_magnitude_slice(int jt) const;

  // max(|v|, sqrt(|p|)) over the whole sample; cached (one full-array scan).
  double amplitude_scale() const;

 private:
  struct Impl;
  void require(const Vec3& x, double t, double r) const;
  double A_impl(const Vec3& x, double t, double r) const;
  double C_impl(const Vec3& x, double t, double r) const;
  double C_tilde_impl(const Vec3& x, double t, double r) const;
  double D_impl(const Vec3& x, double t, double r) const;
  double E_q_impl(const Vec3& x, double t, double r, double q) const;
  double G_impl(const Vec3& x, double t, double r) const;
  double F_impl(const Vec3& x, double t, double r) const;

  const SampledFlow* flow_;
  FunctionalParams params_;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrappers matching the per-functional operations.
double eval_A(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_C(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_Ctilde(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_D(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_Eq(const SampledFlow& flow, const Vec3& x, double t, double r, double q);
double eval_E(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_G(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_P(const SampledFlow& flow, const Vec3& x, double t, double r);
double eval_F(const SampledFlow& flow, const Vec3& x, double t, double r);
FunctionalReport eval_report(const SampledFlow& flow, const Vec3& x, double t, double r,
                             const FunctionalParams& params = {});

}  // namespace cknscope
