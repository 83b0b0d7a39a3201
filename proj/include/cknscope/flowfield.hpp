#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "cknscope/grid.hpp"

namespace cknscope {

// Region of the box where functionals may be evaluated.  Windowed fixtures
// (shear, self-similar) are exact only inside a ball of radius L/4 around the
// box center; globally periodic smooth flows admit any center with ball radii
// up to just under half the box.
struct AnalysisRegion {
  bool windowed = false;
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;  // only meaningful when windowed

  static AnalysisRegion full_box() { return {}; }
  static AnalysisRegion window(const Vec3& c, double r) { return {true, c, r}; }

  // Largest admissible ball radius around x.
  double max_ball_radius(const GridSpec& grid, const Vec3& x) const;
};

// Time-separable structure hint attached by generators:
//   v(x, t_j) = sum_a modulation[a][j] * base_a(x).
// Lets gradient and pressure evaluation reuse per-base spectral work.  Purely
// an optimization; the materialized arrays are always authoritative.
struct SeparableVelocity {
  std::vector<std::vector<double>> bases;       // each: interleaved 3-vector slice
  std::vector<std::vector<double>> modulation;  // [base][time]
};

// Discrete space-time flow sample: the stand-in for (v, p, f).
struct SampledFlow {
  GridSpec grid;
  VectorField velocity;
  std::optional<ScalarField> pressure;
  std::optional<VectorField> force;
  std::string metadata;
  AnalysisRegion region = AnalysisRegion::full_box();
  std::shared_ptr<const SeparableVelocity> separable;  // may be null

  bool has_pressure() const { return pressure.has_value(); }
  bool has_force() const { return force.has_value(); }
};

// Steady unidirectional shear: v = (s(x2), 0, 0) with s(x2) = slope*(x2 - c2)
// inside |x2 - c2| <= L/4 and smoothly windowed to zero beyond 3L/8.  Exact
// steady solution with |grad v| = slope on the analysis window; p = 0, f = 0.
SampledFlow make_shear_flow(const GridSpec& grid, double slope = 1.0);

struct BeltramiParams {
  double a = 1.0, b = 1.0, c = 1.0;
  double viscosity = 1.0;  // the toolkit works at unit viscosity
  int mode = 1;            // integer mode index on the box
};

// Decaying Beltrami (ABC) field, an exact unsteady solution with
// p = -|v|^2/2 and f = 0.
SampledFlow make_beltrami_flow(const GridSpec& grid, const BeltramiParams& params = {});

// Focused non-solution fixture v(x,t) = (T-t)^{-1/2} U((x-xc)/sqrt(T-t)) with
// U = curl(psi(|y|^2) e3), psi(s) = sigma * exp(-s).  Slices at t >= T are
// zero.  The scaled gradient functional at (xc, T) is radius independent up
// to window/discretization error.
SampledFlow make_selfsimilar_fixture(const GridSpec& grid, double blowup_time, double profile_scale);

struct RandomFlowOptions {
  int max_wavenumber = 4;
  double amplitude = 1.0;
  // Optional body force; zero amplitude disables it.
  int force_wavenumber = 2;
  double force_amplitude = 0.0;
};

// Band-limited random solenoidal field, smoothly modulated in time, with
// pressure recovered from the velocity (and force).  Deterministic in the
// seed, independent of grid resolution for fixed physical parameters.
SampledFlow make_random_divfree_flow(const GridSpec& grid, std::uint64_t seed,
                                     const RandomFlowOptions& options);
SampledFlow make_random_divfree_flow(const GridSpec& grid, std::uint64_t seed, int max_wavenumber,
                                     double amplitude);

// Spectral velocity gradient of every slice.
TensorField gradient(const SampledFlow& flow);

// Largest discrete divergence over all slices (spectral divergence).
double divergence_max(const SampledFlow& flow);

// Max-norm of the discrete momentum residual (d_t - lap)v + (v.grad)v +
// grad p - f over interior slices; time derivative by central differences.
double momentum_residual_max(const SampledFlow& flow);

// NSFLOW1 container: text header, blank line, little-endian float64 payload.
void save_flow(const SampledFlow& flow, const std::string& path);
SampledFlow load_flow(const std::string& path);

}  // namespace cknscope
