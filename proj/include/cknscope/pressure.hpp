#pragma once

#include <cstdint>
#include <vector>

#include "cknscope/flowfield.hpp"

namespace cknscope {

// Solves -lap p = d_j d_k (v_j v_k) - div f spectrally per slice with zero
// mean and attaches the result; any existing pressure is replaced.
void recover_pressure(SampledFlow& flow);

struct DecompositionOptions {
  double cg_rel_residual = 1e-10;
  int cg_max_iters = 50000;
};

// Local splitting p = p01 + p02 + ph on a ball at one time slice: p01 and
// p02 solve zero-Dirichlet Poisson problems on the grid cells whose centers
// lie inside the ball (velocity and force sources), ph is the remainder,
// harmonic up to discretization error.
struct PressureDecomposition {
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;
  int time_index = 0;
  std::vector<std::uint32_t> cells;     // patch cell indices within the slice
  std::vector<double> p_total;          // p restricted to the patch
  std::vector<double> p01, p02, ph;     // patch values
  std::vector<std::uint8_t> interior;   // 1 where all six neighbours are in the patch
  double harmonic_residual = 0.0;       // max |lap_h ph| over interior cells
  double boundary_residual = 0.0;       // max |p01| + |p02| on the outermost patch layer
  double cg_residual_v = 0.0, cg_residual_f = 0.0;
  int cg_iters_v = 0, cg_iters_f = 0;
};

PressureDecomposition decompose_local(const SampledFlow& flow, const Vec3& center, double radius,
                                      int time_index, const DecompositionOptions& options = {});

// Interior estimates of the harmonic remainder: gradient sup on an inner
// ball and the ball mean-value identity <ph>_B(inner) = ph(center).
struct HarmonicDiagnostics {
  double grad_sup_inner = 0.0;
  double center_value = 0.0;
  double ball_mean_inner = 0.0;
  double mean_value_gap = 0.0;  // |ball mean - center value|
};

HarmonicDiagnostics harmonic_interior_estimates(const PressureDecomposition& dec,
                                                const GridSpec& grid, double inner_radius);

}  // namespace cknscope
