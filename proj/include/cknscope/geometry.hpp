#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "cknscope/flowfield.hpp"
#include "cknscope/grid.hpp"

namespace cknscope {

// Space-time point z = (x, t) and radius r for Q(z, r) = B(x, r) x (t-r^2, t].
struct ParabolicCylinder {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
  double r = 0.0;
};

// Validation envelope for a cylinder evaluation.  standard() enforces the
// doubled-cylinder headroom (B(x,2r) in the region, (t-4r^2, t] in range)
// that the two-scale inequalities need; tight() validates exactly the set an
// operation integrates over.  min_r_cells = 4 is the full-accuracy quadrature
// bound; the survey harness drops to 2 cells at its smallest radii and trades
// quadrature accuracy for scale range.
struct CylinderLimits {
  double space_factor = 2.0;
  double time_factor = 4.0;
  double min_r_cells = 4.0;
  int min_slices = 5;

  static CylinderLimits standard() { return {}; }
  static CylinderLimits tight() { return {1.0, 1.0, 4.0, 5}; }
  static CylinderLimits coarse() { return {1.0, 1.0, 2.0, 5}; }
};

// Throws std::invalid_argument with a precise reason when invalid.
void require_valid_cylinder(const GridSpec& grid, const AnalysisRegion& region,
                            const ParabolicCylinder& cyl,
                            const CylinderLimits& limits = CylinderLimits::standard());

// Partial-cell quadrature weights of a ball: weight = fraction of the cell's
// volume inside B(x, r), from fixed 4^3 subsampling of boundary cells.
struct BallWeights {
  std::vector<std::uint32_t> cells;  // linear cell indices within a slice
  std::vector<double> weight;        // in [0, 1]
  double weight_sum = 0.0;           // sum of weights; volume = weight_sum * h^3
  double volume(double h) const { return weight_sum * h * h * h; }
};

// Cached per (n, L, x, r) quantized to grid units; safe for concurrent use.
std::shared_ptr<const BallWeights> ball_weights(const GridSpec& grid, const Vec3& x, double r);

// Integral over B(x, r) of a per-cell value, compensated accumulation.
double ball_integral(const GridSpec& grid, const BallWeights& w,
                     const std::function<double(std::uint32_t)>& cell_value);
double ball_integral(const GridSpec& grid, std::span<const double> scalar_slice, const Vec3& x,
                     double r);
double ball_mean(const GridSpec& grid, std::span<const double> scalar_slice, const Vec3& x, double r);

// Trapezoid weights over the slices meeting [t_end - length, t_end], with
// linear partial end segments; weights sum to the window length.
struct TimeWindow {
  int first = 0;                // first slice with nonzero weight
  std::vector<double> weight;   // per slice, starting at `first`
  int inside_first = 0;         // slices whose time lies inside the window
  int inside_last = 0;
  double t_start = 0.0, t_end = 0.0;
  int slice_count() const { return inside_last - inside_first + 1; }
};

TimeWindow make_time_window(const GridSpec& grid, double t_end, double length, int min_slices = 5);

// Sum of weight_j * per_slice(j) over the window.
double integrate_window(const TimeWindow& win, const std::function<double(int)>& per_slice);

// Discrete sup over the slices inside the window.
double window_sup(const TimeWindow& win, const std::function<double(int)>& per_slice);

// Convenience: integral of a scalar-valued cell functional over Q(z, r).
double cylinder_integral(const GridSpec& grid, const ParabolicCylinder& cyl,
                         const std::function<double(int, std::uint32_t)>& value_at,
                         int min_slices = 5);

// Kahan-compensated accumulator used by every quadrature loop.
class CompensatedSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace cknscope
