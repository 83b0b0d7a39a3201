#include "cknscope/grid.hpp"

#include <cmath>

namespace cknscope {

void GridSpec::validate() const {
  if (n < 8) throw std::invalid_argument("GridSpec: n must be at least 8");
  if (!(box_length > 0.0)) throw std::invalid_argument("GridSpec: box_length must be positive");
  if (n_times < 2) throw std::invalid_argument("GridSpec: n_times must be at least 2");
  if (!(t1 > t0)) throw std::invalid_argument("GridSpec: need t0 < t1");
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace cknscope
