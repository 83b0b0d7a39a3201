#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cknscope {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

using Vec3 = std::array<double, 3>;

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Nearest periodic image of a coordinate difference on a torus of the given period.
inline double wrap_delta(double dx, double period) {
  dx = std::remainder(dx, period);
  return dx;
}

// Uniform periodic space-time grid.  Cell centers sit at i*h, i = 0..n-1,
// per axis with h = box_length/n; time slices are uniform on [t0, t1].
struct GridSpec {
  int n = 0;
  double box_length = kTwoPi;
  int n_times = 1;
  double t0 = 0.0;
  double t1 = 0.0;

  double spacing() const { return box_length / n; }
  double dt() const { return (t1 - t0) / (n_times - 1); }
  double coord(int i) const { return spacing() * i; }
  double time_at(int j) const { return t0 + dt() * j; }
  Vec3 center() const {
    const double c = 0.5 * box_length;
    return {c, c, c};
  }
  std::size_t slice_points() const {
    return static_cast<std::size_t>(n) * n * n;
  }
  std::size_t cell_index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * n + i2) * n + i3;
  }
  // Throws std::invalid_argument when the grid is unusable.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

// Dense space-time field with NC interleaved components per grid point.
// Layout matches the NSFLOW1 file format: time-major, then x1, x2, x3,
// components last.
template <int NC>
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& g)
      : grid_(g), data_(g.slice_points() * static_cast<std::size_t>(g.n_times) * NC, 0.0) {}

  const GridSpec& grid() const { return grid_; }
  bool empty() const { return data_.empty(); }
  static constexpr int components() { return NC; }

  double& at(int jt, int i1, int i2, int i3, int c = 0) {
    return data_[(slice_offset(jt) + grid_.cell_index(i1, i2, i3)) * NC + c];
  }
  double at(int jt, int i1, int i2, int i3, int c = 0) const {
    return data_[(slice_offset(jt) + grid_.cell_index(i1, i2, i3)) * NC + c];
  }

  std::span<double> slice(int jt) {
    return {data_.data() + slice_offset(jt) * NC, grid_.slice_points() * NC};
  }
  std::span<const double> slice(int jt) const {
    return {data_.data() + slice_offset(jt) * NC, grid_.slice_points() * NC};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t slice_offset(int jt) const { return static_cast<std::size_t>(jt) * grid_.slice_points(); }

  GridSpec grid_;
  std::vector<double> data_;
};

using ScalarField = Field<1>;
using VectorField = Field<3>;

// 9-component per-point representation of a velocity gradient; component
// index is 3*l + m for the derivative of v_m along axis l.
using TensorField = Field<9>;

double max_abs(std::span<const double> values);
bool all_finite(std::span<const double> values);

}  // namespace cknscope
