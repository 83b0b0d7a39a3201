#pragma once

#include <fftw3.h>

#include <complex>
#include <vector>

#include "cknscope/grid.hpp"

namespace cknscope {

// Per-slice spectral calculus on the periodic box: derivatives, Leray
// projection and the pressure Poisson solve.  One workspace per (n, L);
// not thread safe, give each worker its own instance.
//
// Plans are created with FFTW_ESTIMATE so that plan selection (and therefore
// floating-point summation order) is reproducible run to run.
class SpectralWorkspace {
 public:
  SpectralWorkspace(int n, double box_length);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int n() const { return n_; }
  double box_length() const { return box_length_; }

  // d f / d x_axis of a scalar slice (n^3 values, unit stride).
  void derivative(const double* f, int axis, double* df);

  // All nine derivatives of an interleaved 3-vector slice; output interleaved
  // with component 3*l + m = d v_m / d x_l.
  void gradient3(const double* v, double* grad9);

  double divergence_max(const double* v);

  // Solves -lap p = d_j d_k (v_j v_k) - div f with zero mean; f may be null.
  void pressure_from_velocity(const double* v, const double* f, double* p);

  // Solves -lap p = d_j d_k (va_j vb_k + vb_j va_k) / ... with the convention
  // that the source tensor is w_jk = (va_j vb_k + va_k vb_j)/2 symmetrized so
  // that for v = sum_a m_a V_a the slice pressure is
  //   p = sum_{a,b} m_a m_b pressure_from_vv(V_a, V_b).
  void pressure_from_vv(const double* va, const double* vb, double* p);

  // Solves -lap p = -div f with zero mean.
  void pressure_from_force(const double* f, double* p);

  // d_j d_k of the symmetrized tensor (va_j vb_k + va_k vb_j)/2, the Poisson
  // data behind pressure_from_vv.
  void vv_double_divergence(const double* va, const double* vb, double* out);

  // Projects an interleaved 3-vector slice onto divergence-free modes.
  void leray_project(double* v, bool zero_mean);

 private:
  using Complex = std::complex<double>;

  void forward(const double* real, Complex* spec);
  void inverse(Complex* spec, double* real);  // destroys spec, normalizes
  void accumulate_vv_source(const double* va, const double* vb);
  double wavenumber(int mode_index) const;
  std::size_t spec_size() const;

  int n_ = 0;
  double box_length_ = 0.0;
  std::vector<double> real_a_, real_b_, real_c_;
  std::vector<Complex> spec_a_, spec_b_, spec_acc_;
  std::vector<Complex> spec_hold_[3];
  fftw_plan plan_r2c_ = nullptr;
  fftw_plan plan_c2r_ = nullptr;
};

}  // namespace cknscope
