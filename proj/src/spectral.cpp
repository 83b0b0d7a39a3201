#include "cknscope/spectral.hpp"

#include <cstring>
#include <mutex>

namespace cknscope {

namespace {
// FFTW planning is not thread safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(int n, double box_length) : n_(n), box_length_(box_length) {
  const std::size_t nreal = static_cast<std::size_t>(n) * n * n;
  real_a_.resize(nreal);
  real_b_.resize(nreal);
  real_c_.resize(nreal);
  spec_a_.resize(spec_size());
  spec_b_.resize(spec_size());
  spec_acc_.resize(spec_size());
  for (auto& s : spec_hold_) s.resize(spec_size());

  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_r2c_ = fftw_plan_dft_r2c_3d(n, n, n, real_a_.data(),
                                   reinterpret_cast<fftw_complex*>(spec_a_.data()), FFTW_ESTIMATE);
  plan_c2r_ = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(spec_a_.data()),
                                   real_a_.data(), FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (plan_r2c_) fftw_destroy_plan(plan_r2c_);
  if (plan_c2r_) fftw_destroy_plan(plan_c2r_);
}

std::size_t SpectralWorkspace::spec_size() const {
  return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1);
}

double SpectralWorkspace::wavenumber(int mode_index) const {
  int m = mode_index <= n_ / 2 ? mode_index : mode_index - n_;
  return kTwoPi / box_length_ * m;
}

void SpectralWorkspace::forward(const double* real, Complex* spec) {
  std::memcpy(real_a_.data(), real, real_a_.size() * sizeof(double));
  fftw_execute_dft_r2c(plan_r2c_, real_a_.data(), reinterpret_cast<fftw_complex*>(spec_a_.data()));
  std::memcpy(spec, spec_a_.data(), spec_size() * sizeof(Complex));
}

void SpectralWorkspace::inverse(Complex* spec, double* real) {
  std::memcpy(spec_a_.data(), spec, spec_size() * sizeof(Complex));
  fftw_execute_dft_c2r(plan_c2r_, reinterpret_cast<fftw_complex*>(spec_a_.data()), real_a_.data());
  const double scale = 1.0 / (static_cast<double>(n_) * n_ * n_);
  for (std::size_t i = 0; i < real_a_.size(); ++i) real[i] = real_a_[i] * scale;
}

void SpectralWorkspace::derivative(const double* f, int axis, double* df) {
  forward(f, spec_b_.data());
  const int nh = n_ / 2 + 1;
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) {
    const double k1 = wavenumber(a);
    for (int b = 0; b < n_; ++b) {
      const double k2 = wavenumber(b);
      for (int c = 0; c < nh; ++c, ++idx) {
        const double k3 = wavenumber(c);
        double k = axis == 0 ? k1 : (axis == 1 ? k2 : k3);
        // Nyquist derivative mode has no well-defined sign; drop it.
        if ((axis == 0 && a == n_ / 2) || (axis == 1 && b == n_ / 2) || (axis == 2 && c == n_ / 2))
          k = 0.0;
        spec_b_[idx] *= Complex(0.0, k);
      }
    }
  }
  inverse(spec_b_.data(), df);
}

void SpectralWorkspace::gradient3(const double* v, double* grad9) {
  const std::size_t npts = real_a_.size();
  for (int m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < npts; ++i) real_b_[i] = v[3 * i + m];
    forward(real_b_.data(), spec_hold_[m].data());
  }
  const int nh = n_ / 2 + 1;
  for (int l = 0; l < 3; ++l) {
    for (int m = 0; m < 3; ++m) {
      std::size_t idx = 0;
      for (int a = 0; a < n_; ++a) {
        for (int b = 0; b < n_; ++b) {
          for (int c = 0; c < nh; ++c, ++idx) {
            double k = l == 0 ? wavenumber(a) : (l == 1 ? wavenumber(b) : wavenumber(c));
            if ((l == 0 && a == n_ / 2) || (l == 1 && b == n_ / 2) || (l == 2 && c == n_ / 2))
              k = 0.0;
            spec_b_[idx] = spec_hold_[m][idx] * Complex(0.0, k);
          }
        }
      }
      inverse(spec_b_.data(), real_c_.data());
      for (std::size_t i = 0; i < npts; ++i) grad9[9 * i + 3 * l + m] = real_c_[i];
    }
  }
}

double SpectralWorkspace::divergence_max(const double* v) {
  const std::size_t npts = real_a_.size();
  for (int m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < npts; ++i) real_b_[i] = v[3 * i + m];
    forward(real_b_.data(), spec_hold_[m].data());
  }
  const int nh = n_ / 2 + 1;
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) {
    const double k1 = a == n_ / 2 ? 0.0 : wavenumber(a);
    for (int b = 0; b < n_; ++b) {
      const double k2 = b == n_ / 2 ? 0.0 : wavenumber(b);
      for (int c = 0; c < nh; ++c, ++idx) {
        const double k3 = c == n_ / 2 ? 0.0 : wavenumber(c);
        spec_b_[idx] = Complex(0.0, 1.0) *
                       (k1 * spec_hold_[0][idx] + k2 * spec_hold_[1][idx] + k3 * spec_hold_[2][idx]);
      }
    }
  }
  inverse(spec_b_.data(), real_c_.data());
  double m = 0.0;
  for (std::size_t i = 0; i < npts; ++i) m = std::max(m, std::abs(real_c_[i]));
  return m;
}

void SpectralWorkspace::accumulate_vv_source(const double* va, const double* vb) {
  const std::size_t npts = real_a_.size();
  std::fill(spec_acc_.begin(), spec_acc_.end(), Complex(0.0, 0.0));
  const int nh = n_ / 2 + 1;

  // Symmetrized products: diagonal j==k once, off-diagonal pairs once with
  // both orderings folded in; the accumulated spectrum is that of
  // d_j d_k [(va_j vb_k + va_k vb_j)/2] summed over j,k.
  for (int j = 0; j < 3; ++j) {
    for (int k = j; k < 3; ++k) {
      for (std::size_t i = 0; i < npts; ++i) {
        double w = 0.5 * (va[3 * i + j] * vb[3 * i + k] + va[3 * i + k] * vb[3 * i + j]);
        real_b_[i] = w;
      }
      forward(real_b_.data(), spec_b_.data());
      const double mult = (j == k) ? 1.0 : 2.0;
      std::size_t idx = 0;
      for (int a = 0; a < n_; ++a) {
        const double k1 = wavenumber(a);
        for (int b = 0; b < n_; ++b) {
          const double k2 = wavenumber(b);
          for (int c = 0; c < nh; ++c, ++idx) {
            const double k3 = wavenumber(c);
            const double kj = j == 0 ? k1 : (j == 1 ? k2 : k3);
            const double kk = k == 0 ? k1 : (k == 1 ? k2 : k3);
            spec_acc_[idx] -= mult * kj * kk * spec_b_[idx];
          }
        }
      }
    }
  }
}

void SpectralWorkspace::vv_double_divergence(const double* va, const double* vb, double* out) {
  accumulate_vv_source(va, vb);
  inverse(spec_acc_.data(), out);
}

void SpectralWorkspace::pressure_from_vv(const double* va, const double* vb, double* p) {
  accumulate_vv_source(va, vb);
  const int nh = n_ / 2 + 1;

  // |k|^2 p_hat = accumulated source, zero mean.
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) {
    const double k1 = wavenumber(a);
    for (int b = 0; b < n_; ++b) {
      const double k2 = wavenumber(b);
      for (int c = 0; c < nh; ++c, ++idx) {
        const double k3 = wavenumber(c);
        const double k2norm = k1 * k1 + k2 * k2 + k3 * k3;
        spec_acc_[idx] = k2norm > 0.0 ? spec_acc_[idx] / k2norm : Complex(0.0, 0.0);
      }
    }
  }
  inverse(spec_acc_.data(), p);
}

void SpectralWorkspace::pressure_from_force(const double* f, double* p) {
  const std::size_t npts = real_a_.size();
  std::fill(spec_acc_.begin(), spec_acc_.end(), Complex(0.0, 0.0));
  const int nh = n_ / 2 + 1;
  for (int j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < npts; ++i) real_b_[i] = f[3 * i + j];
    forward(real_b_.data(), spec_b_.data());
    std::size_t idx = 0;
    for (int a = 0; a < n_; ++a) {
      const double k1 = wavenumber(a);
      for (int b = 0; b < n_; ++b) {
        const double k2 = wavenumber(b);
        for (int c = 0; c < nh; ++c, ++idx) {
          const double k3 = wavenumber(c);
          const double kj = j == 0 ? k1 : (j == 1 ? k2 : k3);
          // -lap p = -div f  =>  |k|^2 p_hat = -i k_j f_j_hat
          spec_acc_[idx] -= Complex(0.0, kj) * spec_b_[idx];
        }
      }
    }
  }
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) {
    const double k1 = wavenumber(a);
    for (int b = 0; b < n_; ++b) {
      const double k2 = wavenumber(b);
      for (int c = 0; c < nh; ++c, ++idx) {
        const double k3 = wavenumber(c);
        const double k2norm = k1 * k1 + k2 * k2 + k3 * k3;
        spec_acc_[idx] = k2norm > 0.0 ? spec_acc_[idx] / k2norm : Complex(0.0, 0.0);
      }
    }
  }
  inverse(spec_acc_.data(), p);
}

void SpectralWorkspace::pressure_from_velocity(const double* v, const double* f, double* p) {
  pressure_from_vv(v, v, p);
  if (f) {
    pressure_from_force(f, real_c_.data());
    const std::size_t npts = real_a_.size();
    for (std::size_t i = 0; i < npts; ++i) p[i] += real_c_[i];
  }
}

void SpectralWorkspace::leray_project(double* v, bool zero_mean) {
  const std::size_t npts = real_a_.size();
  for (int m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < npts; ++i) real_b_[i] = v[3 * i + m];
    forward(real_b_.data(), spec_hold_[m].data());
  }
  const int nh = n_ / 2 + 1;
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) {
    const double k1 = wavenumber(a);
    for (int b = 0; b < n_; ++b) {
      const double k2 = wavenumber(b);
      for (int c = 0; c < nh; ++c, ++idx) {
        const double k3 = wavenumber(c);
        const double k2norm = k1 * k1 + k2 * k2 + k3 * k3;
        if (k2norm == 0.0) {
          if (zero_mean)
            for (auto& s : spec_hold_) s[idx] = Complex(0.0, 0.0);
          continue;
        }
        const Complex kv = k1 * spec_hold_[0][idx] + k2 * spec_hold_[1][idx] + k3 * spec_hold_[2][idx];
        spec_hold_[0][idx] -= k1 * kv / k2norm;
        spec_hold_[1][idx] -= k2 * kv / k2norm;
        spec_hold_[2][idx] -= k3 * kv / k2norm;
      }
    }
  }
  for (int m = 0; m < 3; ++m) {
    inverse(spec_hold_[m].data(), real_b_.data());
    for (std::size_t i = 0; i < npts; ++i) v[3 * i + m] = real_b_[i];
  }
}

}  // namespace cknscope
