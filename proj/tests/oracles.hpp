#pragma once

// Test-only quadrature oracles, independent of the library's ball/cylinder
// quadrature paths.

#include <cmath>
#include <functional>

namespace oracles {

// Midpoint quadrature of f over the ball |y| <= r on a fine lattice.
inline double ball_integral(const std::function<double(double, double, double)>& f, double r,
                            int samples = 160) {
  const double step = 2.0 * r / samples;
  double sum = 0.0;
  for (int a = 0; a < samples; ++a) {
    const double y1 = -r + (a + 0.5) * step;
    for (int b = 0; b < samples; ++b) {
      const double y2 = -r + (b + 0.5) * step;
      for (int c = 0; c < samples; ++c) {
        const double y3 = -r + (c + 0.5) * step;
        if (y1 * y1 + y2 * y2 + y3 * y3 <= r * r) sum += f(y1, y2, y3);
      }
    }
  }
  return sum * step * step * step;
}

// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / (2 * panels);
  double sum = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Spherical average of |grad U|^2 for U = curl(psi(|y|^2) e3),
// psi(s) = sigma exp(-s):  sigma^2 e^{-2 rho^2} (8 - 32 rho^2/3 + 32 rho^4/3).
inline double selfsimilar_grad_sq_mean(double rho, double sigma) {
  const double r2 = rho * rho;
  return sigma * sigma * std::exp(-2.0 * r2) * (8.0 - 32.0 * r2 / 3.0 + 32.0 * r2 * r2 / 3.0);
}

// W(R) = int_{|y|<=R} |grad U|^2 dy by radial Simpson quadrature.
inline double selfsimilar_grad_energy(double R, double sigma, int panels = 400) {
  const double cap = std::min(R, 8.0);  // integrand is negligible beyond |y| = 8
  return simpson(
      [&](double rho) {
        return 4.0 * M_PI * rho * rho * selfsimilar_grad_sq_mean(rho, sigma);
      },
      0.0, cap, panels);
}

// E(z, r) of the exact self-similar profile at the focal point z = (xc, T):
//   E(r) = (2/r) int_0^r W(r / tau) d tau   (tau = sqrt(T - s)).
// Independent of r analytically; evaluated by direct quadrature per radius so
// the invariance is demonstrated, not assumed.
inline double selfsimilar_E(double r, double sigma, int panels = 600) {
  return 2.0 / r *
         simpson([&](double tau) { return selfsimilar_grad_energy(tau > 0 ? r / tau : 1e9, sigma); },
                 0.0, r, panels);
}

}  // namespace oracles
