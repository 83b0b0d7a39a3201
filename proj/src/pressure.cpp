#include "cknscope/pressure.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "cknscope/geometry.hpp"
#include "cknscope/spectral.hpp"

namespace cknscope {

void recover_pressure(SampledFlow& flow) {
  flow.grid.validate();
  SpectralWorkspace ws(flow.grid.n, flow.grid.box_length);
  ScalarField p(flow.grid);
  for (int jt = 0; jt < flow.grid.n_times; ++jt) {
    const double* f = flow.has_force() ? flow.force->slice(jt).data() : nullptr;
    ws.pressure_from_velocity(flow.velocity.slice(jt).data(), f, p.slice(jt).data());
  }
  flow.pressure = std::move(p);
}

namespace {

struct Patch {
  std::vector<std::uint32_t> cells;          // slice-linear indices
  std::vector<std::array<std::int32_t, 6>> nbr;  // patch index or -1 (Dirichlet zero)
  std::vector<std::uint8_t> interior;
};

Patch build_patch(const GridSpec& grid, const Vec3& center, double radius) {
  const int n = grid.n;
  const double h = grid.spacing();
  const double L = grid.box_length;
  Patch patch;
  std::unordered_map<std::uint32_t, std::int32_t> index_of;

  const int reach = static_cast<int>(std::ceil(radius / h)) + 1;
  const int c1 = static_cast<int>(std::llround(center[0] / h));
  const int c2 = static_cast<int>(std::llround(center[1] / h));
  const int c3 = static_cast<int>(std::llround(center[2] / h));
  auto wrap = [&](int i) { return (i % n + n) % n; };
  auto inside = [&](int i1, int i2, int i3) {
    const double d1 = wrap_delta(grid.coord(wrap(i1)) - center[0], L);
    const double d2 = wrap_delta(grid.coord(wrap(i2)) - center[1], L);
    const double d3 = wrap_delta(grid.coord(wrap(i3)) - center[2], L);
    return d1 * d1 + d2 * d2 + d3 * d3 < radius * radius;
  };
  for (int i1 = c1 - reach; i1 <= c1 + reach; ++i1)
    for (int i2 = c2 - reach; i2 <= c2 + reach; ++i2)
      for (int i3 = c3 - reach; i3 <= c3 + reach; ++i3)
        if (inside(i1, i2, i3)) {
          const auto cell = static_cast<std::uint32_t>(grid.cell_index(wrap(i1), wrap(i2), wrap(i3)));
          index_of.emplace(cell, static_cast<std::int32_t>(patch.cells.size()));
          patch.cells.push_back(cell);
        }

  patch.nbr.resize(patch.cells.size());
  patch.interior.assign(patch.cells.size(), 1);
  for (std::size_t idx = 0; idx < patch.cells.size(); ++idx) {
    const std::uint32_t cell = patch.cells[idx];
    const int i3 = static_cast<int>(cell % n);
    const int i2 = static_cast<int>((cell / n) % n);
    const int i1 = static_cast<int>(cell / (static_cast<std::uint32_t>(n) * n));
    const int deltas[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int d = 0; d < 6; ++d) {
      const auto ncell = static_cast<std::uint32_t>(grid.cell_index(
          wrap(i1 + deltas[d][0]), wrap(i2 + deltas[d][1]), wrap(i3 + deltas[d][2])));
      auto it = index_of.find(ncell);
      if (it == index_of.end()) {
        patch.nbr[idx][d] = -1;
        patch.interior[idx] = 0;
      } else {
        patch.nbr[idx][d] = it->second;
      }
    }
  }
  return patch;
}

// y = (-lap_h) u with zero Dirichlet data on excluded neighbours.
void apply_neg_laplacian(const Patch& patch, double inv_h2, const std::vector<double>& u,
                         std::vector<double>& y) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    double acc = 6.0 * u[i];
    for (int d = 0; d < 6; ++d) {
      const std::int32_t j = patch.nbr[i][d];
      if (j >= 0) acc -= u[j];
    }
    y[i] = acc * inv_h2;
  }
}

struct CgResult {
  int iters = 0;
  double rel_residual = 0.0;
};

CgResult conjugate_gradient(const Patch& patch, double inv_h2, const std::vector<double>& rhs,
                            std::vector<double>& u, const DecompositionOptions& opt) {
  const std::size_t m = rhs.size();
  u.assign(m, 0.0);
  std::vector<double> r = rhs, p = rhs, ap(m);
  double rr = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    rr += r[i] * r[i];
    bb += rhs[i] * rhs[i];
  }
  if (bb == 0.0) return {0, 0.0};
  const double target = opt.cg_rel_residual * opt.cg_rel_residual * bb;
  int it = 0;
  while (rr > target && it < opt.cg_max_iters) {
    apply_neg_laplacian(patch, inv_h2, p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < m; ++i) pap += p[i] * ap[i];
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      u[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
    ++it;
  }
  const double rel = std::sqrt(rr / bb);
  if (rr > target) {
    std::ostringstream msg;
    msg << "decompose_local: conjugate gradient hit the iteration cap (" << opt.cg_max_iters
        << "); achieved relative residual " << rel;
    throw std::runtime_error(msg.str());
  }
  return {it, rel};
}

}  // namespace

PressureDecomposition decompose_local(const SampledFlow& flow, const Vec3& center, double radius,
                                      int time_index, const DecompositionOptions& options) {
  if (!flow.has_pressure()) throw std::invalid_argument("decompose_local: pressure required");
  if (time_index < 0 || time_index >= flow.grid.n_times)
    throw std::invalid_argument("decompose_local: time index out of range");
  const GridSpec& grid = flow.grid;
  if (radius > flow.region.max_ball_radius(grid, center))
    throw std::invalid_argument("decompose_local: ball leaves the analysis region");
  if (radius < 3.0 * grid.spacing())
    throw std::invalid_argument("decompose_local: ball too small for the grid");

  PressureDecomposition dec;
  dec.center = center;
  dec.radius = radius;
  dec.time_index = time_index;

  const Patch patch = build_patch(grid, center, radius);
  const std::size_t m = patch.cells.size();
  dec.cells = patch.cells;
  dec.interior = patch.interior;

  const std::size_t npts = grid.slice_points();
  SpectralWorkspace ws(grid.n, grid.box_length);

  // Source d_j d_k (v_j v_k) on the full periodic slice; for solenoidal v it
  // equals the double divergence of the mean-shifted tensor in the lemma.
  std::vector<double> source_v(npts);
  ws.vv_double_divergence(flow.velocity.slice(time_index).data(),
                          flow.velocity.slice(time_index).data(), source_v.data());

  std::vector<double> source_f;
  if (flow.has_force()) {
    source_f.assign(npts, 0.0);
    std::vector<double> comp(npts), der(npts);
    for (int axis = 0; axis < 3; ++axis) {
      const double* f = flow.force->slice(time_index).data();
      for (std::size_t i = 0; i < npts; ++i) comp[i] = f[3 * i + axis];
      ws.derivative(comp.data(), axis, der.data());
      for (std::size_t i = 0; i < npts; ++i) source_f[i] += der[i];
    }
  }

  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<double> rhs(m);

  // -lap_h p01 = d_j d_k (v_j v_k) on the patch, zero outside.
  for (std::size_t i = 0; i < m; ++i) rhs[i] = source_v[patch.cells[i]];
  auto cg_v = conjugate_gradient(patch, inv_h2, rhs, dec.p01, options);
  dec.cg_iters_v = cg_v.iters;
  dec.cg_residual_v = cg_v.rel_residual;

  // -lap_h p02 = -div f on the patch.
  if (flow.has_force()) {
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -source_f[patch.cells[i]];
    auto cg_f = conjugate_gradient(patch, inv_h2, rhs, dec.p02, options);
    dec.cg_iters_f = cg_f.iters;
    dec.cg_residual_f = cg_f.rel_residual;
  } else {
    dec.p02.assign(m, 0.0);
  }

  const double* p = flow.pressure->slice(time_index).data();
  dec.p_total.resize(m);
  dec.ph.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    dec.p_total[i] = p[patch.cells[i]];
    dec.ph[i] = dec.p_total[i] - dec.p01[i] - dec.p02[i];
  }

  double hres = 0.0, bres = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (patch.interior[i]) {
      double acc = 6.0 * dec.ph[i];
      for (int d = 0; d < 6; ++d) acc -= dec.ph[patch.nbr[i][d]];
      hres = std::max(hres, std::abs(-acc * inv_h2));
    } else {
      bres = std::max(bres, std::abs(dec.p01[i]) + std::abs(dec.p02[i]));
    }
  }
  dec.harmonic_residual = hres;
  dec.boundary_residual = bres;
  return dec;
}

HarmonicDiagnostics harmonic_interior_estimates(const PressureDecomposition& dec,
                                                const GridSpec& grid, double inner_radius) {
  if (inner_radius > 0.5 * dec.radius + 1e-12)
    throw std::invalid_argument("harmonic_interior_estimates: inner radius must be <= radius/2");
  const int n = grid.n;
  const double h = grid.spacing();
  const double L = grid.box_length;

  std::unordered_map<std::uint32_t, std::int32_t> index_of;
  for (std::size_t i = 0; i < dec.cells.size(); ++i)
    index_of.emplace(dec.cells[i], static_cast<std::int32_t>(i));

  HarmonicDiagnostics diag;
  auto wrap = [&](int i) { return (i % n + n) % n; };

  double grad_sup = 0.0;
  for (std::size_t i = 0; i < dec.cells.size(); ++i) {
    const std::uint32_t cell = dec.cells[i];
    const int i3 = static_cast<int>(cell % n);
    const int i2 = static_cast<int>((cell / n) % n);
    const int i1 = static_cast<int>(cell / (static_cast<std::uint32_t>(n) * n));
    const double d1 = wrap_delta(grid.coord(i1) - dec.center[0], L);
    const double d2 = wrap_delta(grid.coord(i2) - dec.center[1], L);
    const double d3 = wrap_delta(grid.coord(i3) - dec.center[2], L);
    if (d1 * d1 + d2 * d2 + d3 * d3 > inner_radius * inner_radius) continue;
    double g2 = 0.0;
    bool ok = true;
    const int axes[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int a = 0; a < 3 && ok; ++a) {
      const auto plus = static_cast<std::uint32_t>(
          grid.cell_index(wrap(i1 + axes[a][0]), wrap(i2 + axes[a][1]), wrap(i3 + axes[a][2])));
      const auto minus = static_cast<std::uint32_t>(
          grid.cell_index(wrap(i1 - axes[a][0]), wrap(i2 - axes[a][1]), wrap(i3 - axes[a][2])));
      auto ip = index_of.find(plus);
      auto im = index_of.find(minus);
      if (ip == index_of.end() || im == index_of.end()) {
        ok = false;
        break;
      }
      const double d = (dec.ph[ip->second] - dec.ph[im->second]) / (2.0 * h);
      g2 += d * d;
    }
    if (ok) grad_sup = std::max(grad_sup, std::sqrt(g2));
  }
  diag.grad_sup_inner = grad_sup;

  // Ball mean-value identity for harmonic functions, using the shared
  // partial-cell weights so constants reproduce exactly.
  auto w = ball_weights(grid, dec.center, inner_radius);
  CompensatedSum sum;
  double wsum = 0.0;
  for (std::size_t i = 0; i < w->cells.size(); ++i) {
    auto it = index_of.find(w->cells[i]);
    if (it == index_of.end()) continue;
    sum.add(w->weight[i] * dec.ph[it->second]);
    wsum += w->weight[i];
  }
  diag.ball_mean_inner = wsum > 0.0 ? sum.value() / wsum : 0.0;

  // Trilinear interpolation of ph at the exact center.
  {
    const double g1 = dec.center[0] / h, g2c = dec.center[1] / h, g3 = dec.center[2] / h;
    const int b1 = static_cast<int>(std::floor(g1)), b2 = static_cast<int>(std::floor(g2c)),
              b3 = static_cast<int>(std::floor(g3));
    const double f1 = g1 - b1, f2 = g2c - b2, f3 = g3 - b3;
    double acc = 0.0;
    for (int o1 = 0; o1 <= 1; ++o1)
      for (int o2 = 0; o2 <= 1; ++o2)
        for (int o3 = 0; o3 <= 1; ++o3) {
          const auto cell = static_cast<std::uint32_t>(
              grid.cell_index(wrap(b1 + o1), wrap(b2 + o2), wrap(b3 + o3)));
          auto it = index_of.find(cell);
          const double v = it == index_of.end() ? 0.0 : dec.ph[it->second];
          acc += v * (o1 ? f1 : 1.0 - f1) * (o2 ? f2 : 1.0 - f2) * (o3 ? f3 : 1.0 - f3);
        }
    diag.center_value = acc;
  }
  diag.mean_value_gap = std::abs(diag.ball_mean_inner - diag.center_value);
  return diag;
}

}  // namespace cknscope
