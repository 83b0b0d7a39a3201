#include "cknscope/flowfield.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "cknscope/spectral.hpp"

namespace cknscope {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double hash_u01(std::uint64_t key) {
  return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

// Deterministic standard complex gaussian keyed by integers; independent of
// grid resolution so the same physical field is produced at every n.
std::complex<double> hash_gaussian(std::uint64_t seed, int stream, int m1, int m2, int m3, int comp) {
  std::uint64_t key = seed;
  key = splitmix64(key ^ (0x100ull + stream));
  key = splitmix64(key ^ static_cast<std::uint64_t>(m1 + 512));
  key = splitmix64(key ^ static_cast<std::uint64_t>(m2 + 512));
  key = splitmix64(key ^ static_cast<std::uint64_t>(m3 + 512));
  key = splitmix64(key ^ static_cast<std::uint64_t>(comp + 16));
  const double u1 = std::max(hash_u01(key), 1e-300);
  const double u2 = hash_u01(splitmix64(key));
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

}  // namespace

double AnalysisRegion::max_ball_radius(const GridSpec& grid, const Vec3& x) const {
  if (!windowed) return 0.499 * grid.box_length;
  Vec3 d = {wrap_delta(x[0] - center[0], grid.box_length),
            wrap_delta(x[1] - center[1], grid.box_length),
            wrap_delta(x[2] - center[2], grid.box_length)};
  return radius - norm(d);
}

SampledFlow make_shear_flow(const GridSpec& grid, double slope) {
  grid.validate();
  SampledFlow flow;
  flow.grid = grid;
  flow.velocity = VectorField(grid);
  flow.pressure = ScalarField(grid);
  const double L = grid.box_length;
  const double c2 = grid.center()[1];

  // Gaussian-smoothed window centered mid-transition.  The width balances
  // the two competing errors of a periodized linear profile: spectral
  // aliasing (wants wide) against flatness of the window on the analysis
  // region (wants narrow); the balanced choice leaves both at exp(-pi n/32).
  const double d0 = 5.0 * L / 16.0;
  const double sigma = std::sqrt(grid.spacing() * L / (16.0 * M_PI));
  std::vector<double> profile(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double d = wrap_delta(grid.coord(i) - c2, L);
    const double w = 0.5 * std::erfc((std::abs(d) - d0) / (sigma * std::sqrt(2.0)));
    profile[i] = slope * d * w;
  }
  for (int jt = 0; jt < grid.n_times; ++jt)
    for (int i1 = 0; i1 < grid.n; ++i1)
      for (int i2 = 0; i2 < grid.n; ++i2)
        for (int i3 = 0; i3 < grid.n; ++i3) flow.velocity.at(jt, i1, i2, i3, 0) = profile[i2];

  flow.metadata = "shear(slope=" + std::to_string(slope) + ")";
  flow.region = AnalysisRegion::window(grid.center(), 0.25 * L);
  return flow;
}

SampledFlow make_beltrami_flow(const GridSpec& grid, const BeltramiParams& params) {
  grid.validate();
  if (!(params.viscosity > 0.0))
    throw std::invalid_argument("make_beltrami_flow: viscosity must be positive");
  if (params.viscosity != 1.0)
    throw std::invalid_argument("make_beltrami_flow: the toolkit momentum operator has unit viscosity");
  if (params.mode < 1) throw std::invalid_argument("make_beltrami_flow: mode must be >= 1");

  SampledFlow flow;
  flow.grid = grid;
  flow.velocity = VectorField(grid);
  flow.pressure = ScalarField(grid);
  const double kappa = kTwoPi * params.mode / grid.box_length;
  const double A = params.a, B = params.b, C = params.c;

  for (int jt = 0; jt < grid.n_times; ++jt) {
    const double decay = std::exp(-kappa * kappa * grid.time_at(jt));
    for (int i1 = 0; i1 < grid.n; ++i1) {
      const double x1 = kappa * grid.coord(i1);
      for (int i2 = 0; i2 < grid.n; ++i2) {
        const double x2 = kappa * grid.coord(i2);
        for (int i3 = 0; i3 < grid.n; ++i3) {
          const double x3 = kappa * grid.coord(i3);
          const double v1 = decay * (A * std::sin(x3) + C * std::cos(x2));
          const double v2 = decay * (B * std::sin(x1) + A * std::cos(x3));
          const double v3 = decay * (C * std::sin(x2) + B * std::cos(x1));
          flow.velocity.at(jt, i1, i2, i3, 0) = v1;
          flow.velocity.at(jt, i1, i2, i3, 1) = v2;
          flow.velocity.at(jt, i1, i2, i3, 2) = v3;
          flow.pressure->at(jt, i1, i2, i3) = -0.5 * (v1 * v1 + v2 * v2 + v3 * v3);
        }
      }
    }
  }
  std::ostringstream meta;
  meta << "beltrami(a=" << A << ",b=" << B << ",c=" << C << ",mode=" << params.mode << ")";
  flow.metadata = meta.str();
  return flow;
}

SampledFlow make_selfsimilar_fixture(const GridSpec& grid, double blowup_time, double profile_scale) {
  grid.validate();
  if (blowup_time <= grid.t0)
    throw std::invalid_argument("make_selfsimilar_fixture: blowup time must exceed t0");
  if (blowup_time > grid.t1)
    throw std::invalid_argument("make_selfsimilar_fixture: blowup time must lie in (t0, t1]");
  if (!(profile_scale > 0.0))
    throw std::invalid_argument("make_selfsimilar_fixture: profile scale must be positive");

  SampledFlow flow;
  flow.grid = grid;
  flow.velocity = VectorField(grid);
  const Vec3 c = grid.center();
  const double L = grid.box_length;

  for (int jt = 0; jt < grid.n_times; ++jt) {
    const double t = grid.time_at(jt);
    if (t >= blowup_time) continue;  // slices at and past blow-up stay zero
    const double ell = std::sqrt(blowup_time - t);
    for (int i1 = 0; i1 < grid.n; ++i1) {
      const double y1 = wrap_delta(grid.coord(i1) - c[0], L) / ell;
      for (int i2 = 0; i2 < grid.n; ++i2) {
        const double y2 = wrap_delta(grid.coord(i2) - c[1], L) / ell;
        for (int i3 = 0; i3 < grid.n; ++i3) {
          const double y3 = wrap_delta(grid.coord(i3) - c[2], L) / ell;
          const double amp = -2.0 * profile_scale * std::exp(-(y1 * y1 + y2 * y2 + y3 * y3));
          flow.velocity.at(jt, i1, i2, i3, 0) = amp * y2 / ell;
          flow.velocity.at(jt, i1, i2, i3, 1) = -amp * y1 / ell;
        }
      }
    }
  }
  std::ostringstream meta;
  meta << "selfsimilar(T=" << blowup_time << ",sigma=" << profile_scale << ")";
  flow.metadata = meta.str();
  flow.region = AnalysisRegion::window(c, 0.25 * L);
  return flow;
}

namespace {

// Fills the r2c half-spectrum with resolution-independent coefficients for
// band |m| <= kmax, Leray-projected when requested.  Coefficients are plain
// Fourier-series values; synthesis is an unnormalized c2r.
void fill_random_band(std::vector<std::complex<double>> spec[3], int n, std::uint64_t seed,
                      int stream, int kmax, double amplitude, bool project) {
  const int nh = n / 2 + 1;
  auto at = [&](int comp, int m1, int m2, int m3) -> std::complex<double>& {
    const int a = m1 >= 0 ? m1 : m1 + n;
    const int b = m2 >= 0 ? m2 : m2 + n;
    return spec[comp][(static_cast<std::size_t>(a) * n + b) * nh + m3];
  };
  const double norm = amplitude / std::pow(static_cast<double>(kmax), 1.5);
  for (int m1 = -kmax; m1 <= kmax; ++m1) {
    for (int m2 = -kmax; m2 <= kmax; ++m2) {
      for (int m3 = 0; m3 <= kmax; ++m3) {
        const int mm = m1 * m1 + m2 * m2 + m3 * m3;
        if (mm == 0 || mm > kmax * kmax) continue;
        // Canonical representative on the m3 = 0 plane to keep the spectrum
        // Hermitian; mirrors get the conjugate below.
        if (m3 == 0 && (m2 < 0 || (m2 == 0 && m1 < 0))) continue;
        std::complex<double> co[3];
        for (int comp = 0; comp < 3; ++comp)
          co[comp] = hash_gaussian(seed, stream, m1, m2, m3, comp) *
                     (norm * std::exp(-2.0 * mm / static_cast<double>(kmax * kmax)));
        if (project) {
          const std::complex<double> kv = static_cast<double>(m1) * co[0] +
                                          static_cast<double>(m2) * co[1] +
                                          static_cast<double>(m3) * co[2];
          co[0] -= static_cast<double>(m1) * kv / static_cast<double>(mm);
          co[1] -= static_cast<double>(m2) * kv / static_cast<double>(mm);
          co[2] -= static_cast<double>(m3) * kv / static_cast<double>(mm);
        }
        for (int comp = 0; comp < 3; ++comp) {
          at(comp, m1, m2, m3) = co[comp];
          if (m3 == 0) at(comp, -m1, -m2, 0) = std::conj(co[comp]);
        }
      }
    }
  }
}

std::vector<double> synthesize_vector_slice(const GridSpec& grid,
                                            std::vector<std::complex<double>> spec[3]) {
  const int n = grid.n;
  const std::size_t npts = grid.slice_points();
  std::vector<double> out(npts * 3);
  std::vector<double> real(npts);
  std::vector<std::complex<double>> scratch(spec[0].size());
  fftw_plan plan;
  {
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    plan = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                real.data(), FFTW_ESTIMATE);
  }
  for (int comp = 0; comp < 3; ++comp) {
    std::copy(spec[comp].begin(), spec[comp].end(), scratch.begin());
    fftw_execute(plan);
    for (std::size_t i = 0; i < npts; ++i) out[3 * i + comp] = real[i];
  }
  {
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

SampledFlow make_random_divfree_flow(const GridSpec& grid, std::uint64_t seed,
                                     const RandomFlowOptions& options) {
  grid.validate();
  if (options.max_wavenumber < 1)
    throw std::invalid_argument("make_random_divfree_flow: max_wavenumber must be >= 1");
  if (options.max_wavenumber > grid.n / 4)
    throw std::invalid_argument("make_random_divfree_flow: max_wavenumber exceeds resolved band n/4");
  const bool with_force = options.force_amplitude != 0.0;
  if (with_force && options.force_wavenumber > grid.n / 4)
    throw std::invalid_argument("make_random_divfree_flow: force_wavenumber exceeds resolved band n/4");

  SampledFlow flow;
  flow.grid = grid;
  flow.velocity = VectorField(grid);

  auto sep = std::make_shared<SeparableVelocity>();
  sep->bases.resize(2);
  sep->modulation.assign(2, std::vector<double>(grid.n_times));

  for (int base = 0; base < 2; ++base) {
    std::vector<std::complex<double>> spec[3];
    for (auto& s : spec) s.assign(static_cast<std::size_t>(grid.n) * grid.n * (grid.n / 2 + 1), {0.0, 0.0});
    fill_random_band(spec, grid.n, seed, base, options.max_wavenumber, options.amplitude, true);
    sep->bases[base] = synthesize_vector_slice(grid, spec);
  }

  const double span = grid.t1 - grid.t0;
  const double w1 = kTwoPi / span * (1.0 + hash_u01(splitmix64(seed ^ 0xA1ull)));
  const double w2 = kTwoPi / span * (1.0 + hash_u01(splitmix64(seed ^ 0xA2ull)));
  const double p1 = kTwoPi * hash_u01(splitmix64(seed ^ 0xA3ull));
  const double p2 = kTwoPi * hash_u01(splitmix64(seed ^ 0xA4ull));
  for (int jt = 0; jt < grid.n_times; ++jt) {
    const double t = grid.time_at(jt) - grid.t0;
    sep->modulation[0][jt] = 1.0 + 0.4 * std::cos(w1 * t + p1);
    sep->modulation[1][jt] = 0.6 * std::sin(w2 * t + p2);
  }

  const std::size_t npts = grid.slice_points();
  for (int jt = 0; jt < grid.n_times; ++jt) {
    const double m1 = sep->modulation[0][jt];
    const double m2 = sep->modulation[1][jt];
    auto slice = flow.velocity.slice(jt);
    for (std::size_t i = 0; i < npts * 3; ++i) slice[i] = m1 * sep->bases[0][i] + m2 * sep->bases[1][i];
  }

  std::vector<double> force_base;
  std::vector<double> force_mod;
  if (with_force) {
    std::vector<std::complex<double>> spec[3];
    for (auto& s : spec) s.assign(static_cast<std::size_t>(grid.n) * grid.n * (grid.n / 2 + 1), {0.0, 0.0});
    fill_random_band(spec, grid.n, seed, 7, options.force_wavenumber, options.force_amplitude, false);
    force_base = synthesize_vector_slice(grid, spec);
    const double wf = kTwoPi / span * (1.0 + hash_u01(splitmix64(seed ^ 0xA5ull)));
    const double pf = kTwoPi * hash_u01(splitmix64(seed ^ 0xA6ull));
    force_mod.resize(grid.n_times);
    flow.force = VectorField(grid);
    for (int jt = 0; jt < grid.n_times; ++jt) {
      const double t = grid.time_at(jt) - grid.t0;
      force_mod[jt] = 1.0 + 0.5 * std::sin(wf * t + pf);
      auto slice = flow.force->slice(jt);
      for (std::size_t i = 0; i < npts * 3; ++i) slice[i] = force_mod[jt] * force_base[i];
    }
  }

  // Pressure: the Poisson data is bilinear in the velocity bases and linear
  // in the force base, so three pair solves (plus one force solve) determine
  // every slice exactly as the per-slice recovery would.
  {
    SpectralWorkspace ws(grid.n, grid.box_length);
    std::vector<double> p11(npts), p12(npts), p22(npts), pf;
    ws.pressure_from_vv(sep->bases[0].data(), sep->bases[0].data(), p11.data());
    ws.pressure_from_vv(sep->bases[0].data(), sep->bases[1].data(), p12.data());
    ws.pressure_from_vv(sep->bases[1].data(), sep->bases[1].data(), p22.data());
    if (with_force) {
      pf.resize(npts);
      ws.pressure_from_force(force_base.data(), pf.data());
    }
    flow.pressure = ScalarField(grid);
    for (int jt = 0; jt < grid.n_times; ++jt) {
      const double m1 = sep->modulation[0][jt];
      const double m2 = sep->modulation[1][jt];
      auto slice = flow.pressure->slice(jt);
      for (std::size_t i = 0; i < npts; ++i)
        slice[i] = m1 * m1 * p11[i] + 2.0 * m1 * m2 * p12[i] + m2 * m2 * p22[i];
      if (with_force)
        for (std::size_t i = 0; i < npts; ++i) slice[i] += force_mod[jt] * pf[i];
    }
  }

  std::ostringstream meta;
  meta << "random(seed=" << seed << ",kmax=" << options.max_wavenumber << ",amp=" << options.amplitude;
  if (with_force) meta << ",fkmax=" << options.force_wavenumber << ",famp=" << options.force_amplitude;
  meta << ")";
  flow.metadata = meta.str();
  flow.separable = std::move(sep);
  return flow;
}

SampledFlow make_random_divfree_flow(const GridSpec& grid, std::uint64_t seed, int max_wavenumber,
                                     double amplitude) {
  RandomFlowOptions opt;
  opt.max_wavenumber = max_wavenumber;
  opt.amplitude = amplitude;
  return make_random_divfree_flow(grid, seed, opt);
}

TensorField gradient(const SampledFlow& flow) {
  TensorField out(flow.grid);
  const std::size_t npts = flow.grid.slice_points();
  SpectralWorkspace ws(flow.grid.n, flow.grid.box_length);
  if (flow.separable) {
    const auto& sep = *flow.separable;
    std::vector<std::vector<double>> base_grad(sep.bases.size(), std::vector<double>(npts * 9));
    for (std::size_t a = 0; a < sep.bases.size(); ++a)
      ws.gradient3(sep.bases[a].data(), base_grad[a].data());
    for (int jt = 0; jt < flow.grid.n_times; ++jt) {
      auto slice = out.slice(jt);
      std::fill(slice.begin(), slice.end(), 0.0);
      for (std::size_t a = 0; a < sep.bases.size(); ++a) {
        const double m = sep.modulation[a][jt];
        const double* g = base_grad[a].data();
        for (std::size_t i = 0; i < npts * 9; ++i) slice[i] += m * g[i];
      }
    }
    return out;
  }
  for (int jt = 0; jt < flow.grid.n_times; ++jt)
    ws.gradient3(flow.velocity.slice(jt).data(), out.slice(jt).data());
  return out;
}

double divergence_max(const SampledFlow& flow) {
  SpectralWorkspace ws(flow.grid.n, flow.grid.box_length);
  double m = 0.0;
  for (int jt = 0; jt < flow.grid.n_times; ++jt)
    m = std::max(m, ws.divergence_max(flow.velocity.slice(jt).data()));
  return m;
}

double momentum_residual_max(const SampledFlow& flow) {
  if (!flow.has_pressure()) throw std::invalid_argument("momentum_residual_max: pressure required");
  const GridSpec& g = flow.grid;
  if (g.n_times < 3) throw std::invalid_argument("momentum_residual_max: need at least 3 slices");
  SpectralWorkspace ws(g.n, g.box_length);
  const std::size_t npts = g.slice_points();
  std::vector<double> grad(npts * 9), lap(npts * 3), gp(npts * 3), comp(npts);
  double worst = 0.0;
  for (int jt = 1; jt + 1 < g.n_times; ++jt) {
    const double* v = flow.velocity.slice(jt).data();
    ws.gradient3(v, grad.data());
    // Laplacian of each velocity component as divergence of its gradient:
    // reuse spectral derivatives directly.
    for (int m = 0; m < 3; ++m) {
      for (std::size_t i = 0; i < npts; ++i) comp[i] = v[3 * i + m];
      std::vector<double> d2(npts, 0.0), tmp(npts), tmp2(npts);
      for (int axis = 0; axis < 3; ++axis) {
        ws.derivative(comp.data(), axis, tmp.data());
        ws.derivative(tmp.data(), axis, tmp2.data());
        for (std::size_t i = 0; i < npts; ++i) d2[i] += tmp2[i];
      }
      for (std::size_t i = 0; i < npts; ++i) lap[3 * i + m] = d2[i];
    }
    const double* p = flow.pressure->slice(jt).data();
    {
      std::vector<double> tmp(npts);
      for (int axis = 0; axis < 3; ++axis) {
        ws.derivative(p, axis, tmp.data());
        for (std::size_t i = 0; i < npts; ++i) gp[3 * i + axis] = tmp[i];
      }
    }
    const double* vm = flow.velocity.slice(jt - 1).data();
    const double* vp = flow.velocity.slice(jt + 1).data();
    const double inv2dt = 1.0 / (2.0 * g.dt());
    const double* f = flow.has_force() ? flow.force->slice(jt).data() : nullptr;
    for (std::size_t i = 0; i < npts; ++i) {
      for (int m = 0; m < 3; ++m) {
        const double dtv = (vp[3 * i + m] - vm[3 * i + m]) * inv2dt;
        double conv = 0.0;
        for (int l = 0; l < 3; ++l) conv += v[3 * i + l] * grad[9 * i + 3 * l + m];
        double r = dtv - lap[3 * i + m] + conv + gp[3 * i + m];
        if (f) r -= f[3 * i + m];
        worst = std::max(worst, std::abs(r));
      }
    }
  }
  return worst;
}

namespace {

void write_all(std::ofstream& out, const std::vector<double>& data) {
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_flow(const SampledFlow& flow, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "NSFLOW1 writer assumes little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_flow: cannot open " + path);
  std::string fields = "velocity";
  if (flow.has_pressure()) fields += ",pressure";
  if (flow.has_force()) fields += ",force";
  out << "magic=NSFLOW1\n"
      << "n=" << flow.grid.n << "\n"
      << "box_length=" << fmt_double(flow.grid.box_length) << "\n"
      << "n_times=" << flow.grid.n_times << "\n"
      << "t0=" << fmt_double(flow.grid.t0) << "\n"
      << "t1=" << fmt_double(flow.grid.t1) << "\n"
      << "fields=" << fields << "\n"
      << "byte_order=little\n"
      << "\n";
  write_all(out, flow.velocity.raw());
  if (flow.has_pressure()) write_all(out, flow.pressure->raw());
  if (flow.has_force()) write_all(out, flow.force->raw());
  if (!out) throw std::runtime_error("save_flow: write failed for " + path);
}

SampledFlow load_flow(const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "NSFLOW1 reader assumes little-endian host");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_flow: cannot open " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  bool saw_blank = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      saw_blank = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("load_flow: malformed header line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!saw_blank) throw std::runtime_error("load_flow: header not terminated by blank line");
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("load_flow: missing header key " + key);
    return it->second;
  };
  if (need("magic") != "NSFLOW1")
    throw std::runtime_error("load_flow: unsupported version '" + kv["magic"] + "'");
  if (need("byte_order") != "little")
    throw std::runtime_error("load_flow: unsupported byte order '" + kv["byte_order"] + "'");

  SampledFlow flow;
  try {
    flow.grid.n = std::stoi(need("n"));
    flow.grid.box_length = std::stod(need("box_length"));
    flow.grid.n_times = std::stoi(need("n_times"));
    flow.grid.t0 = std::stod(need("t0"));
    flow.grid.t1 = std::stod(need("t1"));
  } catch (const std::logic_error&) {
    throw std::runtime_error("load_flow: malformed header value");
  }
  flow.grid.validate();

  std::vector<std::string> fields;
  {
    std::stringstream ss(need("fields"));
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
  }
  if (fields.empty() || fields[0] != "velocity")
    throw std::runtime_error("load_flow: fields must start with velocity");

  auto read_payload = [&](std::vector<double>& dst, const char* what) {
    in.read(reinterpret_cast<char*>(dst.data()),
            static_cast<std::streamsize>(dst.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != dst.size() * sizeof(double))
      throw std::runtime_error(std::string("load_flow: payload shorter than header promises (") +
                               what + ")");
    if (!all_finite(dst))
      throw std::runtime_error(std::string("load_flow: non-finite payload (") + what + ")");
  };

  flow.velocity = VectorField(flow.grid);
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (fields[i] == "pressure")
      flow.pressure = ScalarField(flow.grid);
    else if (fields[i] == "force")
      flow.force = VectorField(flow.grid);
    else
      throw std::runtime_error("load_flow: unknown field '" + fields[i] + "'");
  }
  read_payload(flow.velocity.raw(), "velocity");
  if (flow.has_pressure()) read_payload(flow.pressure->raw(), "pressure");
  if (flow.has_force()) read_payload(flow.force->raw(), "force");
  char extra;
  if (in.read(&extra, 1), in.gcount() != 0)
    throw std::runtime_error("load_flow: payload longer than header promises");

  flow.metadata = "loaded:" + path;
  return flow;
}

}  // namespace cknscope
