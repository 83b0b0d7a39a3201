#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cknscope/criterion.hpp"
#include "cknscope/harness.hpp"
#include "cknscope/pressure.hpp"
#include "cknscope/rational.hpp"
#include "cknscope/report_io.hpp"

namespace {

using namespace cknscope;

struct GenParams {
  std::string kind;
  int n = 64;
  double box_length = kTwoPi;
  int n_times = 17;
  double t0 = 0.0, t1 = 0.5;
  double slope = 1.0;
  std::vector<double> abc{1.0, 1.0, 1.0};
  int mode = 1;
  double viscosity = 1.0;
  double blowup_time = -1.0;  // default: t1
  double sigma = 1.0;
  std::uint64_t seed = 1;
  int kmax = 4;
  double amplitude = 1.0;
  int force_kmax = 2;
  double force_amplitude = 0.0;
};

void add_gen_options(CLI::App* cmd, GenParams& p, bool require_kind) {
  auto* kind = cmd->add_option("--kind", p.kind, "Generator: shear|beltrami|selfsimilar|random");
  if (require_kind) kind->required();
  cmd->add_option("--n", p.n, "Cells per axis");
  cmd->add_option("--box-length", p.box_length, "Physical box side length");
  cmd->add_option("--n-times", p.n_times, "Number of time slices");
  cmd->add_option("--t0", p.t0, "Start time");
  cmd->add_option("--t1", p.t1, "End time");
  cmd->add_option("--slope", p.slope, "Shear slope");
  cmd->add_option("--abc", p.abc, "Beltrami amplitudes A,B,C")->expected(3);
  cmd->add_option("--mode", p.mode, "Beltrami mode index");
  cmd->add_option("--viscosity", p.viscosity, "Viscosity (must be 1)");
  cmd->add_option("--blowup-time", p.blowup_time, "Self-similar blow-up time (default t1)");
  cmd->add_option("--sigma", p.sigma, "Self-similar profile scale");
  cmd->add_option("--seed", p.seed, "Random generator seed");
  cmd->add_option("--kmax", p.kmax, "Random band limit");
  cmd->add_option("--amplitude", p.amplitude, "Random field amplitude");
  cmd->add_option("--force-kmax", p.force_kmax, "Random force band limit");
  cmd->add_option("--force-amplitude", p.force_amplitude, "Random force amplitude (0 = none)");
}

SampledFlow run_generator(const GenParams& p) {
  GridSpec grid{p.n, p.box_length, p.n_times, p.t0, p.t1};
  if (p.kind == "shear") return make_shear_flow(grid, p.slope);
  if (p.kind == "beltrami") {
    BeltramiParams bp;
    bp.a = p.abc[0];
    bp.b = p.abc[1];
    bp.c = p.abc[2];
    bp.mode = p.mode;
    bp.viscosity = p.viscosity;
    return make_beltrami_flow(grid, bp);
  }
  if (p.kind == "selfsimilar")
    return make_selfsimilar_fixture(grid, p.blowup_time < 0 ? p.t1 : p.blowup_time, p.sigma);
  if (p.kind == "random") {
    RandomFlowOptions opt;
    opt.max_wavenumber = p.kmax;
    opt.amplitude = p.amplitude;
    opt.force_wavenumber = p.force_kmax;
    opt.force_amplitude = p.force_amplitude;
    return make_random_divfree_flow(grid, p.seed, opt);
  }
  throw CLI::ValidationError("--kind", "unknown generator '" + p.kind + "'");
}

SampledFlow acquire_flow(const std::string& flow_path, const GenParams& gen) {
  if (!flow_path.empty() && !gen.kind.empty())
    throw CLI::ValidationError("--flow", "give either --flow or --kind, not both");
  if (!flow_path.empty()) return load_flow(flow_path);
  if (!gen.kind.empty()) return run_generator(gen);
  throw CLI::ValidationError("--flow", "a flow source is required: --flow or --kind");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

ScanPoint parse_point(const std::string& text) {
  const auto vals = parse_list(text);
  if (vals.size() != 4)
    throw CLI::ValidationError("--point", "expected x1,x2,x3,t: '" + text + "'");
  return {{vals[0], vals[1], vals[2]}, vals[3]};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  return f;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  auto f = open_output(path);
  f << text;
}

int env_threads() {
  if (const char* env = std::getenv("CKNSCOPE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cknscope: scaled functionals over parabolic cylinders, inequality verification "
               "and regularity screening on periodic flow samples"};
  app.require_subcommand(1);

  // ---- gen ---------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("gen", "Generate a flow and write an NSFLOW1 file");
  GenParams gen_p;
  std::string gen_out;
  add_gen_options(gen_cmd, gen_p, true);
  gen_cmd->add_option("--out", gen_out, "Output flow file")->required();

  // ---- functionals --------------------------------------------------------
  auto* fun_cmd = app.add_subcommand("functionals", "Evaluate the scaled functionals at (z, r)");
  GenParams fun_gen;
  std::string fun_flow, fun_out = "-", fun_format = "csv", fun_q = "1.8,1.9,2.0";
  std::vector<std::string> fun_points;
  std::vector<double> fun_radii;
  bool fun_require_pressure = false;
  bool fun_center = false;
  add_gen_options(fun_cmd, fun_gen, false);
  fun_cmd->add_option("--flow", fun_flow, "Flow file (NSFLOW1)");
  fun_cmd->add_option("--point", fun_points, "Evaluation point x1,x2,x3,t (repeatable)");
  fun_cmd->add_flag("--center", fun_center, "Evaluate at the box center, t = t1");
  fun_cmd->add_option("--r", fun_radii, "Cylinder radii")->required();
  fun_cmd->add_option("--q", fun_q, "Comma list of gradient exponents");
  fun_cmd->add_option("--format", fun_format, "csv|json");
  fun_cmd->add_option("--out", fun_out, "Output path ('-' = stdout)");
  fun_cmd->add_flag("--require-pressure", fun_require_pressure,
                    "Fail when the flow carries no pressure");

  // ---- verify --------------------------------------------------------------
  auto* ver_cmd = app.add_subcommand("verify", "Run the inequality suite and fit constants");
  SuiteSpec suite;
  std::string ver_out = "-", ver_csv, ver_lemma, ver_q = "2", ver_k = "1/4", ver_res = "32,64";
  bool ver_no_balance = false;
  int ver_threads = 0;
  ver_cmd->add_option("--fields", suite.n_fields, "Number of random fields");
  ver_cmd->add_option("--seed", suite.seed0, "Base seed");
  ver_cmd->add_option("--resolutions", ver_res, "Comma list of grid resolutions");
  ver_cmd->add_option("--force-fraction", suite.force_fraction,
                      "Fraction of fields with a body force");
  ver_cmd->add_option("--threads", ver_threads, "Worker threads (env CKNSCOPE_THREADS fallback)");
  ver_cmd->add_option("--lemma", ver_lemma, "Restrict to one lemma id (e.g. L52)");
  ver_cmd->add_option("--q", ver_q, "Exponent q for the L52 echo (exact decimal/rational)");
  ver_cmd->add_option("--k", ver_k, "Exponent k for the L52 echo (exact decimal/rational)");
  ver_cmd->add_flag("--no-balance", ver_no_balance, "Skip the exact-solution energy balance");
  ver_cmd->add_option("--out", ver_out, "JSON report path ('-' = stdout)");
  ver_cmd->add_option("--csv", ver_csv, "Optional flat CSV export");

  // ---- scan ----------------------------------------------------------------
  auto* scan_cmd = app.add_subcommand("scan", "Sweep scales and issue criterion verdicts per point");
  GenParams scan_gen;
  std::string scan_flow, scan_out = "-", scan_format = "csv";
  std::vector<std::string> scan_points;
  std::vector<std::string> scan_criteria{"ckn"};
  int scan_lattice = 0, scan_depth = 0, scan_tail = 0, scan_threads = 0;
  double scan_time = -1.0, scan_extent = -1.0, scan_rmax = 0.0, scan_rho = 0.5;
  double scan_eps = kDefaultEpsilon, scan_q = 2.0, scan_mcap = 1.0;
  bool scan_strict = false;
  add_gen_options(scan_cmd, scan_gen, false);
  scan_cmd->add_option("--flow", scan_flow, "Flow file (NSFLOW1)");
  scan_cmd->add_option("--point", scan_points, "Scan point x1,x2,x3,t (repeatable)");
  scan_cmd->add_option("--lattice", scan_lattice, "K^3 lattice of interior points around the center");
  scan_cmd->add_option("--lattice-extent", scan_extent, "Half-extent of the lattice (default L/10)");
  scan_cmd->add_option("--time", scan_time, "Lattice evaluation time (default t1)");
  scan_cmd->add_option("--rmax", scan_rmax, "Largest ladder radius (default: resolvable max)");
  scan_cmd->add_option("--rho", scan_rho, "Ladder ratio in (0,1)");
  scan_cmd->add_option("--depth", scan_depth, "Ladder length (default: deepest resolvable)");
  scan_cmd->add_option("--tail", scan_tail, "Tail length for limsup/liminf estimates");
  scan_cmd->add_option("--criterion", scan_criteria,
                       "ckn|theorem1|theorem2|seregin|all (repeatable)");
  scan_cmd->add_option("--epsilon", scan_eps, "Criterion threshold");
  scan_cmd->add_option("--q", scan_q, "Gradient exponent for the sweep");
  scan_cmd->add_option("--M-cap", scan_mcap, "Seregin cap M");
  scan_cmd->add_option("--threads", scan_threads, "Worker threads");
  scan_cmd->add_flag("--strict", scan_strict, "Exit nonzero on any per-point failure");
  scan_cmd->add_option("--format", scan_format, "csv|json");
  scan_cmd->add_option("--out", scan_out, "Output path ('-' = stdout)");

  // ---- trace ----------------------------------------------------------------
  auto* trace_cmd = app.add_subcommand("trace", "Iteration and theorem bound-chain traces");
  bool tr_iteration = false, tr_t1 = false, tr_t2 = false, tr_curve = false;
  double tr_beta = 2.0, tr_q = 2.0, tr_M = 2.0, tr_Y0 = 0.0, tr_m = 0.0, tr_eps = kDefaultEpsilon;
  int tr_steps = 40;
  std::string tr_Ms = "1,2,4", tr_out = "-", tr_format = "csv";
  trace_cmd->add_flag("--iteration", tr_iteration, "Affine decay iteration");
  trace_cmd->add_flag("--theorem1", tr_t1, "q<2 bound chain");
  trace_cmd->add_flag("--theorem2", tr_t2, "q=2 bound chain");
  trace_cmd->add_flag("--epsilon-curve", tr_curve, "epsilon(M) = eps/M table");
  trace_cmd->add_option("--beta", tr_beta, "Iteration/structural constant");
  trace_cmd->add_option("--q", tr_q, "Gradient exponent");
  trace_cmd->add_option("--M", tr_M, "Upper gradient limit M");
  trace_cmd->add_option("--m", tr_m, "Lower gradient limit m");
  trace_cmd->add_option("--Y0", tr_Y0, "Iteration start value");
  trace_cmd->add_option("--steps", tr_steps, "Iteration steps");
  trace_cmd->add_option("--eps", tr_eps, "Threshold epsilon");
  trace_cmd->add_option("--Ms", tr_Ms, "Comma list of M for the curve");
  trace_cmd->add_option("--format", tr_format, "csv|json");
  trace_cmd->add_option("--out", tr_out, "Output path ('-' = stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const SampledFlow flow = run_generator(gen_p);
      save_flow(flow, gen_out);
      std::cout << "wrote " << gen_out << " [" << flow.metadata << "] n=" << flow.grid.n
                << " n_times=" << flow.grid.n_times << " fields=velocity"
                << (flow.has_pressure() ? ",pressure" : "") << (flow.has_force() ? ",force" : "")
                << "\n";
      return 0;
    }

    if (*fun_cmd) {
      SampledFlow flow = acquire_flow(fun_flow, fun_gen);
      if (fun_require_pressure && !flow.has_pressure())
        throw std::runtime_error("flow carries no pressure field (--require-pressure)");
      std::vector<ScanPoint> points;
      for (const auto& p : fun_points) points.push_back(parse_point(p));
      if (fun_center || points.empty()) points.push_back({flow.grid.center(), flow.grid.t1});
      FunctionalParams params;
      params.q_grid = parse_list(fun_q);
      FunctionalEvaluator ev(flow, params);
      std::vector<FunctionalReport> reports;
      for (const auto& pt : points)
        for (double r : fun_radii) reports.push_back(ev.report(pt.x, pt.t, r));
      std::ostringstream out;
      if (fun_format == "json") {
        Json j;
        j["flow"] = flow.metadata;
        j["q_grid"] = params.q_grid;
        j["reports"] = functional_reports_json(reports);
        out << j.dump(2) << "\n";
      } else {
        out << "# flow=" << flow.metadata << "\n";
        write_functional_reports_csv(out, reports);
      }
      emit(fun_out, out.str());
      return 0;
    }

    if (*ver_cmd) {
      suite.resolutions.clear();
      for (double v : parse_list(ver_res)) suite.resolutions.push_back(static_cast<int>(v));
      suite.threads = ver_threads > 0 ? ver_threads : env_threads();
      suite.only_lemma = ver_lemma;
      const SuiteReport report = fit_constants(suite);
      Json j = suite_report_json(report);
      if (ver_lemma == "L52") {
        const Rational q = parse_rational(ver_q);
        const Rational k = parse_rational(ver_k);
        j["exponents"] = {{"q", q.str()},
                          {"k", k.str()},
                          {"admissible", k_admissible(q, k)},
                          {"A_exponent", interp_exponent_a(q, k).str()},
                          {"Eq_exponent", interp_exponent_b(q, k).str()}};
      }
      if (!ver_no_balance && ver_lemma.empty()) {
        Json balance = Json::array();
        Json decomposition = Json::array();
        for (int n : suite.resolutions) {
          GridSpec grid{n, kTwoPi, 3 * n / 4 + 1, 0.0, 2.7};
          const SampledFlow bel = make_beltrami_flow(grid);
          const auto chk = check_energy_balance(bel, {grid.center(), grid.t1, 0.8});
          balance.push_back(inequality_check_json(chk));

          // Local splitting diagnostics on one exact-solution slice and one
          // suite-style random slice per resolution.
          auto decomp_entry = [&](const SampledFlow& flow, const char* kind) {
            const auto dec = decompose_local(flow, flow.grid.center(), 0.75, 1);
            double rec = 0.0;
            for (std::size_t i = 0; i < dec.cells.size(); ++i)
              rec = std::max(rec,
                             std::abs(dec.p_total[i] - (dec.p01[i] + dec.p02[i] + dec.ph[i])));
            const auto diag = harmonic_interior_estimates(dec, flow.grid, 0.3);
            decomposition.push_back({{"kind", kind},
                                     {"n", n},
                                     {"radius", dec.radius},
                                     {"cells", dec.cells.size()},
                                     {"reconstruction_max", rec},
                                     {"harmonic_residual", dec.harmonic_residual},
                                     {"boundary_residual", dec.boundary_residual},
                                     {"cg_iters_velocity", dec.cg_iters_v},
                                     {"cg_residual_velocity", dec.cg_residual_v},
                                     {"cg_iters_force", dec.cg_iters_f},
                                     {"grad_sup_inner", diag.grad_sup_inner},
                                     {"mean_value_gap", diag.mean_value_gap}});
          };
          decomp_entry(bel, "beltrami");
          GridSpec rgrid{n, kTwoPi, 9, 0.0, 1.0};
          RandomFlowOptions ropt;
          ropt.max_wavenumber = suite.max_wavenumber;
          ropt.amplitude = suite.amplitude;
          ropt.force_wavenumber = suite.force_wavenumber;
          ropt.force_amplitude = suite.force_amplitude;
          decomp_entry(make_random_divfree_flow(rgrid, suite.seed0, ropt), "random");
        }
        j["energy_balance"] = balance;
        j["decomposition"] = decomposition;
      }
      emit(ver_out, j.dump(2) + "\n");
      if (!ver_csv.empty()) {
        auto f = open_output(ver_csv);
        write_suite_checks_csv(f, report);
      }
      return 0;
    }

    if (*scan_cmd) {
      SampledFlow flow = acquire_flow(scan_flow, scan_gen);
      ScanSpec spec;
      for (const auto& p : scan_points) spec.points.push_back(parse_point(p));
      if (scan_lattice > 0) {
        const double t = scan_time < 0 ? flow.grid.t1 : scan_time;
        const double ext = scan_extent < 0 ? flow.grid.box_length / 10.0 : scan_extent;
        const Vec3 c = flow.grid.center();
        for (int a = 0; a < scan_lattice; ++a)
          for (int b = 0; b < scan_lattice; ++b)
            for (int d = 0; d < scan_lattice; ++d) {
              auto offset = [&](int i) {
                return scan_lattice == 1 ? 0.0 : -ext + 2.0 * ext * i / (scan_lattice - 1);
              };
              spec.points.push_back({{c[0] + offset(a), c[1] + offset(b), c[2] + offset(d)}, t});
            }
      }
      if (spec.points.empty()) spec.points.push_back({flow.grid.center(), flow.grid.t1});
      spec.q = scan_q;
      spec.epsilon = scan_eps;
      spec.M_cap = scan_mcap;
      spec.tail_length = scan_tail;
      spec.threads = scan_threads > 0 ? scan_threads : env_threads();
      spec.criteria.clear();
      for (const auto& name : scan_criteria) {
        if (name == "all") {
          spec.criteria = {CriterionId::CKN, CriterionId::Theorem1, CriterionId::Theorem2,
                           CriterionId::Seregin};
          break;
        }
        if (name == "ckn")
          spec.criteria.push_back(CriterionId::CKN);
        else if (name == "theorem1")
          spec.criteria.push_back(CriterionId::Theorem1);
        else if (name == "theorem2")
          spec.criteria.push_back(CriterionId::Theorem2);
        else if (name == "seregin")
          spec.criteria.push_back(CriterionId::Seregin);
        else
          throw CLI::ValidationError("--criterion", "unknown criterion '" + name + "'");
      }
      {
        double rmax = scan_rmax;
        if (rmax <= 0.0) {
          double worst_room = flow.region.max_ball_radius(flow.grid, spec.points[0].x);
          for (const auto& p : spec.points)
            worst_room = std::min(worst_room, flow.region.max_ball_radius(flow.grid, p.x));
          rmax = std::min(0.95 * worst_room, std::sqrt((flow.grid.t1 - flow.grid.t0) * 0.95));
        }
        spec.ladder = auto_ladder(flow.grid, rmax, scan_rho);
        if (scan_depth > 0) spec.ladder.count = std::min(spec.ladder.count, scan_depth);
      }
      const auto rows = scan_grid(flow, spec);
      std::ostringstream out;
      if (scan_format == "json") {
        Json j;
        j["flow"] = flow.metadata;
        j["ladder"] = {{"r_max", spec.ladder.r_max},
                       {"rho", spec.ladder.rho},
                       {"count", spec.ladder.count}};
        j["epsilon"] = spec.epsilon;
        j["q"] = spec.q;
        j["rows"] = scan_json(rows);
        out << j.dump(2) << "\n";
      } else {
        out << "# flow=" << flow.metadata << " rmax=" << format_double(spec.ladder.r_max)
            << " rho=" << format_double(spec.ladder.rho) << " depth=" << spec.ladder.count
            << " epsilon=" << format_double(spec.epsilon) << " q=" << format_double(spec.q)
            << "\n";
        write_scan_csv(out, rows);
      }
      emit(scan_out, out.str());
      if (scan_strict)
        for (const auto& row : rows)
          if (!row.ok) return 2;
      return 0;
    }

    if (*trace_cmd) {
      const int modes =
          (tr_iteration ? 1 : 0) + (tr_t1 ? 1 : 0) + (tr_t2 ? 1 : 0) + (tr_curve ? 1 : 0);
      if (modes != 1)
        throw CLI::ValidationError(
            "trace", "pick exactly one of --iteration --theorem1 --theorem2 --epsilon-curve");
      std::ostringstream out;
      if (tr_iteration) {
        const IterationTrace tr = iterate_Y(tr_beta, tr_q, tr_M, tr_Y0, tr_steps);
        if (tr_format == "json")
          out << iteration_json(tr).dump(2) << "\n";
        else {
          out << "# beta=" << format_double(tr.beta) << " q=" << format_double(tr.q)
              << " M=" << format_double(tr.M) << " gamma=" << format_double(tr.gamma)
              << " limit=" << format_double(tr.limit) << "\n";
          write_iteration_csv(out, tr);
        }
      } else if (tr_t1) {
        const Theorem1Trace tr = theorem1_trace(tr_M, tr_m, tr_q, tr_beta);
        out << theorem1_trace_json(tr).dump(2) << "\n";
      } else if (tr_t2) {
        const Theorem2Trace tr = theorem2_trace(tr_M, tr_m, tr_eps, tr_beta);
        out << theorem2_trace_json(tr).dump(2) << "\n";
      } else {
        const auto Ms = parse_list(tr_Ms);
        if (tr_format == "json")
          out << epsilon_curve_json(tr_eps, Ms).dump(2) << "\n";
        else {
          out << "# eps=" << format_double(tr_eps) << "\n";
          write_epsilon_curve_csv(out, tr_eps, Ms);
        }
      }
      emit(tr_out, out.str());
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
