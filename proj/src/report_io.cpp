#include "cknscope/report_io.hpp"

#include <cstdio>

namespace cknscope {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_functional_reports_csv(std::ostream& out, const std::vector<FunctionalReport>& reports) {
  out << "x1,x2,x3,t,r,q,A,C,C_tilde,D,E_q,G,P,F\n";
  for (const auto& rep : reports) {
    for (const auto& [q, eq] : rep.Eq) {
      out << format_double(rep.x[0]) << ',' << format_double(rep.x[1]) << ','
          << format_double(rep.x[2]) << ',' << format_double(rep.t) << ',' << format_double(rep.r)
          << ',' << format_double(q) << ',' << format_double(rep.A) << ',' << format_double(rep.C)
          << ',' << format_double(rep.C_tilde) << ','
          << (rep.has_pressure ? format_double(rep.D) : "") << ',' << format_double(eq) << ','
          << format_double(rep.G) << ',' << (rep.has_pressure ? format_double(rep.P) : "") << ','
          << (rep.has_force ? format_double(rep.F) : format_double(0.0)) << "\n";
    }
  }
}

Json functional_reports_json(const std::vector<FunctionalReport>& reports) {
  Json arr = Json::array();
  for (const auto& rep : reports) {
    Json j;
    j["x"] = {rep.x[0], rep.x[1], rep.x[2]};
    j["t"] = rep.t;
    j["r"] = rep.r;
    j["A"] = rep.A;
    j["C"] = rep.C;
    j["C_tilde"] = rep.C_tilde;
    j["G"] = rep.G;
    j["E"] = rep.E2;
    Json eq = Json::array();
    for (const auto& [q, v] : rep.Eq) eq.push_back({{"q", q}, {"E_q", v}});
    j["E_q"] = eq;
    j["has_pressure"] = rep.has_pressure;
    j["has_force"] = rep.has_force;
    if (rep.has_pressure) {
      j["D"] = rep.D;
      j["P"] = rep.P;
    }
    j["F"] = rep.has_force ? rep.F : 0.0;
    arr.push_back(std::move(j));
  }
  return arr;
}

Json inequality_check_json(const InequalityCheck& chk) {
  Json j;
  j["lemma"] = chk.lemma;
  if (!chk.variant.empty()) j["variant"] = chk.variant;
  j["config"] = {{"x", {chk.config.x[0], chk.config.x[1], chk.config.x[2]}},
                 {"t", chk.config.t},
                 {"r", chk.config.r},
                 {"theta", chk.config.theta},
                 {"q", chk.config.q},
                 {"k", chk.config.k},
                 {"resolution", chk.config.resolution},
                 {"seed", chk.config.seed}};
  j["lhs"] = chk.lhs;
  Json terms = Json::array();
  for (const auto& [name, value] : chk.rhs_terms) terms.push_back({{"name", name}, {"value", value}});
  j["rhs_terms"] = terms;
  j["rhs_sum"] = chk.rhs_sum;
  j["ratio"] = chk.ratio;
  j["degenerate"] = chk.degenerate;
  j["pass"] = chk.pass;
  j["residual"] = chk.residual;
  return j;
}

void write_suite_checks_csv(std::ostream& out, const SuiteReport& report) {
  out << "lemma,variant,seed,resolution,r,theta,q,k,lhs,rhs_sum,ratio,degenerate,pass\n";
  for (const auto& chk : report.checks) {
    out << chk.lemma << ',' << chk.variant << ',' << chk.config.seed << ','
        << chk.config.resolution << ',' << format_double(chk.config.r) << ','
        << format_double(chk.config.theta) << ',' << format_double(chk.config.q) << ','
        << format_double(chk.config.k) << ',' << format_double(chk.lhs) << ','
        << format_double(chk.rhs_sum) << ',' << format_double(chk.ratio) << ','
        << (chk.degenerate ? 1 : 0) << ',' << (chk.pass ? 1 : 0) << "\n";
  }
}

Json suite_report_json(const SuiteReport& report) {
  Json j;
  j["config"] = {{"n_fields", report.spec.n_fields},
                 {"seed0", report.spec.seed0},
                 {"resolutions", report.spec.resolutions},
                 {"force_fraction", report.spec.force_fraction},
                 {"max_wavenumber", report.spec.max_wavenumber},
                 {"amplitude", report.spec.amplitude},
                 {"force_wavenumber", report.spec.force_wavenumber},
                 {"force_amplitude", report.spec.force_amplitude},
                 {"only_lemma", report.spec.only_lemma}};
  Json fits = Json::array();
  for (const auto& fit : report.fits) {
    Json f;
    f["lemma"] = fit.lemma;
    f["samples"] = fit.samples;
    f["max_ratio"] = fit.max_ratio;
    f["p95_ratio"] = fit.p95_ratio;
    Json per_res = Json::object();
    for (const auto& [n, v] : fit.max_by_resolution) per_res[std::to_string(n)] = v;
    f["max_by_resolution"] = per_res;
    f["stability_rel"] = fit.stability_rel;
    f["stable"] = fit.stable;
    fits.push_back(std::move(f));
  }
  j["fits"] = fits;
  Json lemmas = Json::object();
  for (const auto& chk : report.checks) {
    if (!lemmas.contains(chk.lemma)) lemmas[chk.lemma] = Json::array();
    lemmas[chk.lemma].push_back(inequality_check_json(chk));
  }
  j["lemmas"] = lemmas;
  return j;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "x1,x2,x3,t,criterion,epsilon,E_bar,E_under,product,decision\n";
  for (const auto& row : rows) {
    if (!row.ok) {
      out << format_double(row.z.x[0]) << ',' << format_double(row.z.x[1]) << ','
          << format_double(row.z.x[2]) << ',' << format_double(row.z.t) << ",,,,,,"
          << csv_field("error: " + row.error) << "\n";
      continue;
    }
    for (const auto& v : row.verdicts) {
      out << format_double(row.z.x[0]) << ',' << format_double(row.z.x[1]) << ','
          << format_double(row.z.x[2]) << ',' << format_double(row.z.t) << ',' << to_string(v.id)
          << ',' << format_double(v.epsilon) << ',' << format_double(v.e_bar) << ','
          << format_double(v.e_under) << ',' << format_double(v.product) << ','
          << to_string(v.decision) << "\n";
    }
  }
}

Json scan_json(const std::vector<ScanRow>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json j;
    j["x"] = {row.z.x[0], row.z.x[1], row.z.x[2]};
    j["t"] = row.z.t;
    j["ok"] = row.ok;
    if (!row.ok) {
      j["error"] = row.error;
    } else {
      j["E_bar"] = row.e_bar;
      j["E_under"] = row.e_under;
      Json verdicts = Json::array();
      for (const auto& v : row.verdicts)
        verdicts.push_back({{"criterion", to_string(v.id)},
                            {"epsilon", v.epsilon},
                            {"E_bar", v.e_bar},
                            {"E_under", v.e_under},
                            {"product", v.product},
                            {"threshold", v.threshold},
                            {"decision", to_string(v.decision)},
                            {"note", v.note}});
      j["verdicts"] = verdicts;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_iteration_csv(std::ostream& out, const IterationTrace& trace) {
  out << "step,Y,gap_to_limit\n";
  for (std::size_t k = 0; k < trace.Y.size(); ++k)
    out << k << ',' << format_double(trace.Y[k]) << ','
        << format_double(trace.Y[k] - trace.limit) << "\n";
}

Json iteration_json(const IterationTrace& trace) {
  Json j;
  j["beta"] = trace.beta;
  j["q"] = trace.q;
  j["M"] = trace.M;
  j["theta"] = trace.theta;
  j["increment"] = trace.increment;
  j["gamma"] = trace.gamma;
  j["limit"] = trace.limit;
  j["Y"] = trace.Y;
  return j;
}

void write_epsilon_curve_csv(std::ostream& out, double epsilon, const std::vector<double>& Ms) {
  out << "M,epsilon_over_M\n";
  for (double M : Ms)
    out << format_double(M) << ',' << format_double(seregin_default_epsilon(epsilon, M)) << "\n";
}

Json epsilon_curve_json(double epsilon, const std::vector<double>& Ms) {
  Json arr = Json::array();
  for (double M : Ms)
    arr.push_back({{"M", M}, {"epsilon_over_M", seregin_default_epsilon(epsilon, M)}});
  return arr;
}

Json theorem1_trace_json(const Theorem1Trace& trace) {
  Json j;
  j["M"] = trace.M;
  j["m"] = trace.m;
  j["q"] = trace.q;
  j["beta"] = trace.beta;
  j["trivial_branch"] = trace.trivial_branch;
  if (!trace.trivial_branch) {
    j["theta"] = trace.theta;
    j["epsilon"] = trace.epsilon;
    j["term_velocity"] = trace.term_velocity;
    j["term_gradient"] = trace.term_gradient;
    j["bound_direct"] = trace.bound_direct;
    j["bound_recombined"] = trace.bound_recombined;
    j["final_threshold"] = trace.final_threshold;
  }
  return j;
}

Json theorem2_trace_json(const Theorem2Trace& trace) {
  Json j;
  j["M"] = trace.M;
  j["m"] = trace.m;
  j["epsilon"] = trace.epsilon;
  j["beta"] = trace.beta;
  j["theta"] = trace.theta;
  Json mono = Json::array();
  for (const auto& [name, value] : trace.monomials)
    mono.push_back({{"name", name}, {"value", value}});
  j["monomials"] = mono;
  j["max_monomial"] = trace.max_monomial;
  j["dominating"] = trace.dominating;
  j["sqrt_epsilon"] = trace.sqrt_epsilon;
  j["within_sqrt_eps"] = trace.within_sqrt_eps;
  return j;
}

}  // namespace cknscope
