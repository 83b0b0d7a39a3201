#pragma once

#include <string>
#include <vector>

#include "cknscope/functionals.hpp"

namespace cknscope {

// Screening threshold used in reports when the caller does not supply one.
// The underlying theorems only assert existence of a positive constant; this
// numeric value is a toolkit convention.
inline constexpr double kDefaultEpsilon = 0.05;

// Geometric scale ladder r_k = r_max * rho^k, k = 0..count-1.
struct ScaleLadder {
  double r_max = 0.5;
  double rho = 0.5;
  int count = 4;
  std::vector<double> radii() const;
};

// Deepest ladder with ratio rho whose smallest rung stays resolvable.
ScaleLadder auto_ladder(const GridSpec& grid, double r_max, double rho = 0.5,
                        double min_r_cells = 4.0);

struct ScaleSweep {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
  double q = 2.0;
  bool has_pressure = false;
  std::vector<double> r;
  std::vector<double> Eq;
  std::vector<double> A;
  std::vector<double> D;  // empty without pressure
  std::vector<double> P;  // empty without pressure
};

ScaleSweep scale_sweep(const FunctionalEvaluator& ev, const Vec3& x, double t,
                       const ScaleLadder& ladder, double q);
ScaleSweep scale_sweep(const SampledFlow& flow, const Vec3& x, double t, const ScaleLadder& ladder,
                       double q);

// Discrete stand-ins for limsup / liminf of E_q: max / min over the
// tail_length smallest scales (default: half the ladder).
struct ScaleLimits {
  double E_bar = 0.0;
  double E_under = 0.0;
  int tail_length = 0;
};

ScaleLimits estimate_limits(const ScaleSweep& sweep, int tail_length = 0);

enum class CriterionId { Theorem1, Theorem2, CKN, Seregin };
enum class Decision { Regular, NotImplied };

const char* to_string(CriterionId id);
const char* to_string(Decision d);

struct CriterionVerdict {
  CriterionId id = CriterionId::CKN;
  double epsilon = kDefaultEpsilon;
  Decision decision = Decision::NotImplied;
  double e_bar = 0.0;
  double e_under = 0.0;
  double product = 0.0;    // the tested quantity
  double threshold = 0.0;  // what it is compared against
  std::string note;
};

// Regular when E_bar^{(5-q)/(q-1)} * E_under < epsilon, for 9/5 <= q < 2 and
// force-free data.
CriterionVerdict theorem1_verdict(const ScaleLimits& limits, double q, double epsilon,
                                  bool force_free = true);

// Regular when E_bar * E_under < epsilon; also reports the quantitative
// threshold form E_under < epsilon / E_bar.
CriterionVerdict theorem2_verdict(const ScaleLimits& limits, double epsilon);

// Classical small-gradient criterion: regular when E_bar < epsilon (q = 2).
CriterionVerdict ckn_verdict(const ScaleSweep& sweep, double epsilon, int tail_length = 0);

// Two-sided form: regular when E_bar <= M_cap and E_under < epsilon_at_cap.
CriterionVerdict seregin_verdict(const ScaleLimits& limits, double M_cap, double epsilon_at_cap);

// The quantitative relation epsilon(M) = epsilon / M.
double seregin_default_epsilon(double epsilon, double M);

// Affine iteration Y_{k+1} = Y_k / 2 + (2 beta)^{6/(q-1)} M^{2/(q-1)} whose
// fixed point is gamma M^{2/(q-1)} with gamma = 2 (2 beta)^{6/(q-1)}.
struct IterationTrace {
  double beta = 0.0, q = 0.0, M = 0.0;
  double theta = 0.0;      // (2 beta)^{-1}
  double increment = 0.0;  // (2 beta)^{6/(q-1)} M^{2/(q-1)}
  double gamma = 0.0;
  double limit = 0.0;
  std::vector<double> Y;
};

IterationTrace iterate_Y(double beta, double q, double M, double Y0, int steps);

// Bound chain of the q < 2 argument with theta = [M^{-q/(q-1)} m]^{1/5}.
struct Theorem1Trace {
  double M = 0.0, m = 0.0, q = 0.0, beta = 0.0;
  bool trivial_branch = false;  // m = 0
  double theta = 0.0;
  double epsilon = 0.0;           // M^{(5-q)/(q-1)} m
  double term_velocity = 0.0;     // beta theta^3 M^{3/(q-1)}
  double term_gradient = 0.0;     // beta theta^-2 M^{(3-q)/(q-1)} m
  double bound_direct = 0.0;      // sum of the two monomials
  double bound_recombined = 0.0;  // 2 beta epsilon^{3/5}
  double final_threshold = 0.0;   // 3 beta epsilon^{3/5}
};

Theorem1Trace theorem1_trace(double M, double m, double q, double beta);

// Monomials of the q = 2 chain at theta = sqrt(eps) / M.
struct Theorem2Trace {
  double M = 0.0, m = 0.0, epsilon = 0.0, beta = 0.0;
  double theta = 0.0;
  std::vector<std::pair<std::string, double>> monomials;
  double max_monomial = 0.0;
  std::string dominating;
  double sqrt_epsilon = 0.0;
  bool within_sqrt_eps = false;  // max <= beta * sqrt(eps)
};

Theorem2Trace theorem2_trace(double M, double m, double epsilon, double beta_structural);

// Tail control of A + D (and P) by powers of the gradient functional.
struct ControlReport {
  double q = 2.0;
  std::vector<double> r, A, D, P, Eq;
  double e_bar = 0.0;
  double tail_AD = 0.0;
  double tail_P = 0.0;
  double ratio_AD = 0.0;  // tail_AD / E_bar^{2/(q-1)}
  double ratio_P = 0.0;   // tail_P / E_bar^2
  bool degenerate = false;  // E_bar <= 1: outside the lemma hypothesis
};

ControlReport control_check(const FunctionalEvaluator& ev, const Vec3& x, double t,
                            const ScaleLadder& ladder, double q);

struct ScanPoint {
  Vec3 x{0.0, 0.0, 0.0};
  double t = 0.0;
};

struct ScanSpec {
  std::vector<ScanPoint> points;
  ScaleLadder ladder;
  int tail_length = 0;
  double q = 2.0;
  double epsilon = kDefaultEpsilon;
  double M_cap = 1.0;
  std::vector<CriterionId> criteria{CriterionId::CKN};
  int threads = 1;
};

struct ScanRow {
  ScanPoint z;
  bool ok = false;
  std::string error;
  double e_bar = 0.0;
  double e_under = 0.0;
  std::vector<CriterionVerdict> verdicts;
};

// Sweep + verdict per point; per-point failures are recorded, not fatal.
std::vector<ScanRow> scan_grid(const SampledFlow& flow, const ScanSpec& spec);

}  // namespace cknscope
