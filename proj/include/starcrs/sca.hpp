#pragma once

#include "starcrs/conic.hpp"
#include "starcrs/rates.hpp"

#include <cstdint>
#include <optional>

namespace starcrs {

// Quadratic majorant of the product a*b, expanded at (a0, b0):
//   nu(a,b) = (a+b)^2/4 - (a0-b0)(a-b)/2 + (a0-b0)^2/4 >= a*b, tight at (a0,b0).
double product_majorant(double a, double b, double a0, double b0);

// Affine minorant of |gbar + s^H psi|^2 in psi, expanded at psi0:
//   2 Re{(s^H psi0 + gbar)^H s^H psi} - |s^H psi0|^2 + |gbar|^2.
double squared_gain_minorant(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& psi0,
                             std::complex<double> gbar, const Eigen::VectorXcd& s);

// Concave quadratic minorant of v -> log2(a0c + v) on v >= floor(v0), tight with
// matching slope at v0. Valid (<= the log) wherever v >= v0/4.
struct LogMinorant {
  double v0 = 0, a0c = 1;
  double value0 = 0; // log2(a0c + v0)
  double slope = 0;  // 1 / ((a0c + v0) ln 2)
  double curv = 0;   // b with penalty term -b (v - v0)^2
  static LogMinorant at(double v0, double a0c = 1.0);
  double eval(double v) const;
  double trust_floor() const { return 0.25 * v0; }
};

struct AOOptions {
  double eps_outer = 1e-3;
  int max_outer = 30;
  double eps_inner = 1e-4;
  int max_inner = 60;
  double penalty_init = 100.0;
  double penalty_max = 1e4;
  double penalty_residual_tol = 1e-3;
  SolverOptions solver;

  // Scheme pins (equality rows in the emitted programs).
  bool pin_psi_zero = false;   // surface off: passive stage becomes a no-op
  bool pin_lambda_one = false; // HD modes: no cooperative phase
  bool pin_common_zero = false; // p_0 = 0 and c = 0
  bool noma = false; // private streams with SIC instead of rate splitting
  bool reduced_simple = false;  // fast path: drop constant SI/coop denominators

  std::optional<DesignPoint> init_point; // warm start instead of default init
};

// Expansion-point snapshot threaded through the SCA loops.
struct ScaState {
  DesignPoint point;
  double penalty_weight = 100.0;
  double penalized_objective = 0; // min-rate + weight * surface penalty
};

struct RunRecord {
  std::string scheme;
  std::string algorithm; // "ao" or "fast"
  Mode mode = Mode::FE;
  std::uint64_t seed = 0;
  double objective = 0; // exact rate-engine recomputation at `point`
  double wall_ms = 0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<double> outer_trace;   // penalized objective per outer iteration
  std::vector<double> passive_trace; // last passive inner loop
  std::vector<double> active_trace;  // last active inner loop
  RateBundle rates;
  FeasibilityReport report;
  DesignPoint point;

  std::string to_json() const;
};

// Surface-protocol penalty term (<= 0, zero exactly at protocol feasibility).
double surface_penalty(Mode mode, const DesignPoint& pt);
// Residual used for the penalty-weight doubling rule and feasibility checks.
double surface_residual(Mode mode, const DesignPoint& pt);

// Convexified surface subproblem at the given expansion point.
struct PassiveBuild {
  ConicProgram prog;
  ComplexVec psi_r, psi_t;
  int t_var = -1;
  bool trivial = false; // no surface / surface pinned: nothing to solve
};
PassiveBuild build_passive_step(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                                const DesignPoint& at, double penalty_weight,
                                const AOOptions& opts = {});

struct StepResult {
  DesignPoint point;
  std::vector<double> trace; // penalized objective after each accepted iterate
  double penalized_objective = 0;
  double penalty_weight = 0; // final weight (passive only)
  int iterations = 0;
  bool converged = false;
};
StepResult solve_passive(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                         const ScaState& start, const AOOptions& opts = {});

// Convexified precoder/common-share/time subproblem at fixed surface.
struct ActiveBuild {
  ConicProgram prog;
  ComplexVec p; // column-stacked P, nt*(n_users+1) complex entries
  std::vector<int> c_vars;
  int x_var = -1;
  int lam_var = -1, lamr_var = -1, lam1_var = -1, lam2_var = -1;
};
ActiveBuild build_active_step(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                              const DesignPoint& at, const AOOptions& opts = {});
StepResult solve_active(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                        const ScaState& start, const AOOptions& opts = {});

// Default initialization: the closed-form pipeline's point for the same
// instance. Starting there makes the alternating stages dominate the fast
// pipeline; matched-filter or nulling starts can stall in inferior basins.
DesignPoint default_init(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                         std::uint64_t seed);

// Full alternating optimization for one mode on one channel realization.
RunRecord alternate(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                    std::uint64_t seed, const AOOptions& opts = {});

} // namespace starcrs
