#pragma once

#include "starcrs/conic.hpp"
#include "starcrs/rates.hpp"
#include "starcrs/sca.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace starcrs::detail {

// One squared channel gain |gbar + s^H psi|^2 seen as a function of a surface
// vector. An empty s means the term does not depend on the surface.
struct GainTerm {
  std::complex<double> gbar;
  Eigen::VectorXcd s;
};

double gain_value(const GainTerm& g, const Eigen::VectorXcd& psi0);
// Affine lower bound of the squared gain over the lifted variable, tight at psi0.
LinExpr gain_minorant(const GainTerm& g, const ComplexVec& psi, const Eigen::VectorXcd& psi0);

// SINR (or rate) slack handle. var < 0 marks a cell that folded to a constant
// because nothing in it depends on the decision variables.
struct SinrCell {
  int var = -1;
  double value = 0.0; // expansion value when active, exact value otherwise
  bool active() const { return var >= 0; }
  LinExpr expr() const { return active() ? LinExpr(var, 1.0) : LinExpr(value); }
};

// Sum of quadratic product majorants bounded by an affine expression; all
// majorants share one rotated cone. add_product contributes the upper bound
//   (a+b)^2/4 - (a0-b0)(a-b)/2 + (a0-b0)^2/4 >= a*b, tight at (a0,b0).
struct ProductSurrogateRow {
  std::vector<LinExpr> u;
  LinExpr budget;
  void add_product(const LinExpr& a, const LinExpr& b, double a0, double b0);
  void require_le(ConicProgram& prog, LinExpr rhs);
};

// Accumulates sum_j w_j log2(a0c_j + v_j) over affine arguments v_j, each term
// replaced by its concave quadratic minorant at v0_j. The trust-floor row
// v_j >= v0_j / 4 that keeps the minorant valid is emitted alongside.
struct ConcaveLogSum {
  ConicProgram* prog;
  std::vector<LinExpr> u;
  LinExpr affine;
  explicit ConcaveLogSum(ConicProgram& p) : prog(&p) {}
  void add_term(double weight, const LinExpr& v, double v0, double a0c = 1.0);
  void add_const(double value) { affine.constant += value; }
  // target <= accumulated sum, as one rotated cone
  void require_at_least(LinExpr target);
};

// Change of units putting the power budget and noise floor at 1 so the
// emitted conic data is O(1) regardless of the physical scale. Every SINR is
// invariant; precoders shrink by amp and must be scaled back on the way out.
// The user-user bounce is quadratic in h, hence the split square-root factor.
struct UnitScale {
  SystemConfig cfg;
  ChannelSet ch;
  double amp = 1.0; // sqrt(pt): P_physical = amp * P_scaled
  bool scaled = false;
};
UnitScale unit_scale(const SystemConfig& cfg, const ChannelSet& ch);

// Surface side a user listens to in a slot: 0 reflect, 1 transmit, -1 dark.
int slot_side(const SystemConfig& cfg, SlotSurface slot, int user);

// Channel products feeding the surface subproblem. Stream m reaching user k:
//   gt_k^H p_m = g_k^H p_m + s^H psi  with s[n] = h_k[n] conj((E p_m)[n]).
GainTerm direct_term(const ChannelSet& ch, const Eigen::MatrixXcd& P, int user, int col);
// Relay m to destination k (conjugated so the surface enters linearly):
//   conj(ht(m,k)) = conj(h_uu(m,k)) + s^H psi  with s[n] = conj(h_k[n]) h_m[n].
GainTerm coop_term(const ChannelSet& ch, int relay, int dest);

// Affine Re/Im of a^H P.col(col) over the column-stacked lifted precoder.
LinExpr re_col(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col);
LinExpr im_col(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col);
// Affine lower bound of |a^H P.col(col)|^2, tight at the expansion precoder P0.
LinExpr col_gain_minorant(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col,
                          const Eigen::MatrixXcd& P0);

// SIC decode order, strongest effective direct channel first; ties keep the
// lower user index first.
std::vector<int> noma_order(const std::vector<Eigen::VectorXcd>& gt);

// Forwarded-branch SNR of each destination, a constant within one step.
Eigen::VectorXd coop_snr(const SystemConfig& cfg, const EffectiveChannels& eff);

// alpha <= log2(a0c + cell), needed wherever a rate multiplies a time share.
SinrCell rate_slack(ConicProgram& prog, const SinrCell& cell, double a0c = 1.0);

int add_range_var(ConicProgram& prog, double lo, double hi);

// SINR cells of one transmission slot: common/private per user plus each
// destination's forwarded-branch constant.
struct SlotCells {
  std::vector<SinrCell> common, priv;
  Eigen::VectorXd coop;
};

struct TimeVars {
  int lam = -1, lamr = -1, lam1 = -1, lam2 = -1;
};

// Emits the per-mode epigraph and common-pool rows shared by the full active
// step and the reduced power-allocation step. The factory builds the slot's
// SINR cells against whichever decision variables the caller optimizes; the
// bool argument asks for full-duplex self-interference in the denominators.
TimeVars wire_mode_rows(ConicProgram& prog, const SystemConfig& cfg, Mode mode,
                        const DesignPoint& at, const AOOptions& opts,
                        const std::function<SlotCells(SlotSurface, bool)>& make_slot,
                        const std::vector<int>& c_vars, int x_var);

// Exact objective of a point under the run options (the NOMA switch changes
// the rate law, everything else follows mode_rates).
double exact_objective(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                       const DesignPoint& pt, const AOOptions& opts);

// Rescales the common shares down when solver tolerance left sum(c) a hair
// above the pooled common rate, keeping the reported objective achievable.
void restore_common_pool(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                         DesignPoint& pt, const AOOptions& opts);

// Re-applies scheme pins exactly, clearing solver-tolerance dust.
void apply_pins(DesignPoint& pt, const AOOptions& opts);

} // namespace starcrs::detail
