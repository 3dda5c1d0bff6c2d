#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace starcrs {

// Sparse affine expression sum_i coef_i * x[var_i] + constant.
struct LinTerm {
  int var;
  double coef;
};

struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  LinExpr(int var, double coef, double c = 0.0) : terms{{var, coef}}, constant(c) {}

  LinExpr& add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
    return *this;
  }
  LinExpr& add(const LinExpr& e, double scale = 1.0);
  double eval(const Eigen::VectorXd& x) const;
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a.add(b); }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a.add(b, -1.0); }
  friend LinExpr operator*(double s, LinExpr a) {
    for (auto& t : a.terms) t.coef *= s;
    a.constant *= s;
    return a;
  }
};

// ||u|| <= t, members affine in x.
struct SocBlock {
  LinExpr t;
  std::vector<LinExpr> u;
};

// ||u||^2 <= 2 s t with s, t >= 0, members affine in x.
struct RsocBlock {
  LinExpr s, t;
  std::vector<LinExpr> u;
};

// maximize objective . x subject to the rows below.
struct ConicProgram {
  int n_vars = 0;
  std::vector<double> objective;
  std::vector<LinExpr> eq; // expr == 0
  std::vector<int> nonneg_vars;
  std::vector<SocBlock> soc_blocks;
  std::vector<RsocBlock> rsoc_blocks;

  int add_var(double obj_coef = 0.0);
  int add_vars(int n);
  int add_nonneg_var(double obj_coef = 0.0);
  void set_objective(int var, double coef) { objective.at(var) = coef; }
  void add_eq(LinExpr e) { eq.push_back(std::move(e)); }
  void mark_nonneg(int var) { nonneg_vars.push_back(var); }
  void add_soc(SocBlock b) { soc_blocks.push_back(std::move(b)); }
  void add_rsoc(RsocBlock b) { rsoc_blocks.push_back(std::move(b)); }

  // expr <= 0 via a fresh nonnegative slack.
  void add_ineq_le(LinExpr e);
  // sum_i u_i(x)^2 + c0 <= rhs(x), lowered to one rotated cone.
  void add_quad_le(std::vector<LinExpr> u, double c0, LinExpr rhs);
  // ||u(x)|| <= t(x)
  void add_norm_le(std::vector<LinExpr> u, LinExpr t);
  void pin(int var, double value) { add_eq(LinExpr(var, 1.0, -value)); }
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };
const char* status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

// Dense primal-dual interior-point solve. Reports infeasible/unbounded
// through the status; never throws on solvable-but-degenerate inputs.
SolveResult solve(const ConicProgram& prog, const SolverOptions& opts = {});

// Text round-trip of the full program (dimensions, objective, sparse rows,
// cone table). deserialize(serialize(p)) reproduces p exactly.
void serialize(std::ostream& out, const ConicProgram& prog);
std::string serialize(const ConicProgram& prog);
ConicProgram deserialize(std::istream& in);
ConicProgram deserialize(const std::string& text);

// --- complex lifting -------------------------------------------------------
// A complex vector v (dim n) occupies 2n consecutive reals [Re v; Im v].

Eigen::VectorXd lift_complex(const Eigen::VectorXcd& v);
Eigen::VectorXcd unlift_complex(const Eigen::VectorXd& x);
// Real representation of w -> M w: [[Re M, -Im M], [Im M, Re M]].
Eigen::MatrixXd lift_complex_matrix(const Eigen::MatrixXcd& M);

// Handle to a lifted complex vector variable inside a program.
struct ComplexVec {
  int base = -1; // first real index; Im parts live at base+n..base+2n-1
  int n = 0;
  int re(int i) const { return base + i; }
  int im(int i) const { return base + n + i; }
};

ComplexVec add_complex_vec(ConicProgram& prog, int n);
// Affine expressions for Re/Im of a^H v + b over a lifted variable v.
LinExpr re_inner(const Eigen::VectorXcd& a, const ComplexVec& v, std::complex<double> b = 0.0);
LinExpr im_inner(const Eigen::VectorXcd& a, const ComplexVec& v, std::complex<double> b = 0.0);
Eigen::VectorXcd extract(const ComplexVec& v, const Eigen::VectorXd& x);

} // namespace starcrs
