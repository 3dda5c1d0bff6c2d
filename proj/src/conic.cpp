#include "starcrs/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace starcrs {

LinExpr& LinExpr::add(const LinExpr& e, double scale) {
  for (const auto& t : e.terms)
    if (t.coef * scale != 0.0) terms.push_back({t.var, t.coef * scale});
  constant += e.constant * scale;
  return *this;
}

double LinExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x[t.var];
  return v;
}

int ConicProgram::add_var(double obj_coef) {
  objective.push_back(obj_coef);
  return n_vars++;
}

int ConicProgram::add_vars(int n) {
  int first = n_vars;
  for (int i = 0; i < n; ++i) add_var();
  return first;
}

int ConicProgram::add_nonneg_var(double obj_coef) {
  int v = add_var(obj_coef);
  mark_nonneg(v);
  return v;
}

void ConicProgram::add_ineq_le(LinExpr e) {
  int s = add_nonneg_var();
  e.add(s, 1.0);
  add_eq(std::move(e));
}

void ConicProgram::add_quad_le(std::vector<LinExpr> u, double c0, LinExpr rhs) {
  RsocBlock b;
  b.u = std::move(u);
  b.s = std::move(rhs);
  b.s.constant -= c0;
  b.t = LinExpr(0.5);
  add_rsoc(std::move(b));
}

void ConicProgram::add_norm_le(std::vector<LinExpr> u, LinExpr t) {
  SocBlock b;
  b.u = std::move(u);
  b.t = std::move(t);
  add_soc(std::move(b));
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIterations: return "max_iter";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

// --------------------------------------------------------------------------
// Lowering to   min c.x  s.t.  A x = b,  G x + s = h,  s in K,
// K = R+^lp x SOC(d1) x ... Rotated cones become plain SOCs of dim |u|+2.

namespace {

struct StdForm {
  int n = 0, p = 0, m = 0;
  Eigen::MatrixXd A, G;
  Eigen::VectorXd b, h, c;
  int lp = 0;
  std::vector<int> soc_dims;
};

void put_expr(Eigen::MatrixXd& M, Eigen::VectorXd& rhs, int row, const LinExpr& e,
              double scale) {
  // encodes  s_row = scale * e(x)  as  G x + s = h
  for (const auto& t : e.terms) M(row, t.var) -= scale * t.coef;
  rhs[row] = scale * e.constant;
}

StdForm lower(const ConicProgram& prog) {
  StdForm f;
  f.n = prog.n_vars;
  f.c = -Eigen::Map<const Eigen::VectorXd>(prog.objective.data(), prog.n_vars);
  f.lp = static_cast<int>(prog.nonneg_vars.size());

  std::vector<char> touched(prog.n_vars, 0);
  auto touch = [&](const LinExpr& e) {
    for (const auto& t : e.terms) touched[t.var] = 1;
  };
  for (const auto& e : prog.eq) touch(e);
  for (int v : prog.nonneg_vars) touched[v] = 1;
  for (const auto& b : prog.soc_blocks) {
    touch(b.t);
    for (const auto& u : b.u) touch(u);
  }
  for (const auto& b : prog.rsoc_blocks) {
    touch(b.s);
    touch(b.t);
    for (const auto& u : b.u) touch(u);
  }
  std::vector<int> loose;
  for (int v = 0; v < prog.n_vars; ++v)
    if (!touched[v]) loose.push_back(v); // pinned to 0 below, else KKT is singular

  f.p = static_cast<int>(prog.eq.size() + loose.size());
  f.A.setZero(f.p, f.n);
  f.b.setZero(f.p);
  for (size_t i = 0; i < prog.eq.size(); ++i) {
    for (const auto& t : prog.eq[i].terms) f.A(static_cast<int>(i), t.var) += t.coef;
    f.b[static_cast<int>(i)] = -prog.eq[i].constant;
  }
  for (size_t i = 0; i < loose.size(); ++i)
    f.A(static_cast<int>(prog.eq.size() + i), loose[i]) = 1.0;

  f.m = f.lp;
  for (const auto& b : prog.soc_blocks) f.m += 1 + static_cast<int>(b.u.size());
  for (const auto& b : prog.rsoc_blocks) f.m += 2 + static_cast<int>(b.u.size());

  f.G.setZero(f.m, f.n);
  f.h.setZero(f.m);
  int row = 0;
  for (int v : prog.nonneg_vars) f.G(row++, v) = -1.0; // s = x_v
  for (const auto& b : prog.soc_blocks) {
    f.soc_dims.push_back(1 + static_cast<int>(b.u.size()));
    put_expr(f.G, f.h, row++, b.t, 1.0);
    for (const auto& u : b.u) put_expr(f.G, f.h, row++, u, 1.0);
  }
  for (const auto& b : prog.rsoc_blocks) {
    // ||u||^2 <= 2 s t  <=>  ||(s - t, sqrt2 u)|| <= s + t
    f.soc_dims.push_back(2 + static_cast<int>(b.u.size()));
    LinExpr sum = b.s, dif = b.s;
    sum.add(b.t, 1.0);
    dif.add(b.t, -1.0);
    put_expr(f.G, f.h, row++, sum, 1.0);
    put_expr(f.G, f.h, row++, dif, 1.0);
    for (const auto& u : b.u) put_expr(f.G, f.h, row++, u, std::sqrt(2.0));
  }
  return f;
}

// --- cone algebra over the concatenated (lp, socs) layout -------------------

struct ConeLayout {
  int lp = 0;
  std::vector<int> soc_dims;
  std::vector<int> soc_off;
  int dim = 0;
  int order() const { return lp + static_cast<int>(soc_dims.size()); }
};

ConeLayout layout_of(const StdForm& f) {
  ConeLayout L;
  L.lp = f.lp;
  L.soc_dims = f.soc_dims;
  int off = f.lp;
  for (int d : f.soc_dims) {
    L.soc_off.push_back(off);
    off += d;
  }
  L.dim = off;
  return L;
}

Eigen::VectorXd cone_identity(const ConeLayout& L) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(L.dim);
  e.head(L.lp).setOnes();
  for (size_t i = 0; i < L.soc_dims.size(); ++i) e[L.soc_off[i]] = 1.0;
  return e;
}

// residual of cone membership: min eigenvalue-ish margin (positive inside)
double cone_margin(const ConeLayout& L, const Eigen::VectorXd& v) {
  double mg = std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.lp; ++i) mg = std::min(mg, v[i]);
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    mg = std::min(mg, v[o] - v.segment(o + 1, d - 1).norm());
  }
  return mg;
}

Eigen::VectorXd jordan_prod(const ConeLayout& L, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b) {
  Eigen::VectorXd r(L.dim);
  r.head(L.lp) = a.head(L.lp).cwiseProduct(b.head(L.lp));
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    r[o] = a.segment(o, d).dot(b.segment(o, d));
    r.segment(o + 1, d - 1) =
        a[o] * b.segment(o + 1, d - 1) + b[o] * a.segment(o + 1, d - 1);
  }
  return r;
}

// solve lam o v = d for v
Eigen::VectorXd jordan_div(const ConeLayout& L, const Eigen::VectorXd& lam,
                           const Eigen::VectorXd& d) {
  Eigen::VectorXd v(L.dim);
  v.head(L.lp) = d.head(L.lp).cwiseQuotient(lam.head(L.lp));
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], dd = L.soc_dims[i];
    const double a = lam[o];
    const auto b = lam.segment(o + 1, dd - 1);
    const double det = a * a - b.squaredNorm();
    const double d0 = d[o];
    const auto d1 = d.segment(o + 1, dd - 1);
    v[o] = (a * d0 - b.dot(d1)) / det;
    v.segment(o + 1, dd - 1) = (d1 - v[o] * b) / a;
  }
  return v;
}

// largest step with v + t dv staying in the cone (can be +inf)
double max_step(const ConeLayout& L, const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.lp; ++i)
    if (dv[i] < 0) t = std::min(t, -v[i] / dv[i]);
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    const double v0 = v[o], dv0 = dv[o];
    const auto v1 = v.segment(o + 1, d - 1);
    const auto dv1 = dv.segment(o + 1, d - 1);
    // q(t) = (v0+t dv0)^2 - ||v1+t dv1||^2 = a t^2 + 2 bq t + cq, cq >= 0 at
    // the current point; first positive root = boundary crossing.
    const double a = dv0 * dv0 - dv1.squaredNorm();
    const double bq = v0 * dv0 - v1.dot(dv1);
    const double cq = std::max(v0 * v0 - v1.squaredNorm(), 0.0);
    double tq = std::numeric_limits<double>::infinity();
    if (std::abs(a) < 1e-300) {
      if (bq < 0) tq = -cq / (2 * bq);
    } else {
      const double disc = bq * bq - a * cq;
      if (a < 0) {
        tq = (-bq - std::sqrt(std::max(disc, 0.0))) / a;
      } else if (bq < 0 && disc >= 0) {
        tq = (-bq - std::sqrt(disc)) / a;
      }
    }
    if (tq > 0) t = std::min(t, tq);
  }
  return t;
}

// Nesterov-Todd scaling per block
struct Scaling {
  Eigen::VectorXd w_lp;       // sqrt(s/z)
  std::vector<double> eta;    // per soc
  std::vector<Eigen::VectorXd> wbar;
};

bool compute_scaling(const ConeLayout& L, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& z, Scaling& W) {
  W.w_lp = (s.head(L.lp).cwiseQuotient(z.head(L.lp))).cwiseSqrt();
  if (!W.w_lp.allFinite()) return false;
  W.eta.clear();
  W.wbar.clear();
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    const auto sb = s.segment(o, d);
    const auto zb = z.segment(o, d);
    const double sres = sb[0] * sb[0] - sb.tail(d - 1).squaredNorm();
    const double zres = zb[0] * zb[0] - zb.tail(d - 1).squaredNorm();
    if (sres <= 0 || zres <= 0) return false;
    Eigen::VectorXd sbar = sb / std::sqrt(sres), zbar = zb / std::sqrt(zres);
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Eigen::VectorXd wb(d);
    wb[0] = (sbar[0] + zbar[0]) / (2 * gamma);
    wb.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2 * gamma);
    // store the Jordan square root of the scaling point: the block map is its
    // quadratic representation, whose square sends z to s
    Eigen::VectorXd v(d);
    v[0] = std::sqrt((wb[0] + 1.0) / 2.0);
    v.tail(d - 1) = wb.tail(d - 1) / (2.0 * v[0]);
    W.eta.push_back(std::pow(sres / zres, 0.25));
    W.wbar.push_back(std::move(v));
  }
  return true;
}

// W v (symmetric scaling), W = eta (2 wbar wbar' - J) per soc block
Eigen::VectorXd apply_W(const ConeLayout& L, const Scaling& W, const Eigen::VectorXd& v) {
  Eigen::VectorXd r(L.dim);
  r.head(L.lp) = W.w_lp.cwiseProduct(v.head(L.lp));
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    const auto& wb = W.wbar[i];
    const auto vb = v.segment(o, d);
    const double coef = 2.0 * wb.dot(vb);
    Eigen::VectorXd Jv(d);
    Jv[0] = vb[0];
    Jv.tail(d - 1) = -vb.tail(d - 1);
    r.segment(o, d) = W.eta[i] * (coef * wb - Jv);
  }
  return r;
}

Eigen::VectorXd apply_Winv(const ConeLayout& L, const Scaling& W, const Eigen::VectorXd& v) {
  Eigen::VectorXd r(L.dim);
  r.head(L.lp) = v.head(L.lp).cwiseQuotient(W.w_lp);
  for (size_t i = 0; i < L.soc_dims.size(); ++i) {
    const int o = L.soc_off[i], d = L.soc_dims[i];
    const auto& wb = W.wbar[i];
    const auto vb = v.segment(o, d);
    Eigen::VectorXd Jw(d);
    Jw[0] = wb[0];
    Jw.tail(d - 1) = -wb.tail(d - 1);
    Eigen::VectorXd Jv(d);
    Jv[0] = vb[0];
    Jv.tail(d - 1) = -vb.tail(d - 1);
    const double coef = 2.0 * Jw.dot(vb);
    r.segment(o, d) = (coef * Jw - Jv) / W.eta[i];
  }
  return r;
}

} // namespace

// internal consistency probe used by the test suite: random interior points,
// returns worst deviation across the NT scaling and Jordan identities
double conic_scaling_selftest(unsigned seed) {
  std::srand(seed);
  auto rnd = [] { return 2.0 * std::rand() / RAND_MAX - 1.0; };
  ConeLayout L;
  L.lp = 2;
  L.soc_dims = {3, 4};
  L.soc_off = {2, 5};
  L.dim = 9;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd s(L.dim), z(L.dim), d(L.dim);
    for (int i = 0; i < L.dim; ++i) {
      s[i] = rnd();
      z[i] = rnd();
      d[i] = rnd();
    }
    // push blocks strictly inside the cone
    s.head(2) = s.head(2).cwiseAbs().array() + 0.1;
    z.head(2) = z.head(2).cwiseAbs().array() + 0.1;
    for (int b = 0; b < 2; ++b) {
      const int o = L.soc_off[b], dd = L.soc_dims[b];
      s[o] = s.segment(o + 1, dd - 1).norm() + 0.1 + std::abs(s[o]);
      z[o] = z.segment(o + 1, dd - 1).norm() + 0.1 + std::abs(z[o]);
    }
    Scaling W;
    if (!compute_scaling(L, s, z, W)) return 1e30;
    const Eigen::VectorXd lam = apply_W(L, W, z);
    const double inv_id = (apply_W(L, W, apply_Winv(L, W, d)) - d).norm();
    const double lam_id = (lam - apply_Winv(L, W, s)).norm();
    const double sq_id = (apply_W(L, W, lam) - s).norm();
    const double div_id = (jordan_prod(L, lam, jordan_div(L, lam, d)) - d).norm();
    worst = std::max({worst, inv_id, lam_id, sq_id, div_id});
    const double ms = max_step(L, s, d);
    if (std::isfinite(ms)) {
      worst = std::max(worst, std::abs(cone_margin(L, s + ms * d)));
      if (cone_margin(L, s + 0.999 * ms * d) < 0) return 1e30;
    }
  }
  return worst;
}

SolveResult solve(const ConicProgram& prog, const SolverOptions& opts) {
  SolveResult res;
  if (prog.n_vars == 0) {
    res.status = SolveStatus::Optimal;
    res.x.resize(0);
    res.objective = 0;
    return res;
  }
  StdForm f = lower(prog);
  const ConeLayout L = layout_of(f);
  const int n = f.n, p = f.p, m = f.m;

  if (m == 0) {
    // pure equality-constrained LP: solve least-norm feasible point
    Eigen::VectorXd x = f.A.colPivHouseholderQr().solve(f.b);
    res.x = x;
    res.status = SolveStatus::Optimal;
    res.objective = -f.c.dot(x);
    return res;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s = cone_identity(L), z = cone_identity(L);
  double tau = 1.0, kappa = 1.0;

  const double bnorm = 1.0 + f.b.norm(), hnorm = 1.0 + f.h.norm(), cnorm = 1.0 + f.c.norm();
  const double mat_scale =
      std::max({1.0, f.A.size() ? f.A.cwiseAbs().maxCoeff() : 0.0, f.G.cwiseAbs().maxCoeff()});
  const int order = L.order() + 1;

  // augmented KKT [ 0 A' Gt' ; A 0 0 ; Gt 0 -I ] with Gt = W^{-1} G, the
  // scaled dual direction Wdz as the third unknown; stays well conditioned
  // as iterates approach the cone boundary
  const int dim = n + p + m;
  Eigen::MatrixXd KKT(dim, dim);
  Eigen::VectorXd best_x;
  double best_gap = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    res.iterations = iter;
    Eigen::VectorXd rx = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
    Eigen::VectorXd ry = -f.A * x + f.b * tau;
    Eigen::VectorXd rz = -f.G * x + f.h * tau - s;
    const double rtau = -f.c.dot(x) - f.b.dot(y) - f.h.dot(z) - kappa;
    const double mu = (s.dot(z) + tau * kappa) / order;
    if (opts.verbose)
      std::printf("it %2d mu %9.2e tau %9.2e kap %9.2e rx %9.2e ry %9.2e rz %9.2e\n", iter,
                  mu, tau, kappa, rx.norm(), ry.norm(), rz.norm());

    // convergence on the scaled primal/dual pair
    {
      const Eigen::VectorXd xh = x / tau, yh = y / tau, zh = z / tau, sh = s / tau;
      const double pres =
          std::max((f.A * xh - f.b).norm() / bnorm, (f.G * xh + sh - f.h).norm() / hnorm);
      const double dres = (f.A.transpose() * yh + f.G.transpose() * zh + f.c).norm() / cnorm;
      const double pcost = f.c.dot(xh);
      const double dcost = -f.b.dot(yh) - f.h.dot(zh);
      const double gap = sh.dot(zh);
      const double relgap = gap / std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
      if (gap < best_gap && pres < 1e-6 && dres < 1e-6) {
        best_gap = gap;
        best_x = xh;
      }
      if (pres <= opts.tol && dres <= opts.tol && relgap <= 10 * opts.tol) {
        res.status = SolveStatus::Optimal;
        res.x = xh;
        res.objective = -pcost;
        return res;
      }
      // certificates: (y,z) with b'y + h'z < 0, A'y + G'z ~ 0 proves primal
      // infeasibility; x with c'x < 0, Ax ~ 0, Gx + s ~ 0 proves unboundedness
      const double by_hz = -f.b.dot(y) - f.h.dot(z);
      if (by_hz > 1e-10 &&
          (f.A.transpose() * y + f.G.transpose() * z).norm() <= 1e-7 * by_hz * mat_scale) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      const double neg_cx = -f.c.dot(x);
      if (neg_cx > 1e-10 &&
          std::max((f.A * x).norm(), (f.G * x + s).norm()) <= 1e-7 * neg_cx * mat_scale) {
        res.status = SolveStatus::Infeasible; // unbounded objective
        return res;
      }
      if (tau < 1e-10 * std::max(1.0, kappa) && mu < 1e-10) {
        res.status = SolveStatus::NumericalFailure;
        return res;
      }
    }

    Scaling W;
    if (!compute_scaling(L, s, z, W)) {
      res.status = SolveStatus::NumericalFailure;
      if (best_x.size()) {
        res.x = best_x;
        res.objective = -f.c.dot(best_x);
      }
      return res;
    }
    const Eigen::VectorXd lam = apply_W(L, W, z);

    Eigen::MatrixXd Gt(m, n);
    for (int j = 0; j < n; ++j) Gt.col(j) = apply_Winv(L, W, f.G.col(j));
    KKT.setZero();
    KKT.topLeftCorner(n, n).diagonal().array() += 1e-12;
    if (p) {
      KKT.block(0, n, n, p) = f.A.transpose();
      KKT.block(n, 0, p, n) = f.A;
      KKT.block(n, n, p, p).diagonal().array() -= 1e-12;
    }
    KKT.block(0, n + p, n, m) = Gt.transpose();
    KKT.block(n + p, 0, m, n) = Gt;
    KKT.bottomRightCorner(m, m).diagonal().array() = -1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(KKT);

    // solves  A'dy + G'dz = r1,  A dx = r2,  G dx - W'W dz = r3
    auto kkt_solve = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                         const Eigen::VectorXd& r3, Eigen::VectorXd& dx,
                         Eigen::VectorXd& dy, Eigen::VectorXd& dz) {
      Eigen::VectorXd rhs(dim);
      rhs.head(n) = r1;
      rhs.segment(n, p) = r2;
      rhs.tail(m) = apply_Winv(L, W, r3);
      Eigen::VectorXd sol = lu.solve(rhs);
      sol += lu.solve(Eigen::VectorXd(rhs - KKT * sol));
      dx = sol.head(n);
      dy = sol.segment(n, p);
      dz = apply_Winv(L, W, sol.tail(m));
    };

    // direction for the tau column
    Eigen::VectorXd ux, uy, uz;
    kkt_solve(-f.c, f.b, f.h, ux, uy, uz);
    const double u_dot = -f.c.dot(ux) - f.b.dot(uy) - f.h.dot(uz) + kappa / tau;

    auto newton = [&](double sigma, const Eigen::VectorXd& ds_rhs, double dkappa_rhs,
                      Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz,
                      Eigen::VectorXd& ds, double& dtau, double& dkappa) {
      const double f1 = 1.0 - sigma;
      const Eigen::VectorXd dsw = jordan_div(L, lam, ds_rhs);
      const Eigen::VectorXd Wds = apply_W(L, W, dsw); // W' (lam \ ds_rhs)
      Eigen::VectorXd vx, vy, vz;
      kkt_solve(-f1 * rx, f1 * ry, f1 * rz - Wds, vx, vy, vz);
      const double num =
          -f1 * rtau + f.c.dot(vx) + f.b.dot(vy) + f.h.dot(vz) + dkappa_rhs / tau;
      dtau = num / u_dot;
      dx = vx + dtau * ux;
      dy = vy + dtau * uy;
      dz = vz + dtau * uz;
      ds = apply_W(L, W, dsw - apply_W(L, W, dz));
      dkappa = (dkappa_rhs - kappa * dtau) / tau;
    };

    // affine (predictor) direction probes achievable progress
    Eigen::VectorXd dxa, dya, dza, dsa;
    double dtaua, dkappaa;
    newton(0.0, -jordan_prod(L, lam, lam), -kappa * tau, dxa, dya, dza, dsa, dtaua, dkappaa);

    double alpha = std::min(max_step(L, s, dsa), max_step(L, z, dza));
    if (dtaua < 0) alpha = std::min(alpha, -tau / dtaua);
    if (dkappaa < 0) alpha = std::min(alpha, -kappa / dkappaa);
    alpha = std::min(0.99 * alpha, 1.0);
    const double mu_aff = ((s + alpha * dsa).dot(z + alpha * dza) +
                           (tau + alpha * dtaua) * (kappa + alpha * dkappaa)) /
                          order;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3), 1e-8, 0.999);

    // combined direction with Mehrotra second-order correction
    const Eigen::VectorXd corr =
        jordan_prod(L, apply_Winv(L, W, dsa), apply_W(L, W, dza));
    Eigen::VectorXd ds_rhs =
        -jordan_prod(L, lam, lam) - corr + sigma * mu * cone_identity(L);
    const double dk_rhs = -kappa * tau - dtaua * dkappaa + sigma * mu;

    Eigen::VectorXd dx, dy, dz, ds;
    double dtau, dkappa;
    newton(sigma, ds_rhs, dk_rhs, dx, dy, dz, ds, dtau, dkappa);

    double step = std::min(max_step(L, s, ds), max_step(L, z, dz));
    if (dtau < 0) step = std::min(step, -tau / dtau);
    if (dkappa < 0) step = std::min(step, -kappa / dkappa);
    step = std::min(0.99 * step, 1.0);
    if (!std::isfinite(step) || step <= 0) {
      res.status = SolveStatus::NumericalFailure;
      if (best_x.size()) {
        res.x = best_x;
        res.objective = -f.c.dot(best_x);
      }
      return res;
    }

    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
    if (!(tau > 0) || !(kappa > 0) || cone_margin(L, s) <= 0 || cone_margin(L, z) <= 0 ||
        !x.allFinite()) {
      res.status = SolveStatus::NumericalFailure;
      if (best_x.size()) {
        res.x = best_x;
        res.objective = -f.c.dot(best_x);
      }
      return res;
    }
  }

  res.status = SolveStatus::MaxIterations;
  res.x = best_x.size() ? best_x : Eigen::VectorXd(x / tau);
  res.objective = -f.c.dot(res.x);
  return res;
}

// --------------------------------------------------------------------------
// serialization

namespace {

void write_expr(std::ostream& out, const LinExpr& e) {
  out << e.terms.size();
  for (const auto& t : e.terms) out << ' ' << t.var << ' ' << t.coef;
  out << ' ' << e.constant << '\n';
}

LinExpr read_expr(std::istream& in) {
  size_t k;
  if (!(in >> k)) throw std::runtime_error("conic parse: expression expected");
  LinExpr e;
  e.terms.resize(k);
  for (auto& t : e.terms) in >> t.var >> t.coef;
  in >> e.constant;
  return e;
}

} // namespace

void serialize(std::ostream& out, const ConicProgram& prog) {
  out << std::setprecision(17);
  out << "conicprogram 1\n";
  out << "vars " << prog.n_vars << '\n';
  out << "objective";
  for (double v : prog.objective) out << ' ' << v;
  out << '\n';
  out << "eq " << prog.eq.size() << '\n';
  for (const auto& e : prog.eq) write_expr(out, e);
  out << "nonneg " << prog.nonneg_vars.size();
  for (int v : prog.nonneg_vars) out << ' ' << v;
  out << '\n';
  out << "soc " << prog.soc_blocks.size() << '\n';
  for (const auto& b : prog.soc_blocks) {
    out << b.u.size() << '\n';
    write_expr(out, b.t);
    for (const auto& u : b.u) write_expr(out, u);
  }
  out << "rsoc " << prog.rsoc_blocks.size() << '\n';
  for (const auto& b : prog.rsoc_blocks) {
    out << b.u.size() << '\n';
    write_expr(out, b.s);
    write_expr(out, b.t);
    for (const auto& u : b.u) write_expr(out, u);
  }
}

std::string serialize(const ConicProgram& prog) {
  std::ostringstream os;
  serialize(os, prog);
  return os.str();
}

ConicProgram deserialize(std::istream& in) {
  std::string tag;
  int version;
  in >> tag >> version;
  if (tag != "conicprogram" || version != 1)
    throw std::runtime_error("conic parse: bad header");
  ConicProgram p;
  size_t count;
  in >> tag >> p.n_vars;
  if (tag != "vars") throw std::runtime_error("conic parse: vars expected");
  in >> tag;
  p.objective.resize(p.n_vars);
  for (auto& v : p.objective) in >> v;
  in >> tag >> count;
  for (size_t i = 0; i < count; ++i) p.eq.push_back(read_expr(in));
  in >> tag >> count;
  p.nonneg_vars.resize(count);
  for (auto& v : p.nonneg_vars) in >> v;
  in >> tag >> count;
  for (size_t i = 0; i < count; ++i) {
    size_t nu;
    in >> nu;
    SocBlock b;
    b.t = read_expr(in);
    for (size_t j = 0; j < nu; ++j) b.u.push_back(read_expr(in));
    p.soc_blocks.push_back(std::move(b));
  }
  in >> tag >> count;
  for (size_t i = 0; i < count; ++i) {
    size_t nu;
    in >> nu;
    RsocBlock b;
    b.s = read_expr(in);
    b.t = read_expr(in);
    for (size_t j = 0; j < nu; ++j) b.u.push_back(read_expr(in));
    p.rsoc_blocks.push_back(std::move(b));
  }
  if (!in) throw std::runtime_error("conic parse: truncated input");
  return p;
}

ConicProgram deserialize(const std::string& text) {
  std::istringstream is(text);
  return deserialize(is);
}

// --------------------------------------------------------------------------
// complex lifting

Eigen::VectorXd lift_complex(const Eigen::VectorXcd& v) {
  Eigen::VectorXd x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

Eigen::VectorXcd unlift_complex(const Eigen::VectorXd& x) {
  const auto n = x.size() / 2;
  Eigen::VectorXcd v(n);
  v.real() = x.head(n);
  v.imag() = x.tail(n);
  return v;
}

Eigen::MatrixXd lift_complex_matrix(const Eigen::MatrixXcd& M) {
  Eigen::MatrixXd R(2 * M.rows(), 2 * M.cols());
  R.topLeftCorner(M.rows(), M.cols()) = M.real();
  R.topRightCorner(M.rows(), M.cols()) = -M.imag();
  R.bottomLeftCorner(M.rows(), M.cols()) = M.imag();
  R.bottomRightCorner(M.rows(), M.cols()) = M.real();
  return R;
}

ComplexVec add_complex_vec(ConicProgram& prog, int n) {
  ComplexVec v;
  v.base = prog.add_vars(2 * n);
  v.n = n;
  return v;
}

LinExpr re_inner(const Eigen::VectorXcd& a, const ComplexVec& v, std::complex<double> b) {
  // Re{a^H v} = sum Re(a_i) Re(v_i) + Im(a_i) Im(v_i)
  LinExpr e(b.real());
  for (int i = 0; i < v.n; ++i) {
    e.add(v.re(i), a[i].real());
    e.add(v.im(i), a[i].imag());
  }
  return e;
}

LinExpr im_inner(const Eigen::VectorXcd& a, const ComplexVec& v, std::complex<double> b) {
  // Im{a^H v} = sum Re(a_i) Im(v_i) - Im(a_i) Re(v_i)
  LinExpr e(b.imag());
  for (int i = 0; i < v.n; ++i) {
    e.add(v.im(i), a[i].real());
    e.add(v.re(i), -a[i].imag());
  }
  return e;
}

Eigen::VectorXcd extract(const ComplexVec& v, const Eigen::VectorXd& x) {
  Eigen::VectorXcd r(v.n);
  for (int i = 0; i < v.n; ++i) r[i] = {x[v.re(i)], x[v.im(i)]};
  return r;
}

} // namespace starcrs
