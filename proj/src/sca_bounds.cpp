#include "sca_internal.hpp"

#include <algorithm>
#include <cmath>

namespace starcrs {

double product_majorant(double a, double b, double a0, double b0) {
  const double s = a + b, d = a0 - b0;
  return 0.25 * s * s - 0.5 * d * (a - b) + 0.25 * d * d;
}

double squared_gain_minorant(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& psi0,
                             std::complex<double> gbar, const Eigen::VectorXcd& s) {
  if (s.size() == 0) return std::norm(gbar);
  const std::complex<double> w0 = (s.adjoint() * psi0).value() + gbar;
  const std::complex<double> z = (s.adjoint() * psi).value();
  return 2.0 * (std::conj(w0) * z).real() - std::norm((s.adjoint() * psi0).value()) +
         std::norm(gbar);
}

LogMinorant LogMinorant::at(double v0, double a0c) {
  LogMinorant m;
  m.v0 = v0;
  m.a0c = a0c;
  const double ln2 = std::log(2.0);
  m.value0 = std::log2(a0c + v0);
  m.slope = 1.0 / ((a0c + v0) * ln2);
  // remainder bound over the trust region v >= v0/4
  const double edge = a0c + 0.25 * v0;
  m.curv = 1.0 / (2.0 * edge * edge * ln2);
  return m;
}

double LogMinorant::eval(double v) const {
  const double d = v - v0;
  return value0 + slope * d - curv * d * d;
}

double surface_penalty(Mode mode, const DesignPoint& pt) {
  double pen = 0.0;
  const int n = static_cast<int>(pt.psi_r.size());
  switch (protocol_of(mode)) {
    case Protocol::EnergySplit:
      for (int i = 0; i < n; ++i)
        pen += std::norm(pt.psi_r[i]) + std::norm(pt.psi_t[i]) - 1.0;
      break;
    case Protocol::ModeSwitch:
      for (int i = 0; i < n; ++i) {
        const double ar = std::abs(pt.psi_r[i]), at = std::abs(pt.psi_t[i]);
        pen -= (ar - ar * ar) + (at - at * at);
      }
      break;
    case Protocol::TimeSwitch:
      for (int i = 0; i < n; ++i)
        pen += (std::norm(pt.psi_r[i]) - 1.0) + (std::norm(pt.psi_t[i]) - 1.0);
      break;
  }
  return pen;
}

double surface_residual(Mode mode, const DesignPoint& pt) {
  double r = 0.0;
  const int n = static_cast<int>(pt.psi_r.size());
  switch (protocol_of(mode)) {
    case Protocol::EnergySplit:
      for (int i = 0; i < n; ++i)
        r = std::max(r, std::abs(std::norm(pt.psi_r[i]) + std::norm(pt.psi_t[i]) - 1.0));
      break;
    case Protocol::ModeSwitch:
      for (int i = 0; i < n; ++i) {
        r = std::max(r, std::abs(std::norm(pt.psi_r[i]) + std::norm(pt.psi_t[i]) - 1.0));
        r = std::max(r, std::min(std::abs(pt.psi_r[i]), std::abs(pt.psi_t[i])));
      }
      break;
    case Protocol::TimeSwitch:
      for (int i = 0; i < n; ++i) {
        r = std::max(r, std::abs(std::abs(pt.psi_r[i]) - 1.0));
        r = std::max(r, std::abs(std::abs(pt.psi_t[i]) - 1.0));
      }
      break;
  }
  return r;
}

} // namespace starcrs

namespace starcrs::detail {

double gain_value(const GainTerm& g, const Eigen::VectorXcd& psi0) {
  if (g.s.size() == 0) return std::norm(g.gbar);
  return std::norm(g.gbar + (g.s.adjoint() * psi0).value());
}

LinExpr gain_minorant(const GainTerm& g, const ComplexVec& psi, const Eigen::VectorXcd& psi0) {
  if (g.s.size() == 0) return LinExpr(std::norm(g.gbar));
  const std::complex<double> z0 = (g.s.adjoint() * psi0).value();
  const std::complex<double> w0 = z0 + g.gbar;
  // 2 Re{w0^H s^H psi} - |s^H psi0|^2 + |gbar|^2
  LinExpr e(std::norm(g.gbar) - std::norm(z0));
  e.add(re_inner(g.s, psi), 2.0 * w0.real());
  e.add(im_inner(g.s, psi), 2.0 * w0.imag());
  return e;
}

void ProductSurrogateRow::add_product(const LinExpr& a, const LinExpr& b, double a0, double b0) {
  LinExpr m = a;
  m.add(b);
  u.push_back(0.5 * m);
  const double d = a0 - b0;
  budget.add(a, 0.5 * d);
  budget.add(b, -0.5 * d);
  budget.constant -= 0.25 * d * d;
}

void ProductSurrogateRow::require_le(ConicProgram& prog, LinExpr rhs) {
  rhs.add(budget);
  prog.add_quad_le(std::move(u), 0.0, std::move(rhs));
}

void ConcaveLogSum::add_term(double weight, const LinExpr& v, double v0, double a0c) {
  if (weight == 0.0) return;
  const LogMinorant lm = LogMinorant::at(v0, a0c);
  affine.constant += weight * (lm.value0 - lm.slope * lm.v0);
  affine.add(v, weight * lm.slope);
  LinExpr dev = v;
  dev.constant -= v0;
  u.push_back(std::sqrt(weight * lm.curv) * dev);
  // trust floor keeping the quadratic below the log
  LinExpr floor(lm.trust_floor());
  floor.add(v, -1.0);
  prog->add_ineq_le(std::move(floor));
}

void ConcaveLogSum::require_at_least(LinExpr target) {
  LinExpr rhs = affine;
  rhs.add(target, -1.0);
  prog->add_quad_le(u, 0.0, std::move(rhs));
}

int slot_side(const SystemConfig& cfg, SlotSurface slot, int user) {
  const bool reflect = cfg.on_reflect_side(user);
  switch (slot) {
    case SlotSurface::PerUserSide: return reflect ? 0 : 1;
    case SlotSurface::ReflectOnly: return reflect ? 0 : -1;
    case SlotSurface::TransmitOnly: return reflect ? -1 : 1;
    case SlotSurface::None: return -1;
  }
  return -1;
}

GainTerm direct_term(const ChannelSet& ch, const Eigen::MatrixXcd& P, int user, int col) {
  GainTerm t;
  t.gbar = (ch.g[user].adjoint() * P.col(col)).value();
  if (ch.E.rows() > 0) {
    const Eigen::VectorXcd ep = ch.E * P.col(col);
    t.s = ch.h[user].cwiseProduct(ep.conjugate());
  }
  return t;
}

GainTerm coop_term(const ChannelSet& ch, int relay, int dest) {
  GainTerm t;
  t.gbar = std::conj(ch.h_uu(relay, dest));
  if (ch.E.rows() > 0) t.s = ch.h[dest].conjugate().cwiseProduct(ch.h[relay]);
  return t;
}

LinExpr re_col(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col) {
  LinExpr e;
  for (int i = 0; i < rows; ++i) {
    e.add(p.base + col * rows + i, a[i].real());
    e.add(p.base + p.n + col * rows + i, a[i].imag());
  }
  return e;
}

LinExpr im_col(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col) {
  LinExpr e;
  for (int i = 0; i < rows; ++i) {
    e.add(p.base + p.n + col * rows + i, a[i].real());
    e.add(p.base + col * rows + i, -a[i].imag());
  }
  return e;
}

LinExpr col_gain_minorant(const Eigen::VectorXcd& a, const ComplexVec& p, int rows, int col,
                          const Eigen::MatrixXcd& P0) {
  const std::complex<double> w0 = (a.adjoint() * P0.col(col)).value();
  LinExpr e(-std::norm(w0));
  e.add(re_col(a, p, rows, col), 2.0 * w0.real());
  e.add(im_col(a, p, rows, col), 2.0 * w0.imag());
  return e;
}

std::vector<int> noma_order(const std::vector<Eigen::VectorXcd>& gt) {
  std::vector<int> order(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gt[a].squaredNorm() > gt[b].squaredNorm(); });
  return order;
}

} // namespace starcrs::detail
