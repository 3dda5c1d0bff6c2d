#include "starcrs/fastopt.hpp"

#include "sca_internal.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

namespace starcrs {

namespace {

constexpr double kRankTol = 1e-12; // relative singular-value cutoff
constexpr double kRidge = 1e-8;

std::complex<double> unit_phase(std::complex<double> z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : std::complex<double>(1.0, 0.0);
}

} // namespace

Eigen::MatrixXcd sym(const Eigen::MatrixXcd& X) { return 0.5 * (X.transpose() + X); }

Eigen::MatrixXcd uni(const Eigen::MatrixXcd& X) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = (sv.size() > 0 ? sv[0] : 0.0) * kRankTol;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > tol) ++rank;
  Eigen::MatrixXcd U = svd.matrixU();
  // null-space columns of U are arbitrary; the conjugated trailing columns of
  // V complete them so U V^H stays unitary (and symmetric for symmetric X)
  for (int j = rank; j < U.cols(); ++j) U.col(j) = svd.matrixV().col(j).conjugate();
  return U * svd.matrixV().adjoint();
}

Eigen::MatrixXcd symuni(const Eigen::MatrixXcd& X) { return uni(sym(X)); }

namespace {

// Two-sided stacked layout: the surface variable becomes one 2N x 2N matrix
// acting on [E; E], with each user's row active only on its own side.
struct Stacked {
  Eigen::MatrixXcd H;  // 2N x K
  Eigen::MatrixXcd G;  // L x K
  Eigen::MatrixXcd Ex; // 2N x L
};

Stacked stack_two_sided(const SystemConfig& cfg, const ChannelSet& ch) {
  const int N = cfg.n_elements, K = cfg.n_users, L = cfg.nt;
  Stacked s;
  s.H = Eigen::MatrixXcd::Zero(2 * N, K);
  s.G.resize(L, K);
  for (int k = 0; k < K; ++k) {
    s.G.col(k) = ch.g[k];
    s.H.block(cfg.on_reflect_side(k) ? 0 : N, k, N, 1) = ch.h[k];
  }
  s.Ex.resize(2 * N, L);
  s.Ex << ch.E, ch.E;
  return s;
}

} // namespace

double relaxed_surface_gain(const SystemConfig& cfg, const ChannelSet& ch,
                            const Eigen::MatrixXcd& theta) {
  const auto s = stack_two_sided(cfg, ch);
  return (s.G.adjoint() + s.H.adjoint() * theta * s.Ex).squaredNorm();
}

Eigen::MatrixXcd relaxed_surface_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                          const Eigen::MatrixXcd& theta) {
  const auto s = stack_two_sided(cfg, ch);
  return s.H * (s.G.adjoint() + s.H.adjoint() * theta * s.Ex) * s.Ex.adjoint();
}

ProjectionResult closed_form_theta(const SystemConfig& cfg, const ChannelSet& ch,
                                   Protocol protocol) {
  const int N = cfg.n_elements;
  ProjectionResult out;
  out.gradient =
      relaxed_surface_gradient(cfg, ch, Eigen::MatrixXcd::Zero(2 * N, 2 * N));
  const double gn = out.gradient.norm();
  out.armijo_alpha = gn > 0.0 ? std::sqrt(static_cast<double>(N)) / gn : 0.0;
  out.theta_relaxed = out.armijo_alpha * out.gradient;
  out.psi_r.resize(N);
  out.psi_t.resize(N);

  if (protocol == Protocol::TimeSwitch) {
    // each side serves its own slot, so the sides project independently
    for (int side = 0; side < 2; ++side) {
      Eigen::VectorXcd& psi = side == 0 ? out.psi_r : out.psi_t;
      std::vector<int> users;
      for (int k = 0; k < cfg.n_users; ++k)
        if (cfg.on_reflect_side(k) == (side == 0)) users.push_back(k);
      if (users.empty()) {
        psi.setOnes();
        continue;
      }
      Eigen::MatrixXcd Hs(N, static_cast<int>(users.size()));
      Eigen::MatrixXcd Gs(cfg.nt, static_cast<int>(users.size()));
      for (std::size_t j = 0; j < users.size(); ++j) {
        Hs.col(static_cast<int>(j)) = ch.h[users[j]];
        Gs.col(static_cast<int>(j)) = ch.g[users[j]];
      }
      const Eigen::MatrixXcd S = symuni(Hs * Gs.adjoint() * ch.E.adjoint());
      for (int n = 0; n < N; ++n) psi[n] = unit_phase(S(n, n));
    }
    return out;
  }

  // diagonal of the projected step; scaling by alpha does not move symuni
  const Eigen::MatrixXcd S = symuni(out.gradient);
  const double half = std::numbers::sqrt2 / 2.0;
  for (int n = 0; n < N; ++n) {
    const std::complex<double> zr = half * S(n, n);
    const std::complex<double> zt = half * S(N + n, N + n);
    if (protocol == Protocol::ModeSwitch) {
      if (std::abs(zr) >= std::abs(zt)) {
        out.psi_r[n] = unit_phase(zr);
        out.psi_t[n] = 0.0;
      } else {
        out.psi_r[n] = 0.0;
        out.psi_t[n] = unit_phase(zt);
      }
      continue;
    }
    const double s2 = std::norm(zr) + std::norm(zt);
    if (s2 > 0.0) {
      const double scale = 1.0 / std::sqrt(s2);
      out.psi_r[n] = scale * zr;
      out.psi_t[n] = scale * zt;
    } else {
      out.psi_r[n] = half;
      out.psi_t[n] = half;
    }
  }
  return out;
}

PrecoderDirections precoder_directions(const std::vector<Eigen::VectorXcd>& gt) {
  const int K = static_cast<int>(gt.size());
  const int L = static_cast<int>(gt[0].size());
  Eigen::MatrixXcd Gbar(L, K);
  for (int k = 0; k < K; ++k) {
    const double nk = gt[k].norm();
    Gbar.col(k) = nk > 0.0 ? Eigen::VectorXcd(gt[k] / nk) : Eigen::VectorXcd::Unit(L, k % L);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Gbar, Eigen::ComputeThinU | Eigen::ComputeThinV);
  PrecoderDirections out;
  out.common = svd.matrixU().col(0);
  Eigen::MatrixXcd gram = Gbar.adjoint() * Gbar;
  out.ridge_used = K > L || svd.singularValues().minCoeff() < 1e-6;
  if (out.ridge_used) gram += kRidge * Eigen::MatrixXcd::Identity(K, K);
  out.priv = Gbar * gram.inverse();
  for (int k = 0; k < K; ++k) {
    const double nk = out.priv.col(k).norm();
    if (nk > 0.0)
      out.priv.col(k) /= nk;
    else
      out.priv.col(k) = Gbar.col(k);
  }
  return out;
}

namespace {

using detail::SinrCell;

// Fixed-direction slot data: with P_m = sqrt(rho_m Pt) pbar_m every SINR is a
// ratio of affine functions of the power fractions.
struct SlotGains {
  Eigen::MatrixXd A;    // K x (K+1), pt |gt_k^H pbar_m|^2
  Eigen::VectorXd coop; // forwarded-branch SNR constants
  Eigen::VectorXd si;   // relay self-interference constants
};

SlotGains slot_gains(const SystemConfig& cfg, const ChannelSet& ch, const DesignPoint& at,
                     const Eigen::MatrixXcd& Pbar, SlotSurface slot, bool simple) {
  const int K = cfg.n_users;
  const auto eff = effective_channels(cfg, ch, at, slot);
  SlotGains sg;
  sg.A.resize(K, K + 1);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m <= K; ++m)
      sg.A(k, m) = cfg.pt * std::norm((eff.gt[k].adjoint() * Pbar.col(m)).value());
  sg.coop = detail::coop_snr(cfg, eff);
  sg.si = Eigen::VectorXd::Zero(K);
  if (!simple)
    for (int k : cfg.relays) sg.si[k] = std::norm(ch.si[k]) * cfg.relay_power();
  return sg;
}

// delta <= (A_num rho_num) / (sum_den A_m rho_m + c0) via an exact affine
// denominator row and one product majorant against the affine numerator.
SinrCell add_rho_cell(ConicProgram& prog, const std::vector<int>& rho,
                      const Eigen::VectorXd& A, const std::vector<int>& den_cols, int num_col,
                      const Eigen::VectorXd& rho0, double c0) {
  double den0 = c0;
  LinExpr den;
  den.constant = c0;
  for (int m : den_cols) {
    den0 += A[m] * rho0[m];
    den.add(rho[m], A[m]);
  }
  SinrCell cell;
  cell.value = A[num_col] * rho0[num_col] / den0;
  const int eta = prog.add_var();
  den.add(eta, -1.0);
  prog.add_ineq_le(std::move(den));
  cell.var = prog.add_nonneg_var();
  detail::ProductSurrogateRow row;
  row.add_product(cell.expr(), LinExpr(eta, 1.0), cell.value, den0);
  row.require_le(prog, LinExpr(rho[num_col], A[num_col]));
  return cell;
}

struct ReducedBuild {
  ConicProgram prog;
  std::vector<int> rho, c_vars;
  int x_var = -1;
  detail::TimeVars tv;
};

ReducedBuild build_reduced_step(const SystemConfig& cfg, Mode mode,
                                const std::map<SlotSurface, SlotGains>& gains,
                                const DesignPoint& at, const Eigen::VectorXd& rho0,
                                const AOOptions& opts) {
  ReducedBuild b;
  ConicProgram& prog = b.prog;
  const int K = cfg.n_users;
  const bool simple = opts.reduced_simple;
  b.rho.resize(K + 1);
  for (int m = 0; m <= K; ++m) b.rho[m] = prog.add_nonneg_var();
  b.c_vars.resize(K);
  for (int k = 0; k < K; ++k) b.c_vars[k] = prog.add_nonneg_var();
  b.x_var = prog.add_var(1.0);
  {
    LinExpr budget;
    budget.constant = -1.0;
    for (int v : b.rho) budget.add(v, 1.0);
    prog.add_ineq_le(std::move(budget));
  }
  if (opts.pin_common_zero) {
    prog.pin(b.rho[0], 0.0);
    for (int v : b.c_vars) prog.pin(v, 0.0);
  }

  const bool fd = duplex_of(mode) == Duplex::Full;
  std::vector<int> all(K);
  for (int m = 1; m <= K; ++m) all[m - 1] = m;

  const auto make_slot = [&](SlotSurface slot, bool si_flag) {
    const SlotGains& sg = gains.at(slot);
    detail::SlotCells out;
    out.common.resize(K);
    out.priv.resize(K);
    // the simple variant drops the full-duplex MRC fold along with the
    // interference cross terms; forwarding rates in half-duplex modes stay
    out.coop = simple && fd ? Eigen::VectorXd::Zero(K) : sg.coop;
    for (int k = 0; k < K; ++k) {
      const double c0 = cfg.sigma2 + (si_flag ? sg.si[k] : 0.0);
      std::vector<int> den_common = simple ? std::vector<int>{k + 1} : all;
      std::vector<int> den_priv;
      if (!simple) {
        den_priv = all;
        den_priv.erase(den_priv.begin() + k);
      }
      out.common[k] = add_rho_cell(prog, b.rho, sg.A.row(k), den_common, 0, rho0, c0);
      out.priv[k] = add_rho_cell(prog, b.rho, sg.A.row(k), den_priv, k + 1, rho0, c0);
    }
    return out;
  };
  b.tv = detail::wire_mode_rows(prog, cfg, mode, at, opts, make_slot, b.c_vars, b.x_var);
  return b;
}

} // namespace

RunRecord fast_optimize(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                        std::uint64_t seed, const AOOptions& opts) {
  check_config(cfg);
  const auto us = detail::unit_scale(cfg, ch);
  if (us.scaled) {
    RunRecord rec = fast_optimize(us.cfg, mode, us.ch, seed, opts);
    rec.point.P *= us.amp;
    rec.objective = mode_rates(cfg, mode, ch, rec.point).objective;
    rec.rates = mode_rates(cfg, mode, ch, rec.point);
    rec.report = validate_with_rates(cfg, mode, ch, rec.point);
    return rec;
  }
  const auto t0 = std::chrono::steady_clock::now();
  AOOptions o = opts;
  o.noma = false; // power allocation below assumes rate splitting
  const int K = cfg.n_users;

  RunRecord rec;
  rec.scheme = mode_name(mode);
  rec.algorithm = "fast";
  rec.mode = mode;
  rec.seed = seed;

  DesignPoint pt = DesignPoint::zero(cfg);
  if (cfg.n_elements > 0 && !o.pin_psi_zero) {
    const auto proj = closed_form_theta(cfg, ch, protocol_of(mode));
    pt.psi_r = proj.psi_r;
    pt.psi_t = proj.psi_t;
  }

  const auto eff = effective_channels(cfg, ch, pt, SlotSurface::PerUserSide);
  const auto dirs = precoder_directions(eff.gt);
  Eigen::MatrixXcd Pbar(cfg.nt, K + 1);
  Pbar.col(0) = dirs.common;
  for (int k = 0; k < K; ++k) Pbar.col(k + 1) = dirs.priv.col(k);

  Eigen::VectorXd rho = Eigen::VectorXd::Constant(K + 1, 0.9 / (K + 1));
  if (o.pin_common_zero) rho[0] = 0.0;
  const auto assemble = [&](const Eigen::VectorXd& r, DesignPoint& q) {
    for (int m = 0; m <= K; ++m) q.P.col(m) = std::sqrt(r[m] * cfg.pt) * Pbar.col(m);
  };
  assemble(rho, pt);
  detail::apply_pins(pt, o);

  std::map<SlotSurface, SlotGains> gains;
  if (protocol_of(mode) == Protocol::TimeSwitch) {
    gains.emplace(SlotSurface::ReflectOnly,
                  slot_gains(cfg, ch, pt, Pbar, SlotSurface::ReflectOnly, o.reduced_simple));
    gains.emplace(SlotSurface::TransmitOnly,
                  slot_gains(cfg, ch, pt, Pbar, SlotSurface::TransmitOnly, o.reduced_simple));
  } else {
    gains.emplace(SlotSurface::PerUserSide,
                  slot_gains(cfg, ch, pt, Pbar, SlotSurface::PerUserSide, o.reduced_simple));
  }

  double obj = detail::exact_objective(cfg, mode, ch, pt, o);
  rec.outer_trace = {obj};
  for (int it = 0; it < o.max_inner; ++it) {
    const auto b = build_reduced_step(cfg, mode, gains, pt, rho, o);
    const auto res = solve(b.prog, o.solver);
    if (res.status != SolveStatus::Optimal && res.status != SolveStatus::MaxIterations) break;
    Eigen::VectorXd rho_c(K + 1);
    for (int m = 0; m <= K; ++m) rho_c[m] = std::max(0.0, res.x[b.rho[m]]);
    if (o.pin_common_zero) rho_c[0] = 0.0;
    const double rsum = rho_c.sum();
    if (rsum > 1.0) rho_c /= rsum;
    DesignPoint cand = pt;
    assemble(rho_c, cand);
    for (int k = 0; k < K; ++k) cand.c[k] = std::max(0.0, res.x[b.c_vars[k]]);
    if (b.tv.lam >= 0) cand.lam = std::clamp(res.x[b.tv.lam], kMinTimeShare, 1.0);
    if (b.tv.lamr >= 0)
      cand.lam_r = std::clamp(res.x[b.tv.lamr], kMinTimeShare, 1.0 - kMinTimeShare);
    if (b.tv.lam1 >= 0) cand.lam_1 = std::clamp(res.x[b.tv.lam1], kMinTimeShare, cand.lam_r);
    if (b.tv.lam2 >= 0)
      cand.lam_2 = std::clamp(res.x[b.tv.lam2], kMinTimeShare, 1.0 - cand.lam_r);
    detail::apply_pins(cand, o);
    detail::restore_common_pool(cfg, mode, ch, cand, o);
    const double cobj = detail::exact_objective(cfg, mode, ch, cand, o);
    const double gain = cobj - obj;
    if (gain > 0) {
      pt = cand;
      rho = rho_c;
      obj = cobj;
      rec.outer_trace.push_back(obj);
    }
    ++rec.outer_iterations;
    if (gain < o.eps_inner) {
      rec.converged = true;
      break;
    }
  }

  rec.point = pt;
  rec.objective = obj;
  rec.active_trace = rec.outer_trace;
  rec.rates = mode_rates(cfg, mode, ch, pt);
  rec.report = validate_with_rates(cfg, mode, ch, pt);
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

} // namespace starcrs
