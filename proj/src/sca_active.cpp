#include "sca_internal.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace starcrs {

namespace detail {

Eigen::VectorXd coop_snr(const SystemConfig& cfg, const EffectiveChannels& eff) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) {
    if (cfg.is_relay(k)) continue;
    double s = 0.0;
    for (int m : cfg.relays) s += std::norm(eff.ht(m, k)) * cfg.relay_power();
    out[k] = s / cfg.sigma2;
  }
  return out;
}

SinrCell rate_slack(ConicProgram& prog, const SinrCell& cell, double a0c) {
  SinrCell a;
  a.var = prog.add_nonneg_var();
  a.value = std::log2(a0c + cell.value);
  ConcaveLogSum ls(prog);
  ls.add_term(1.0, cell.expr(), cell.value, a0c);
  ls.require_at_least(a.expr());
  return a;
}

int add_range_var(ConicProgram& prog, double lo, double hi) {
  const int v = prog.add_var();
  prog.add_ineq_le(LinExpr(v, -1.0, lo));
  prog.add_ineq_le(LinExpr(v, 1.0, -hi));
  return v;
}

TimeVars wire_mode_rows(ConicProgram& prog, const SystemConfig& cfg, Mode mode,
                        const DesignPoint& at, const AOOptions& opts,
                        const std::function<SlotCells(SlotSurface, bool)>& make_slot,
                        const std::vector<int>& c_vars, int x_var) {
  TimeVars tv;
  const int K = cfg.n_users;
  const bool fd = duplex_of(mode) == Duplex::Full;
  const bool ts = protocol_of(mode) == Protocol::TimeSwitch;
  LinExpr csum;
  for (int v : c_vars) csum.add(v, 1.0);

  if (fd && !ts) {
    const auto cells = make_slot(SlotSurface::PerUserSide, true);
    for (int k = 0; k < K; ++k) {
      ConcaveLogSum ls(prog);
      ls.add_term(1.0, cells.priv[k].expr(), cells.priv[k].value);
      ls.affine.add(c_vars[k], 1.0);
      ls.require_at_least(LinExpr(x_var, 1.0));
      // pooled common rate with the forwarded branch folded into the offset
      ConcaveLogSum pool(prog);
      pool.add_term(1.0, cells.common[k].expr(), cells.common[k].value, 1.0 + cells.coop[k]);
      pool.require_at_least(csum);
    }
  } else if (!fd && !ts) {
    tv.lam = add_range_var(prog, kMinTimeShare, 1.0);
    if (opts.pin_lambda_one) prog.pin(tv.lam, 1.0);
    const double lam0 = at.lam;
    const LinExpr neg_lam(tv.lam, -1.0);
    const auto cells = make_slot(SlotSurface::PerUserSide, false);
    for (int k = 0; k < K; ++k) {
      const auto alpha = rate_slack(prog, cells.priv[k]);
      ProductSurrogateRow epi;
      epi.add_product(alpha.expr(), neg_lam, alpha.value, -lam0);
      LinExpr rhs(c_vars[k], 1.0);
      rhs.add(x_var, -1.0);
      epi.require_le(prog, std::move(rhs));

      const auto ac = rate_slack(prog, cells.common[k]);
      ProductSurrogateRow pool;
      pool.add_product(ac.expr(), neg_lam, ac.value, -lam0);
      LinExpr rhs2 = (-1.0) * csum;
      if (!cfg.is_relay(k)) {
        const double rc2 = std::log2(1.0 + cells.coop[k]);
        rhs2.constant += rc2;
        rhs2.add(tv.lam, -rc2);
      }
      pool.require_le(prog, std::move(rhs2));
    }
  } else if (fd) {
    tv.lamr = add_range_var(prog, kMinTimeShare, 1.0 - kMinTimeShare);
    const double lamr0 = at.lam_r;
    const LinExpr lamr(tv.lamr, 1.0), neg_lamr(tv.lamr, -1.0);
    const auto cr = make_slot(SlotSurface::ReflectOnly, true);
    const auto ct = make_slot(SlotSurface::TransmitOnly, true);
    for (int k = 0; k < K; ++k) {
      const auto ar = rate_slack(prog, cr.priv[k]);
      const auto at_ = rate_slack(prog, ct.priv[k]);
      ProductSurrogateRow epi;
      epi.add_product(ar.expr(), neg_lamr, ar.value, -lamr0);
      epi.add_product(at_.expr(), lamr, at_.value, lamr0);
      LinExpr rhs = at_.expr();
      rhs.add(c_vars[k], 1.0);
      rhs.add(x_var, -1.0);
      epi.require_le(prog, std::move(rhs));

      const auto acr = rate_slack(prog, cr.common[k], 1.0 + cr.coop[k]);
      const auto act = rate_slack(prog, ct.common[k], 1.0 + ct.coop[k]);
      ProductSurrogateRow pool;
      pool.add_product(acr.expr(), neg_lamr, acr.value, -lamr0);
      pool.add_product(act.expr(), lamr, act.value, lamr0);
      LinExpr rhs2 = act.expr();
      rhs2.add(csum, -1.0);
      pool.require_le(prog, std::move(rhs2));
    }
  } else {
    tv.lamr = add_range_var(prog, kMinTimeShare, 1.0 - kMinTimeShare);
    tv.lam1 = prog.add_var();
    tv.lam2 = prog.add_var();
    prog.add_ineq_le(LinExpr(tv.lam1, -1.0, kMinTimeShare));
    prog.add_ineq_le(LinExpr(tv.lam2, -1.0, kMinTimeShare));
    {
      LinExpr e(tv.lam1, 1.0);
      e.add(tv.lamr, -1.0);
      prog.add_ineq_le(std::move(e)); // lam_1 <= lam_r
      LinExpr f(tv.lam2, 1.0, -1.0);
      f.add(tv.lamr, 1.0);
      prog.add_ineq_le(std::move(f)); // lam_2 <= 1 - lam_r
    }
    const LinExpr neg_l1(tv.lam1, -1.0), neg_l2(tv.lam2, -1.0);
    const auto cr = make_slot(SlotSurface::ReflectOnly, false);
    const auto ct = make_slot(SlotSurface::TransmitOnly, false);
    for (int k = 0; k < K; ++k) {
      const auto ar = rate_slack(prog, cr.priv[k]);
      const auto at_ = rate_slack(prog, ct.priv[k]);
      ProductSurrogateRow epi;
      epi.add_product(ar.expr(), neg_l1, ar.value, -at.lam_1);
      epi.add_product(at_.expr(), neg_l2, at_.value, -at.lam_2);
      LinExpr rhs(c_vars[k], 1.0);
      rhs.add(x_var, -1.0);
      epi.require_le(prog, std::move(rhs));

      const auto adr = rate_slack(prog, cr.common[k]);
      const auto adt = rate_slack(prog, ct.common[k]);
      ProductSurrogateRow pool;
      pool.add_product(adr.expr(), neg_l1, adr.value, -at.lam_1);
      pool.add_product(adt.expr(), neg_l2, adt.value, -at.lam_2);
      LinExpr rhs2 = (-1.0) * csum;
      if (!cfg.is_relay(k)) {
        // forwarding-slot contributions are affine in the time shares
        const double rr = std::log2(1.0 + cr.coop[k]), rt = std::log2(1.0 + ct.coop[k]);
        rhs2.constant += rt;
        rhs2.add(tv.lamr, rr - rt);
        rhs2.add(tv.lam1, -rr);
        rhs2.add(tv.lam2, -rt);
      }
      pool.require_le(prog, std::move(rhs2));
    }
  }
  return tv;
}

} // namespace detail

namespace {

using detail::SinrCell;

// SINR slack iota with denominator slack zeta over the stacked precoder:
//   sum_den |gt^H p_m|^2 + c0 <= zeta,  nu(iota, zeta) <= minorant(|gt^H p_num|^2).
SinrCell add_p_cell(ConicProgram& prog, const ComplexVec& p, int rows,
                    const Eigen::VectorXcd& gt, const std::vector<int>& den_cols, int num_col,
                    const Eigen::MatrixXcd& P0, double c0) {
  double den0 = c0;
  for (int m : den_cols) den0 += std::norm((gt.adjoint() * P0.col(m)).value());
  SinrCell cell;
  cell.value = std::norm((gt.adjoint() * P0.col(num_col)).value()) / den0;
  const int zeta = prog.add_var();
  cell.var = prog.add_nonneg_var();
  std::vector<LinExpr> u;
  u.reserve(2 * den_cols.size());
  for (int m : den_cols) {
    u.push_back(detail::re_col(gt, p, rows, m));
    u.push_back(detail::im_col(gt, p, rows, m));
  }
  prog.add_quad_le(std::move(u), c0, LinExpr(zeta, 1.0));
  detail::ProductSurrogateRow row;
  row.add_product(cell.expr(), LinExpr(zeta, 1.0), cell.value, den0);
  row.require_le(prog, detail::col_gain_minorant(gt, p, rows, num_col, P0));
  return cell;
}

detail::SlotCells build_pslot(ConicProgram& prog, const SystemConfig& cfg, const ChannelSet& ch,
                              const DesignPoint& at, const ComplexVec& p, SlotSurface slot,
                              bool self_interference) {
  const int K = cfg.n_users;
  const auto eff = effective_channels(cfg, ch, at, slot);
  detail::SlotCells out;
  out.common.resize(K);
  out.priv.resize(K);
  out.coop = detail::coop_snr(cfg, eff);
  std::vector<int> all(K);
  for (int m = 1; m <= K; ++m) all[m - 1] = m;
  for (int k = 0; k < K; ++k) {
    const double si = (self_interference && cfg.is_relay(k))
                          ? std::norm(ch.si[k]) * cfg.relay_power()
                          : 0.0;
    std::vector<int> others = all;
    others.erase(others.begin() + k);
    out.common[k] = add_p_cell(prog, p, cfg.nt, eff.gt[k], all, 0, at.P, si + cfg.sigma2);
    out.priv[k] = add_p_cell(prog, p, cfg.nt, eff.gt[k], others, k + 1, at.P, si + cfg.sigma2);
  }
  return out;
}

} // namespace

ActiveBuild build_active_step(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                              const DesignPoint& at, const AOOptions& opts) {
  ActiveBuild b;
  ConicProgram& prog = b.prog;
  const int K = cfg.n_users, L = cfg.nt;
  b.p = add_complex_vec(prog, L * (K + 1));
  b.c_vars.resize(K);
  for (int k = 0; k < K; ++k) b.c_vars[k] = prog.add_nonneg_var();
  b.x_var = prog.add_var(1.0);

  {
    std::vector<LinExpr> u;
    u.reserve(2 * b.p.n);
    for (int i = 0; i < 2 * b.p.n; ++i) u.emplace_back(b.p.base + i, 1.0);
    prog.add_quad_le(std::move(u), 0.0, LinExpr(cfg.pt));
  }

  if (opts.pin_common_zero || opts.noma) {
    for (int v : b.c_vars) prog.pin(v, 0.0);
    for (int i = 0; i < L; ++i) {
      prog.pin(b.p.base + i, 0.0);
      prog.pin(b.p.base + b.p.n + i, 0.0);
    }
  }

  if (opts.noma) {
    const auto eff = effective_channels(cfg, ch, at, SlotSurface::PerUserSide);
    const auto order = detail::noma_order(eff.gt);
    for (int j = 0; j < K; ++j) {
      std::vector<int> den;
      for (int l = 0; l < j; ++l) den.push_back(order[l] + 1);
      for (int i = 0; i <= j; ++i) {
        const auto cell = add_p_cell(prog, b.p, L, eff.gt[order[i]], den, order[j] + 1, at.P,
                                     cfg.sigma2);
        detail::ConcaveLogSum ls(prog);
        ls.add_term(1.0, cell.expr(), cell.value);
        ls.require_at_least(LinExpr(b.x_var, 1.0));
      }
    }
    return b;
  }

  const auto make_slot = [&](SlotSurface slot, bool si) {
    return build_pslot(prog, cfg, ch, at, b.p, slot, si);
  };
  const auto tv = detail::wire_mode_rows(prog, cfg, mode, at, opts, make_slot, b.c_vars, b.x_var);
  b.lam_var = tv.lam;
  b.lamr_var = tv.lamr;
  b.lam1_var = tv.lam1;
  b.lam2_var = tv.lam2;
  return b;
}

StepResult solve_active(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                        const ScaState& start, const AOOptions& opts) {
  StepResult out;
  out.penalty_weight = start.penalty_weight;
  const double weight = start.penalty_weight;
  auto value = [&](const DesignPoint& q) {
    return detail::exact_objective(cfg, mode, ch, q, opts) + weight * surface_penalty(mode, q);
  };
  DesignPoint pt = start.point;
  const int L = cfg.nt;
  double obj = value(pt);
  out.trace = {obj};
  for (int it = 0; it < opts.max_inner; ++it) {
    const auto b = build_active_step(cfg, mode, ch, pt, opts);
    const auto res = solve(b.prog, opts.solver);
    if (res.status != SolveStatus::Optimal && res.status != SolveStatus::MaxIterations) break;
    DesignPoint cand = pt;
    const Eigen::VectorXcd pv = extract(b.p, res.x);
    for (int m = 0; m <= cfg.n_users; ++m) cand.P.col(m) = pv.segment(m * L, L);
    for (int k = 0; k < cfg.n_users; ++k) cand.c[k] = std::max(0.0, res.x[b.c_vars[k]]);
    if (b.lam_var >= 0) cand.lam = std::clamp(res.x[b.lam_var], kMinTimeShare, 1.0);
    if (b.lamr_var >= 0)
      cand.lam_r = std::clamp(res.x[b.lamr_var], kMinTimeShare, 1.0 - kMinTimeShare);
    if (b.lam1_var >= 0) cand.lam_1 = std::clamp(res.x[b.lam1_var], kMinTimeShare, cand.lam_r);
    if (b.lam2_var >= 0)
      cand.lam_2 = std::clamp(res.x[b.lam2_var], kMinTimeShare, 1.0 - cand.lam_r);
    detail::apply_pins(cand, opts);
    const double tr = cand.P.squaredNorm();
    if (tr > cfg.pt) cand.P *= std::sqrt(cfg.pt / tr);
    detail::restore_common_pool(cfg, mode, ch, cand, opts);
    const double cobj = value(cand);
    const double gain = cobj - obj;
    if (gain > 0) {
      pt = cand;
      obj = cobj;
      out.trace.push_back(obj);
    }
    ++out.iterations;
    if (gain < opts.eps_inner) {
      out.converged = true;
      break;
    }
  }
  out.point = pt;
  out.penalized_objective = obj;
  return out;
}

} // namespace starcrs
