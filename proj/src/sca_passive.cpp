#include "sca_internal.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace starcrs {

namespace {

using detail::GainTerm;
using detail::SinrCell;

// Denominator slack eta plus SINR slack delta coupled by
//   sum_den |gain|^2 + c0 <= eta,   nu(delta, eta) <= minorant(|num gain|^2).
// A null psi marks a dark slot: everything folds to the bare-channel constant.
SinrCell add_sinr_cell(ConicProgram& prog, const ComplexVec* psi, const Eigen::VectorXcd& psi0,
                       const GainTerm& num, const std::vector<GainTerm>& den, double c0) {
  double den0 = c0;
  for (const auto& t : den) den0 += detail::gain_value(t, psi0);
  SinrCell cell;
  cell.value = detail::gain_value(num, psi0) / den0;
  if (!psi) return cell;
  const int eta = prog.add_var();
  cell.var = prog.add_nonneg_var();
  std::vector<LinExpr> u;
  u.reserve(2 * den.size());
  for (const auto& t : den) {
    u.push_back(re_inner(t.s, *psi, t.gbar));
    u.push_back(im_inner(t.s, *psi, t.gbar));
  }
  prog.add_quad_le(std::move(u), c0, LinExpr(eta, 1.0));
  detail::ProductSurrogateRow row;
  row.add_product(LinExpr(cell.var, 1.0), LinExpr(eta, 1.0), cell.value, den0);
  row.require_le(prog, detail::gain_minorant(num, *psi, psi0));
  return cell;
}

// Forwarded-branch SNR: sigma2 * xi <= sum_links power * |gain|^2 (affine rows,
// the gains enter through their minorants).
SinrCell add_coop_cell(ConicProgram& prog, const ComplexVec* psi, const Eigen::VectorXcd& psi0,
                       const std::vector<GainTerm>& links, double link_power, double sigma2) {
  double s0 = 0.0;
  for (const auto& t : links) s0 += link_power * detail::gain_value(t, psi0);
  SinrCell cell;
  cell.value = s0 / sigma2;
  if (!psi || links.empty()) return cell;
  cell.var = prog.add_nonneg_var();
  LinExpr e(cell.var, sigma2);
  for (const auto& t : links) e.add(detail::gain_minorant(t, *psi, psi0), -link_power);
  prog.add_ineq_le(std::move(e));
  return cell;
}

struct SlotCells {
  std::vector<SinrCell> common, priv, coop;
};

SlotCells build_slot(ConicProgram& prog, const SystemConfig& cfg, const ChannelSet& ch,
                     const DesignPoint& at, SlotSurface slot, bool self_interference,
                     const ComplexVec psis[2]) {
  const int K = cfg.n_users;
  SlotCells out;
  out.common.resize(K);
  out.priv.resize(K);
  out.coop.resize(K);
  const Eigen::VectorXcd dark = Eigen::VectorXcd::Zero(cfg.n_elements);
  for (int k = 0; k < K; ++k) {
    const int side = detail::slot_side(cfg, slot, k);
    const ComplexVec* pv = side < 0 ? nullptr : &psis[side];
    const Eigen::VectorXcd& psi0 = side < 0 ? dark : (side == 0 ? at.psi_r : at.psi_t);
    std::vector<GainTerm> all;
    all.reserve(K);
    for (int m = 1; m <= K; ++m) all.push_back(detail::direct_term(ch, at.P, k, m));
    const double si = (self_interference && cfg.is_relay(k))
                          ? std::norm(ch.si[k]) * cfg.relay_power()
                          : 0.0;
    out.common[k] =
        add_sinr_cell(prog, pv, psi0, detail::direct_term(ch, at.P, k, 0), all, si + cfg.sigma2);
    const GainTerm own = all[k];
    std::vector<GainTerm> others = all;
    others.erase(others.begin() + k);
    out.priv[k] = add_sinr_cell(prog, pv, psi0, own, others, si + cfg.sigma2);
    if (!cfg.is_relay(k)) {
      std::vector<GainTerm> links;
      for (int m : cfg.relays) links.push_back(detail::coop_term(ch, m, k));
      out.coop[k] = add_coop_cell(prog, pv, psi0, links, cfg.relay_power(), cfg.sigma2);
    }
  }
  return out;
}

// weight * log2(a0c + cell): constants fold directly, variables go through the
// quadratic log minorant.
void add_rate_term(detail::ConcaveLogSum& ls, double weight, const SinrCell& cell,
                   double a0c = 1.0) {
  if (weight == 0.0) return;
  if (cell.active())
    ls.add_term(weight, cell.expr(), cell.value, a0c);
  else
    ls.add_const(weight * std::log2(a0c + cell.value));
}

// weight * log2(1 + common + coop): the maximum-ratio-combined branch pair.
void add_mrc_term(detail::ConcaveLogSum& ls, double weight, const SinrCell& common,
                  const SinrCell& coop) {
  if (weight == 0.0) return;
  const double v0 = common.value + coop.value;
  if (!common.active() && !coop.active())
    ls.add_const(weight * std::log2(1.0 + v0));
  else
    ls.add_term(weight, common.expr() + coop.expr(), v0);
}

void add_surface_penalty(ConicProgram& prog, const PassiveBuild& b, const DesignPoint& at,
                         double weight, Protocol proto) {
  const int N = b.psi_r.n;
  auto tangent = [&](const ComplexVec& v, const Eigen::VectorXcd& psi0) {
    // gradient of sum |psi_n|^2 at psi0
    for (int n = 0; n < N; ++n) {
      prog.set_objective(v.re(n), 2.0 * weight * psi0[n].real());
      prog.set_objective(v.im(n), 2.0 * weight * psi0[n].imag());
    }
  };
  auto unit_pair_row = [&](int n) {
    std::vector<LinExpr> u{LinExpr(b.psi_r.re(n), 1.0), LinExpr(b.psi_r.im(n), 1.0),
                           LinExpr(b.psi_t.re(n), 1.0), LinExpr(b.psi_t.im(n), 1.0)};
    prog.add_quad_le(std::move(u), 0.0, LinExpr(1.0));
  };
  switch (proto) {
    case Protocol::EnergySplit:
      tangent(b.psi_r, at.psi_r);
      tangent(b.psi_t, at.psi_t);
      for (int n = 0; n < N; ++n) unit_pair_row(n);
      break;
    case Protocol::ModeSwitch:
      // reward |psi|^2 (linearized) and charge |psi| exactly through tau
      tangent(b.psi_r, at.psi_r);
      tangent(b.psi_t, at.psi_t);
      for (int n = 0; n < N; ++n) {
        unit_pair_row(n);
        for (const ComplexVec* v : {&b.psi_r, &b.psi_t}) {
          const int tau = prog.add_nonneg_var(-weight);
          prog.add_norm_le({LinExpr(v->re(n), 1.0), LinExpr(v->im(n), 1.0)}, LinExpr(tau, 1.0));
        }
      }
      break;
    case Protocol::TimeSwitch:
      tangent(b.psi_r, at.psi_r);
      tangent(b.psi_t, at.psi_t);
      for (int n = 0; n < N; ++n)
        for (const ComplexVec* v : {&b.psi_r, &b.psi_t})
          prog.add_quad_le({LinExpr(v->re(n), 1.0), LinExpr(v->im(n), 1.0)}, 0.0, LinExpr(1.0));
      break;
  }
}

} // namespace

PassiveBuild build_passive_step(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                                const DesignPoint& at, double penalty_weight,
                                const AOOptions& opts) {
  PassiveBuild b;
  if (cfg.n_elements == 0 || opts.pin_psi_zero) {
    b.trivial = true;
    return b;
  }
  ConicProgram& prog = b.prog;
  const int K = cfg.n_users;
  b.psi_r = add_complex_vec(prog, cfg.n_elements);
  b.psi_t = add_complex_vec(prog, cfg.n_elements);
  b.t_var = prog.add_var(1.0);
  const ComplexVec psis[2] = {b.psi_r, b.psi_t};
  const double csum = at.c.sum();

  if (opts.noma) {
    // one epigraph row per (decoder, stream) pair of the SIC chain
    const auto eff = effective_channels(cfg, ch, at, SlotSurface::PerUserSide);
    const auto order = detail::noma_order(eff.gt);
    const Eigen::VectorXcd dark = Eigen::VectorXcd::Zero(cfg.n_elements);
    for (int j = 0; j < K; ++j) {
      std::vector<int> interferers;
      for (int l = 0; l < j; ++l) interferers.push_back(order[l]);
      for (int i = 0; i <= j; ++i) {
        const int d = order[i];
        const int side = detail::slot_side(cfg, SlotSurface::PerUserSide, d);
        const Eigen::VectorXcd& psi0 = side == 0 ? at.psi_r : at.psi_t;
        std::vector<GainTerm> den;
        for (int l : interferers) den.push_back(detail::direct_term(ch, at.P, d, l + 1));
        const SinrCell cell = add_sinr_cell(prog, &psis[side], psi0,
                                            detail::direct_term(ch, at.P, d, order[j] + 1), den,
                                            cfg.sigma2);
        detail::ConcaveLogSum ls(prog);
        add_rate_term(ls, 1.0, cell);
        ls.require_at_least(LinExpr(b.t_var, 1.0));
      }
    }
    add_surface_penalty(prog, b, at, penalty_weight, protocol_of(mode));
    return b;
  }

  const bool fd = duplex_of(mode) == Duplex::Full;
  const bool ts = protocol_of(mode) == Protocol::TimeSwitch;

  if (fd && !ts) {
    const auto cells = build_slot(prog, cfg, ch, at, SlotSurface::PerUserSide, true, psis);
    for (int k = 0; k < K; ++k) {
      detail::ConcaveLogSum ls(prog);
      add_rate_term(ls, 1.0, cells.priv[k]);
      ls.add_const(at.c[k]);
      ls.require_at_least(LinExpr(b.t_var, 1.0));
      // pooled common rate, exact exponentiated form since the shares are fixed
      if (cells.common[k].active()) {
        LinExpr pool(std::exp2(csum) - 1.0);
        pool.add(cells.common[k].expr(), -1.0);
        pool.add(cells.coop[k].expr(), -1.0);
        prog.add_ineq_le(std::move(pool));
      }
    }
  } else if (!fd && !ts) {
    const auto cells = build_slot(prog, cfg, ch, at, SlotSurface::PerUserSide, false, psis);
    const double lam = at.lam;
    for (int k = 0; k < K; ++k) {
      detail::ConcaveLogSum ls(prog);
      add_rate_term(ls, lam, cells.priv[k]);
      ls.add_const(at.c[k]);
      ls.require_at_least(LinExpr(b.t_var, 1.0));
      if (cfg.is_relay(k)) {
        if (cells.common[k].active()) {
          LinExpr pool(std::exp2(csum / lam) - 1.0);
          pool.add(cells.common[k].expr(), -1.0);
          prog.add_ineq_le(std::move(pool));
        }
      } else {
        detail::ConcaveLogSum pool(prog);
        add_rate_term(pool, lam, cells.common[k]);
        add_rate_term(pool, 1.0 - lam, cells.coop[k]);
        pool.require_at_least(LinExpr(csum));
      }
    }
  } else if (fd) {
    const auto cr = build_slot(prog, cfg, ch, at, SlotSurface::ReflectOnly, true, psis);
    const auto ct = build_slot(prog, cfg, ch, at, SlotSurface::TransmitOnly, true, psis);
    const double w[2] = {at.lam_r, 1.0 - at.lam_r};
    for (int k = 0; k < K; ++k) {
      detail::ConcaveLogSum ls(prog);
      add_rate_term(ls, w[0], cr.priv[k]);
      add_rate_term(ls, w[1], ct.priv[k]);
      ls.add_const(at.c[k]);
      ls.require_at_least(LinExpr(b.t_var, 1.0));
      detail::ConcaveLogSum pool(prog);
      add_mrc_term(pool, w[0], cr.common[k], cr.coop[k]);
      add_mrc_term(pool, w[1], ct.common[k], ct.coop[k]);
      pool.require_at_least(LinExpr(csum));
    }
  } else {
    const auto cr = build_slot(prog, cfg, ch, at, SlotSurface::ReflectOnly, false, psis);
    const auto ct = build_slot(prog, cfg, ch, at, SlotSurface::TransmitOnly, false, psis);
    for (int k = 0; k < K; ++k) {
      detail::ConcaveLogSum ls(prog);
      add_rate_term(ls, at.lam_1, cr.priv[k]);
      add_rate_term(ls, at.lam_2, ct.priv[k]);
      ls.add_const(at.c[k]);
      ls.require_at_least(LinExpr(b.t_var, 1.0));
      detail::ConcaveLogSum pool(prog);
      add_rate_term(pool, at.lam_1, cr.common[k]);
      add_rate_term(pool, at.lam_2, ct.common[k]);
      if (!cfg.is_relay(k)) {
        add_rate_term(pool, at.lam_r - at.lam_1, cr.coop[k]);
        add_rate_term(pool, 1.0 - at.lam_r - at.lam_2, ct.coop[k]);
      }
      pool.require_at_least(LinExpr(csum));
    }
  }

  add_surface_penalty(prog, b, at, penalty_weight, protocol_of(mode));
  return b;
}

StepResult solve_passive(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                         const ScaState& start, const AOOptions& opts) {
  StepResult out;
  out.point = start.point;
  out.penalty_weight = start.penalty_weight;
  auto value = [&](const DesignPoint& q, double w) {
    return detail::exact_objective(cfg, mode, ch, q, opts) + w * surface_penalty(mode, q);
  };
  if (cfg.n_elements == 0 || opts.pin_psi_zero) {
    out.penalized_objective = value(out.point, out.penalty_weight);
    out.trace = {out.penalized_objective};
    out.converged = true;
    return out;
  }
  DesignPoint pt = start.point;
  double weight = start.penalty_weight;
  while (true) {
    double obj = value(pt, weight);
    out.trace.assign(1, obj);
    bool converged = false;
    for (int it = 0; it < opts.max_inner; ++it) {
      const auto b = build_passive_step(cfg, mode, ch, pt, weight, opts);
      const auto res = solve(b.prog, opts.solver);
      if (res.status != SolveStatus::Optimal && res.status != SolveStatus::MaxIterations) break;
      DesignPoint cand = pt;
      cand.psi_r = extract(b.psi_r, res.x);
      cand.psi_t = extract(b.psi_t, res.x);
      detail::restore_common_pool(cfg, mode, ch, cand, opts);
      const double cobj = value(cand, weight);
      const double gain = cobj - obj;
      if (gain > 0) {
        pt = cand;
        obj = cobj;
        out.trace.push_back(obj);
      }
      ++out.iterations;
      if (gain < opts.eps_inner) {
        converged = true;
        break;
      }
    }
    if (surface_residual(mode, pt) > opts.penalty_residual_tol && weight < opts.penalty_max) {
      weight = weight > 0.0 ? 2.0 * weight : 1.0;
      continue;
    }
    out.converged = converged;
    break;
  }
  out.point = pt;
  out.penalty_weight = weight;
  out.penalized_objective = value(pt, weight);
  return out;
}

} // namespace starcrs
