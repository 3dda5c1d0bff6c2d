#include "starcrs/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace starcrs {

namespace {

Eigen::VectorXcd slot_psi(const SystemConfig& cfg, const DesignPoint& pt, SlotSurface slot,
                          int user) {
  const bool reflect = cfg.on_reflect_side(user);
  switch (slot) {
    case SlotSurface::PerUserSide: return reflect ? pt.psi_r : pt.psi_t;
    case SlotSurface::ReflectOnly:
      if (reflect) return pt.psi_r;
      break;
    case SlotSurface::TransmitOnly:
      if (!reflect) return pt.psi_t;
      break;
    case SlotSurface::None: break;
  }
  return Eigen::VectorXcd::Zero(cfg.n_elements);
}

double log2p(double x) { return std::log2(1.0 + x); }

} // namespace

EffectiveChannels effective_channels(const SystemConfig& cfg, const ChannelSet& ch,
                                     const DesignPoint& pt, SlotSurface slot) {
  const int K = cfg.n_users;
  EffectiveChannels eff;
  eff.gt.reserve(K);
  std::vector<Eigen::VectorXcd> psi(K);
  for (int k = 0; k < K; ++k) psi[k] = slot_psi(cfg, pt, slot, k);

  for (int k = 0; k < K; ++k) {
    Eigen::RowVectorXcd row = ch.g[k].adjoint();
    if (cfg.n_elements > 0) row += ch.h[k].adjoint() * psi[k].asDiagonal() * ch.E;
    eff.gt.push_back(row.adjoint());
  }
  eff.ht = ch.h_uu;
  if (cfg.n_elements > 0)
    for (int m = 0; m < K; ++m)
      for (int k = 0; k < K; ++k) {
        if (m == k) continue;
        // bounce path uses the conjugated coefficients of the receiver's side
        eff.ht(m, k) +=
            (ch.h[k].adjoint() * psi[k].conjugate().asDiagonal() * ch.h[m]).value();
      }
  return eff;
}

namespace {

SinrSet sinr_impl(const SystemConfig& cfg, const ChannelSet& ch,
                  const EffectiveChannels& eff, const Eigen::MatrixXcd& P,
                  bool self_interference) {
  const int K = cfg.n_users;
  if (P.cols() != K + 1 || P.rows() != cfg.nt)
    throw std::invalid_argument("sinr: precoder dimensions");
  SinrSet s;
  s.common_direct.resize(K);
  s.common_coop = Eigen::VectorXd::Zero(K);
  s.priv.resize(K);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd pow(K + 1);
    for (int m = 0; m <= K; ++m) pow[m] = std::norm((eff.gt[k].adjoint() * P.col(m)).value());
    const double si =
        (self_interference && cfg.is_relay(k)) ? std::norm(ch.si[k]) * cfg.relay_power() : 0.0;
    const double all_priv = pow.tail(K).sum();
    s.common_direct[k] = pow[0] / (all_priv + si + cfg.sigma2);
    s.priv[k] = pow[k + 1] / (all_priv - pow[k + 1] + si + cfg.sigma2);
    if (!cfg.is_relay(k)) {
      double coop = 0.0;
      for (int m : cfg.relays) coop += std::norm(eff.ht(m, k)) * cfg.relay_power();
      s.common_coop[k] = coop / cfg.sigma2;
    }
  }
  return s;
}

} // namespace

SinrSet sinr_fd(const SystemConfig& cfg, const ChannelSet& ch, const EffectiveChannels& eff,
                const Eigen::MatrixXcd& P) {
  return sinr_impl(cfg, ch, eff, P, true);
}

SinrSet sinr_hd(const SystemConfig& cfg, const ChannelSet& ch, const EffectiveChannels& eff,
                const Eigen::MatrixXcd& P) {
  return sinr_impl(cfg, ch, eff, P, false);
}

RateBundle mode_rates(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                      const DesignPoint& pt) {
  const int K = cfg.n_users;
  RateBundle rb;
  rb.Rc = Eigen::VectorXd::Zero(K);
  rb.Rp = Eigen::VectorXd::Zero(K);

  const bool fd = duplex_of(mode) == Duplex::Full;
  const bool ts = protocol_of(mode) == Protocol::TimeSwitch;

  if (fd && !ts) {
    auto s = sinr_fd(cfg, ch, effective_channels(cfg, ch, pt, SlotSurface::PerUserSide), pt.P);
    for (int k = 0; k < K; ++k) {
      rb.Rc[k] = log2p(s.common_direct[k] + s.common_coop[k]);
      rb.Rp[k] = log2p(s.priv[k]);
    }
  } else if (fd && ts) {
    const double w[2] = {pt.lam_r, 1.0 - pt.lam_r};
    const SlotSurface slots[2] = {SlotSurface::ReflectOnly, SlotSurface::TransmitOnly};
    for (int i = 0; i < 2; ++i) {
      auto s = sinr_fd(cfg, ch, effective_channels(cfg, ch, pt, slots[i]), pt.P);
      for (int k = 0; k < K; ++k) {
        rb.Rc[k] += w[i] * log2p(s.common_direct[k] + s.common_coop[k]);
        rb.Rp[k] += w[i] * log2p(s.priv[k]);
      }
    }
  } else if (!fd && !ts) {
    auto s = sinr_hd(cfg, ch, effective_channels(cfg, ch, pt, SlotSurface::PerUserSide), pt.P);
    for (int k = 0; k < K; ++k) {
      rb.Rc[k] = pt.lam * log2p(s.common_direct[k]);
      if (!cfg.is_relay(k)) rb.Rc[k] += (1.0 - pt.lam) * log2p(s.common_coop[k]);
      rb.Rp[k] = pt.lam * log2p(s.priv[k]);
    }
  } else {
    // four half-duplex slots: direct and forwarding parts of each surface side
    const double w_dir[2] = {pt.lam_1, pt.lam_2};
    const double w_coop[2] = {pt.lam_r - pt.lam_1, 1.0 - pt.lam_r - pt.lam_2};
    const SlotSurface slots[2] = {SlotSurface::ReflectOnly, SlotSurface::TransmitOnly};
    for (int i = 0; i < 2; ++i) {
      auto s = sinr_hd(cfg, ch, effective_channels(cfg, ch, pt, slots[i]), pt.P);
      for (int k = 0; k < K; ++k) {
        rb.Rc[k] += w_dir[i] * log2p(s.common_direct[k]);
        if (!cfg.is_relay(k)) rb.Rc[k] += w_coop[i] * log2p(s.common_coop[k]);
        rb.Rp[k] += w_dir[i] * log2p(s.priv[k]);
      }
    }
  }

  rb.Rc_cap = rb.Rc.minCoeff();
  rb.Rtot = rb.Rp + pt.c;
  rb.objective = rb.Rtot.minCoeff();
  return rb;
}

FeasibilityReport validate_with_rates(const SystemConfig& cfg, Mode mode,
                                      const ChannelSet& ch, const DesignPoint& pt) {
  FeasibilityReport rep = validate(cfg, mode, pt);
  rep.commonrate_slack = mode_rates(cfg, mode, ch, pt).Rc_cap - pt.c.sum();
  return rep;
}

} // namespace starcrs
