#pragma once

#include "starcrs/channel.hpp"

namespace starcrs {

// The six modes evaluate SINRs in one or two surface states. For FT/HT the
// off-slot side sees a dark surface (Theta = 0).
enum class SlotSurface {
  PerUserSide, // each user sees its own side's coefficients (ES/MS modes)
  ReflectOnly, // reflection slot: transmit-side users see Theta = 0
  TransmitOnly,
  None, // surface dark for everyone
};

struct EffectiveChannels {
  // gt[k] with gt[k]^H = g_k^H + h_k^H diag(psi_i) E
  std::vector<Eigen::VectorXcd> gt;
  // ht(m,k) = h_uu(m,k) + h_k^H diag(psi_i)^H h_m  (i = destination k's side)
  Eigen::MatrixXcd ht;
};

EffectiveChannels effective_channels(const SystemConfig& cfg, const ChannelSet& ch,
                                     const DesignPoint& pt, SlotSurface slot);

struct SinrSet {
  Eigen::VectorXd common_direct; // first-hop common-stream SINR, all users
  Eigen::VectorXd common_coop;   // relayed MRC branch, zero for relay users
  Eigen::VectorXd priv;          // private-stream SINR
};

// Full-duplex: relay users suffer |si_k|^2 * relay_power in both denominators.
SinrSet sinr_fd(const SystemConfig& cfg, const ChannelSet& ch,
                const EffectiveChannels& eff, const Eigen::MatrixXcd& P);
// Half-duplex direct phase: same expressions without self-interference.
SinrSet sinr_hd(const SystemConfig& cfg, const ChannelSet& ch,
                const EffectiveChannels& eff, const Eigen::MatrixXcd& P);

struct RateBundle {
  Eigen::VectorXd Rc;   // per-user common-stream rate
  Eigen::VectorXd Rp;   // per-user private rate
  Eigen::VectorXd Rtot; // Rp + c
  double Rc_cap = 0;    // min_k Rc
  double objective = 0; // min_k Rtot (meaningful when sum(c) <= Rc_cap)
};

// Exact achieved rates of a design point under the given mode.
RateBundle mode_rates(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                      const DesignPoint& pt);

// validate() plus the common-rate slack computed from actual rates.
FeasibilityReport validate_with_rates(const SystemConfig& cfg, Mode mode,
                                      const ChannelSet& ch, const DesignPoint& pt);

} // namespace starcrs
