#include "starcrs/baselines.hpp"

#include "sca_internal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace starcrs {

SchemeSpec scheme_spec(Scheme s) {
  switch (s) {
    case Scheme::CRS_FE: return {s, "CRS-FE", Mode::FE};
    case Scheme::CRS_FM: return {s, "CRS-FM", Mode::FM};
    case Scheme::CRS_FT: return {s, "CRS-FT", Mode::FT};
    case Scheme::CRS_HE: return {s, "CRS-HE", Mode::HE};
    case Scheme::CRS_HM: return {s, "CRS-HM", Mode::HM};
    case Scheme::CRS_HT: return {s, "CRS-HT", Mode::HT};
    case Scheme::CRS_FD: return {s, "CRS-FD", Mode::FE, /*psi0*/ true};
    case Scheme::CRS_HD: return {s, "CRS-HD", Mode::HE, true};
    case Scheme::RSMA_ES: return {s, "RSMA-ES", Mode::HE, false, /*lam1*/ true};
    case Scheme::SDMA_ES: return {s, "SDMA-ES", Mode::HE, false, true, /*common0*/ true};
    case Scheme::NOMA_ES: {
      SchemeSpec sp{s, "NOMA-ES", Mode::HE, false, true};
      sp.noma = true;
      return sp;
    }
    case Scheme::RSMA: return {s, "RSMA", Mode::HE, true, true};
  }
  throw std::invalid_argument("scheme_spec: unknown scheme");
}

std::vector<Scheme> all_schemes() {
  return {Scheme::CRS_FE, Scheme::CRS_FM, Scheme::CRS_FT, Scheme::CRS_HE,
          Scheme::CRS_HM, Scheme::CRS_HT, Scheme::CRS_FD, Scheme::CRS_HD,
          Scheme::RSMA_ES, Scheme::SDMA_ES, Scheme::NOMA_ES, Scheme::RSMA};
}

Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : all_schemes())
    if (scheme_spec(s).name == name) return s;
  throw std::invalid_argument("scheme_from_name: " + name);
}

RunRecord evaluate_scheme(const SystemConfig& cfg, Scheme s, const ChannelSet& ch,
                          std::uint64_t seed, const AOOptions& opts) {
  const SchemeSpec spec = scheme_spec(s);
  AOOptions o = opts;
  o.pin_psi_zero |= spec.pin_psi_zero;
  o.pin_lambda_one |= spec.pin_lambda_one;
  o.pin_common_zero |= spec.pin_common_zero;
  o.noma |= spec.noma;

  SystemConfig run_cfg = cfg;
  ChannelSet run_ch = ch;
  if (spec.pin_psi_zero) {
    // surface off is the n_elements = 0 system, not a pinned surface: the
    // protocol feasibility checks then have nothing to report on
    run_cfg.n_elements = 0;
    run_ch.E.resize(0, cfg.nt);
    for (auto& hk : run_ch.h) hk.resize(0);
    if (o.init_point && o.init_point->psi_r.size() > 0) {
      o.init_point->psi_r.resize(0);
      o.init_point->psi_t.resize(0);
    }
  }

  RunRecord rec = alternate(run_cfg, spec.mode, run_ch, seed, o);
  rec.scheme = spec.name;
  return rec;
}

Eigen::VectorXd noma_user_rates(const SystemConfig& cfg, const ChannelSet& ch,
                                const DesignPoint& pt) {
  const int K = cfg.n_users;
  const auto eff = effective_channels(cfg, ch, pt, SlotSurface::PerUserSide);
  const auto order = detail::noma_order(eff.gt);
  Eigen::VectorXd rates(K);
  for (int j = 0; j < K; ++j) {
    // stream j in decode order: every stronger user decodes it first, so its
    // rate is the weakest such decoder's; undecoded stronger streams interfere
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= j; ++i) {
      const auto& gd = eff.gt[order[i]];
      const double num = std::norm((gd.adjoint() * pt.P.col(order[j] + 1)).value());
      double den = cfg.sigma2;
      for (int l = 0; l < j; ++l)
        den += std::norm((gd.adjoint() * pt.P.col(order[l] + 1)).value());
      r = std::min(r, std::log2(1.0 + num / den));
    }
    rates[order[j]] = r;
  }
  return rates;
}

double noma_objective(const SystemConfig& cfg, const ChannelSet& ch, const DesignPoint& pt) {
  return noma_user_rates(cfg, ch, pt).minCoeff();
}

} // namespace starcrs
