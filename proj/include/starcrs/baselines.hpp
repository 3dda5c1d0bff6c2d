#pragma once

#include "starcrs/sca.hpp"

namespace starcrs {

// The six full modes plus comparison schemes. Baselines reuse the same
// optimizer with variables pinned by equality rows, not separate code paths.
enum class Scheme {
  CRS_FE, CRS_FM, CRS_FT, CRS_HE, CRS_HM, CRS_HT,
  CRS_FD,  // FE with the surface off
  CRS_HD,  // HE with the surface off
  RSMA_ES, // HE with lam pinned to 1 (no relaying)
  SDMA_ES, // RSMA_ES plus p_0 = 0, c = 0
  NOMA_ES, // superposition + SIC, surface optimized under ES
  RSMA,    // no surface, no relaying
};

struct SchemeSpec {
  Scheme scheme;
  std::string name;
  Mode mode;
  bool pin_psi_zero = false;
  bool pin_lambda_one = false;
  bool pin_common_zero = false;
  bool noma = false;
};

SchemeSpec scheme_spec(Scheme s);
Scheme scheme_from_name(const std::string& name);
std::vector<Scheme> all_schemes();

RunRecord evaluate_scheme(const SystemConfig& cfg, Scheme s, const ChannelSet& ch,
                          std::uint64_t seed, const AOOptions& opts = {});

// Exact achieved max-min rate of a superposition/SIC point (decode order by
// descending effective-channel norm). P column 0 is unused (no common stream).
double noma_objective(const SystemConfig& cfg, const ChannelSet& ch, const DesignPoint& pt);
// Per-user SIC rates behind noma_objective: each stream is bottlenecked by the
// weakest of the decoders that must cancel it.
Eigen::VectorXd noma_user_rates(const SystemConfig& cfg, const ChannelSet& ch,
                                const DesignPoint& pt);

} // namespace starcrs
