#pragma once

#include "starcrs/sca.hpp"

namespace starcrs {

// (X^T + X) / 2
Eigen::MatrixXcd sym(const Eigen::MatrixXcd& X);
// Nearest-unitary projection U V^H from the SVD of X; columns of U past the
// numerical rank are completed with the conjugated trailing columns of V so
// the result stays unitary (and symmetric when X is symmetric).
Eigen::MatrixXcd uni(const Eigen::MatrixXcd& X);
Eigen::MatrixXcd symuni(const Eigen::MatrixXcd& X);

struct ProjectionResult {
  Eigen::VectorXcd psi_r, psi_t;
  double armijo_alpha = 0;        // boundary step sqrt(N)/||grad||_F
  Eigen::MatrixXcd gradient;      // ascent direction of the relaxed problem at 0
  Eigen::MatrixXcd theta_relaxed; // armijo_alpha * gradient (pre-projection)
};

// One-shot surface design: single gradient-ascent step on the relaxed
// sum-gain problem, then projection onto the protocol's feasible set.
ProjectionResult closed_form_theta(const SystemConfig& cfg, const ChannelSet& ch,
                                   Protocol protocol);

// Objective of the relaxed surface problem, ||G^H + H^H Theta E_x||_F^2 over
// the stacked two-sided layout (exposed for tests of the step-size rule).
double relaxed_surface_gain(const SystemConfig& cfg, const ChannelSet& ch,
                            const Eigen::MatrixXcd& theta);
Eigen::MatrixXcd relaxed_surface_gradient(const SystemConfig& cfg, const ChannelSet& ch,
                                          const Eigen::MatrixXcd& theta);

struct PrecoderDirections {
  Eigen::VectorXcd common;  // unit norm
  Eigen::MatrixXcd priv;    // nt x n_users, unit-norm zero-forcing columns
  bool ridge_used = false;  // Gram matrix was near-singular
};
PrecoderDirections precoder_directions(const std::vector<Eigen::VectorXcd>& gt);

// Low-complexity pipeline: closed-form surface, fixed directions, small SCA
// over power fractions / common shares / time splits only.
RunRecord fast_optimize(const SystemConfig& cfg, Mode mode, const ChannelSet& ch,
                        std::uint64_t seed, const AOOptions& opts = {});

} // namespace starcrs
