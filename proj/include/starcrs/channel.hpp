#pragma once

#include "starcrs/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace starcrs {

struct Geometry {
  Eigen::Vector3d bs{0, 0, 0};
  Eigen::Vector3d ris{0, 50, 0};
  std::vector<Eigen::Vector3d> users;
  double circle_radius = 5.0;
};

// Users drawn uniformly in a disc of the given radius around the surface,
// in the z=0 plane. Deterministic in the seed.
Geometry make_geometry(int n_users, std::uint64_t seed,
                       const Eigen::Vector3d& bs = {0, 0, 0},
                       const Eigen::Vector3d& ris = {0, 50, 0},
                       double radius = 5.0);

struct FadingParams {
  double l0_db = -30.0; // path loss at reference distance
  double d0 = 1.0;      // reference distance
  double alpha_bu = 3.76;
  double alpha_br = 2.2;
  double alpha_ru = 2.2;
  double alpha_uu = 3.76;
  double rician_k_db = 3.0; // LoS factor for BS-surface and surface-user links
  double sigma2_relay = 1.0;
  double sigma2_dest = 0.3;
  double sigma2_uu = 1.0;
};

// l0 * (d/d0)^-alpha with l0 given in dB.
double path_loss(double distance, double alpha, double l0_db = -30.0, double d0 = 1.0);

struct ChannelSet {
  Eigen::MatrixXcd E;               // BS -> surface, n_elements x nt
  std::vector<Eigen::VectorXcd> g;  // BS -> user k, length nt
  std::vector<Eigen::VectorXcd> h;  // surface -> user k, length n_elements
  Eigen::MatrixXcd h_uu;            // (m,k): user m -> user k, diagonal zero
  Eigen::VectorXcd si;              // per-user self-interference draw
};

// Deterministic in (seed, dimensions): the same seed reproduces identical
// raw fading; role-dependent variances (config.relays) only scale it, so
// regenerating after group_users keeps every draw aligned.
ChannelSet generate(const SystemConfig& cfg, const Geometry& geom,
                    const FadingParams& fading, std::uint64_t seed);

// Fills cfg.relays (single user with the largest ||g_k||^2, ties to the
// lowest index) and cfg.reflect_side (users on the BS side of the surface
// plane). n_relays > 1 picks that many strongest users.
void group_users(SystemConfig& cfg, const Geometry& geom, const ChannelSet& ch,
                 int n_relays = 1);

// Plain-text export: header with dimensions, one complex entry per token,
// row-major. Round-trips exactly (entries printed with max precision).
void save_channels(std::ostream& out, const ChannelSet& ch);
ChannelSet load_channels(std::istream& in);
void save_channels_file(const std::string& path, const ChannelSet& ch);
ChannelSet load_channels_file(const std::string& path);

} // namespace starcrs
