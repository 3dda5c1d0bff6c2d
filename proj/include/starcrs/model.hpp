#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace starcrs {

// Transmission modes: {full,half}-duplex relaying crossed with the surface
// operating protocol (energy splitting / mode switching / time switching).
enum class Mode { FE, FM, FT, HE, HM, HT };

enum class Duplex { Full, Half };
enum class Protocol { EnergySplit, ModeSwitch, TimeSwitch };

Duplex duplex_of(Mode m);
Protocol protocol_of(Mode m);
const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

// True for modes whose rate expressions carry optimizable time-sharing
// variables (lam for HE/HM, lam_r for FT, lam_r/lam_1/lam_2 for HT).
bool has_time_variables(Mode m);

struct SystemConfig {
  int nt = 4;         // BS transmit antennas
  int n_users = 4;    // served users
  int n_elements = 0; // surface elements, 0 = no surface deployed
  double pt = 1.0;    // BS power budget
  double sigma2 = 1.0;
  double relay_power_factor = 0.5; // each relay transmits with factor*pt
  double omega_si2 = 0.0;          // full-duplex self-interference variance

  std::vector<int> relays;       // users that decode-and-forward
  std::vector<int> reflect_side; // users in the reflection half-space

  bool is_relay(int k) const;
  bool on_reflect_side(int k) const;
  std::vector<int> destinations() const;
  double relay_power() const { return relay_power_factor * pt; }
};

// One complete operating point of the transmitter and surface.
struct DesignPoint {
  Eigen::MatrixXcd P;    // nt x (n_users+1); column 0 carries the common stream
  Eigen::VectorXd c;     // per-user share of the common rate, size n_users
  Eigen::VectorXcd psi_r; // reflection coefficients, size n_elements
  Eigen::VectorXcd psi_t; // transmission coefficients, size n_elements
  double lam = 0.5;   // HE/HM direct-phase fraction
  double lam_r = 0.5; // FT/HT reflection-slot fraction
  double lam_1 = 0.25, lam_2 = 0.25; // HT direct-phase fractions per slot

  static DesignPoint zero(const SystemConfig& cfg);
};

struct FeasibilityReport {
  double power_slack = 0;       // pt - tr(P P^H)
  double surface_violation = 0; // protocol residual (see validate)
  double binary_violation = 0;  // mode-switching only
  double time_violation = 0;    // range/ordering residual of time variables
  // Rc_cap - sum(c); requires rates, filled by optimizer paths (NaN otherwise).
  double commonrate_slack = std::numeric_limits<double>::quiet_NaN();

  bool feasible(double power_tol, double surface_tol, double binary_tol) const;
};

// Structural and protocol checks for a candidate point. Throws
// std::invalid_argument on dimension mismatches; never mutates inputs.
FeasibilityReport validate(const SystemConfig& cfg, Mode mode, const DesignPoint& pt);

// Throws std::invalid_argument if the configuration itself is inconsistent
// (bad sizes, overlapping/out-of-range user sets, nonpositive powers).
void check_config(const SystemConfig& cfg);

inline constexpr double kMinTimeShare = 1e-4; // strict positivity floor for time splits

} // namespace starcrs
