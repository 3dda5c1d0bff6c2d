#include "starcrs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace starcrs {

Duplex duplex_of(Mode m) {
  switch (m) {
    case Mode::FE:
    case Mode::FM:
    case Mode::FT: return Duplex::Full;
    default: return Duplex::Half;
  }
}

Protocol protocol_of(Mode m) {
  switch (m) {
    case Mode::FE:
    case Mode::HE: return Protocol::EnergySplit;
    case Mode::FM:
    case Mode::HM: return Protocol::ModeSwitch;
    default: return Protocol::TimeSwitch;
  }
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::FE: return "FE";
    case Mode::FM: return "FM";
    case Mode::FT: return "FT";
    case Mode::HE: return "HE";
    case Mode::HM: return "HM";
    case Mode::HT: return "HT";
  }
  return "?";
}

Mode mode_from_name(const std::string& name) {
  for (Mode m : {Mode::FE, Mode::FM, Mode::FT, Mode::HE, Mode::HM, Mode::HT})
    if (name == mode_name(m)) return m;
  throw std::invalid_argument("unknown mode: " + name);
}

bool has_time_variables(Mode m) {
  return m == Mode::FT || duplex_of(m) == Duplex::Half;
}

bool SystemConfig::is_relay(int k) const {
  return std::find(relays.begin(), relays.end(), k) != relays.end();
}

bool SystemConfig::on_reflect_side(int k) const {
  return std::find(reflect_side.begin(), reflect_side.end(), k) != reflect_side.end();
}

std::vector<int> SystemConfig::destinations() const {
  std::vector<int> d;
  for (int k = 0; k < n_users; ++k)
    if (!is_relay(k)) d.push_back(k);
  return d;
}

DesignPoint DesignPoint::zero(const SystemConfig& cfg) {
  DesignPoint p;
  p.P = Eigen::MatrixXcd::Zero(cfg.nt, cfg.n_users + 1);
  p.c = Eigen::VectorXd::Zero(cfg.n_users);
  p.psi_r = Eigen::VectorXcd::Zero(cfg.n_elements);
  p.psi_t = Eigen::VectorXcd::Zero(cfg.n_elements);
  return p;
}

bool FeasibilityReport::feasible(double power_tol, double surface_tol,
                                 double binary_tol) const {
  return power_slack >= -power_tol && surface_violation <= surface_tol &&
         binary_violation <= binary_tol && time_violation <= 1e-12;
}

void check_config(const SystemConfig& cfg) {
  if (cfg.nt < 1 || cfg.n_users < 1 || cfg.n_elements < 0)
    throw std::invalid_argument("config: bad dimensions");
  if (!(cfg.pt > 0) || !(cfg.sigma2 > 0) || !(cfg.relay_power_factor > 0))
    throw std::invalid_argument("config: powers must be positive");
  if (cfg.omega_si2 < 0) throw std::invalid_argument("config: negative interference");
  auto check_set = [&](const std::vector<int>& set, const char* what) {
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument(std::string("config: duplicate entries in ") + what);
    for (int k : sorted)
      if (k < 0 || k >= cfg.n_users)
        throw std::invalid_argument(std::string("config: user index out of range in ") + what);
  };
  check_set(cfg.relays, "relays");
  check_set(cfg.reflect_side, "reflect_side");
  if (cfg.relays.empty()) throw std::invalid_argument("config: at least one relay required");
}

namespace {

double range_violation(double v, double lo, double hi) {
  return std::max(0.0, lo - v) + std::max(0.0, v - hi);
}

} // namespace

FeasibilityReport validate(const SystemConfig& cfg, Mode mode, const DesignPoint& pt) {
  check_config(cfg);
  if (pt.P.rows() != cfg.nt || pt.P.cols() != cfg.n_users + 1)
    throw std::invalid_argument("point: precoder dimensions");
  if (pt.c.size() != cfg.n_users) throw std::invalid_argument("point: share vector size");
  if (pt.psi_r.size() != cfg.n_elements || pt.psi_t.size() != cfg.n_elements)
    throw std::invalid_argument("point: surface vector size");

  FeasibilityReport rep;
  rep.power_slack = cfg.pt - pt.P.squaredNorm();

  const Protocol proto = protocol_of(mode);
  for (int n = 0; n < cfg.n_elements; ++n) {
    const double ar = std::abs(pt.psi_r[n]), at = std::abs(pt.psi_t[n]);
    if (proto == Protocol::TimeSwitch) {
      rep.surface_violation =
          std::max({rep.surface_violation, std::abs(ar - 1.0), std::abs(at - 1.0)});
    } else {
      rep.surface_violation =
          std::max(rep.surface_violation, std::abs(ar * ar + at * at - 1.0));
      if (proto == Protocol::ModeSwitch)
        rep.binary_violation = std::max(rep.binary_violation, std::min(ar, at));
    }
  }

  const double lo = kMinTimeShare, hi = 1.0 - kMinTimeShare;
  switch (mode) {
    case Mode::FT:
      rep.time_violation = range_violation(pt.lam_r, lo, hi);
      break;
    case Mode::HE:
    case Mode::HM:
      // lam = 1 is legal: it turns the cooperative phase off entirely
      rep.time_violation = range_violation(pt.lam, lo, 1.0);
      break;
    case Mode::HT:
      rep.time_violation = range_violation(pt.lam_r, lo, hi) +
                           range_violation(pt.lam_1, lo, pt.lam_r) +
                           range_violation(pt.lam_2, lo, 1.0 - pt.lam_r);
      break;
    default: break;
  }
  return rep;
}

} // namespace starcrs
