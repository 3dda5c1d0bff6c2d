#include "starcrs/channel.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace starcrs {

namespace {

// Uniforms taken straight from the top 53 bits of mt19937_64 and normals via
// Box-Muller, so draws are bit-identical across standard libraries.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double uniform() { return (eng() >> 11) * 0x1.0p-53; }

  std::complex<double> cnormal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1)); // -2 ln u / 2 for unit variance
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
  }
};

// Half-wavelength line array along the x axis.
Eigen::VectorXcd steer(int len, const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const double sine = (to - from).normalized().x();
  Eigen::VectorXcd a(len);
  for (int n = 0; n < len; ++n) a[n] = std::polar(1.0, std::numbers::pi * n * sine);
  return a;
}

} // namespace

Geometry make_geometry(int n_users, std::uint64_t seed, const Eigen::Vector3d& bs,
                       const Eigen::Vector3d& ris, double radius) {
  Geometry g;
  g.bs = bs;
  g.ris = ris;
  g.circle_radius = radius;
  Rng rng(seed);
  for (int k = 0; k < n_users; ++k) {
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    g.users.push_back(ris + Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), 0.0));
  }
  return g;
}

double path_loss(double distance, double alpha, double l0_db, double d0) {
  return std::pow(10.0, l0_db / 10.0) * std::pow(std::max(distance, d0) / d0, -alpha);
}

ChannelSet generate(const SystemConfig& cfg, const Geometry& geom,
                    const FadingParams& fading, std::uint64_t seed) {
  if (static_cast<int>(geom.users.size()) != cfg.n_users)
    throw std::invalid_argument("generate: geometry/user count mismatch");
  const int L = cfg.nt, K = cfg.n_users, N = cfg.n_elements;
  const double kappa = std::pow(10.0, fading.rician_k_db / 10.0);
  const double w_los = std::sqrt(kappa / (1.0 + kappa));
  const double w_nlos = std::sqrt(1.0 / (1.0 + kappa));

  Rng rng(seed);
  ChannelSet ch;

  // raw draws first, in a fixed order independent of user roles
  ch.E.resize(N, L);
  for (int n = 0; n < N; ++n)
    for (int l = 0; l < L; ++l) ch.E(n, l) = rng.cnormal();
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXcd gk(L);
    for (int l = 0; l < L; ++l) gk[l] = rng.cnormal();
    ch.g.push_back(std::move(gk));
  }
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXcd hk(N);
    for (int n = 0; n < N; ++n) hk[n] = rng.cnormal();
    ch.h.push_back(std::move(hk));
  }
  ch.h_uu.resize(K, K);
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k) ch.h_uu(m, k) = rng.cnormal();
  ch.si.resize(K);
  for (int k = 0; k < K; ++k) ch.si[k] = rng.cnormal();

  if (N > 0) {
    const Eigen::VectorXcd ar = steer(N, geom.ris, geom.bs);
    const Eigen::VectorXcd at = steer(L, geom.bs, geom.ris);
    const double amp = std::sqrt(path_loss((geom.ris - geom.bs).norm(), fading.alpha_br,
                                           fading.l0_db, fading.d0));
    ch.E = amp * (w_los * ar * at.adjoint() + w_nlos * ch.E);
  }
  for (int k = 0; k < K; ++k) {
    const double role = cfg.is_relay(k) ? fading.sigma2_relay : fading.sigma2_dest;
    const double amp_g =
        std::sqrt(role * path_loss((geom.users[k] - geom.bs).norm(), fading.alpha_bu,
                                   fading.l0_db, fading.d0));
    ch.g[k] *= amp_g;
    if (N > 0) {
      const double amp_h =
          std::sqrt(role * path_loss((geom.users[k] - geom.ris).norm(), fading.alpha_ru,
                                     fading.l0_db, fading.d0));
      ch.h[k] = amp_h * (w_los * steer(N, geom.ris, geom.users[k]) + w_nlos * ch.h[k]);
    }
  }
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k) {
      if (m == k) {
        ch.h_uu(m, k) = 0.0;
        continue;
      }
      const double d = (geom.users[k] - geom.users[m]).norm();
      ch.h_uu(m, k) *=
          std::sqrt(fading.sigma2_uu * path_loss(d, fading.alpha_uu, fading.l0_db, fading.d0));
    }
  ch.si *= std::sqrt(cfg.omega_si2);
  return ch;
}

void group_users(SystemConfig& cfg, const Geometry& geom, const ChannelSet& ch,
                 int n_relays) {
  if (n_relays < 1 || n_relays > cfg.n_users)
    throw std::invalid_argument("group_users: bad relay count");
  std::vector<int> order(cfg.n_users);
  for (int k = 0; k < cfg.n_users; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ch.g[a].squaredNorm() > ch.g[b].squaredNorm();
  });
  cfg.relays.assign(order.begin(), order.begin() + n_relays);
  std::sort(cfg.relays.begin(), cfg.relays.end());

  cfg.reflect_side.clear();
  const double bs_side = geom.bs.y() - geom.ris.y();
  for (int k = 0; k < cfg.n_users; ++k) {
    const double user_side = geom.users[k].y() - geom.ris.y();
    if (user_side * bs_side >= 0.0) cfg.reflect_side.push_back(k);
  }
}

namespace {

void put_mat(std::ostream& out, const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << m(i, j).real() << ' ' << m(i, j).imag() << (j + 1 < m.cols() ? " " : "");
    out << '\n';
  }
}

Eigen::MatrixXcd get_mat(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re, im;
      if (!(in >> re >> im)) throw std::runtime_error("channel parse: truncated matrix");
      m(i, j) = {re, im};
    }
  return m;
}

} // namespace

void save_channels(std::ostream& out, const ChannelSet& ch) {
  const int K = static_cast<int>(ch.g.size());
  const int L = K ? static_cast<int>(ch.g[0].size()) : 0;
  const int N = static_cast<int>(ch.E.rows());
  out << std::setprecision(17);
  out << "channels " << N << ' ' << L << ' ' << K << '\n';
  put_mat(out, ch.E);
  for (const auto& g : ch.g) put_mat(out, g.transpose());
  for (const auto& h : ch.h) put_mat(out, h.transpose());
  put_mat(out, ch.h_uu);
  put_mat(out, ch.si.transpose());
}

ChannelSet load_channels(std::istream& in) {
  std::string tag;
  int N, L, K;
  if (!(in >> tag >> N >> L >> K) || tag != "channels")
    throw std::runtime_error("channel parse: bad header");
  ChannelSet ch;
  ch.E = get_mat(in, N, L);
  for (int k = 0; k < K; ++k) ch.g.push_back(get_mat(in, 1, L).transpose());
  for (int k = 0; k < K; ++k) ch.h.push_back(get_mat(in, 1, N).transpose());
  ch.h_uu = get_mat(in, K, K);
  ch.si = get_mat(in, 1, K).transpose();
  return ch;
}

void save_channels_file(const std::string& path, const ChannelSet& ch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_channels(out, ch);
}

ChannelSet load_channels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return load_channels(in);
}

} // namespace starcrs
