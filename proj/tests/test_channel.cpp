#include "doctest.h"

#include <cmath>
#include <sstream>

#include "starcrs/channel.hpp"

using namespace starcrs;

namespace {

SystemConfig cfg_for(int users, int elements, int nt = 4) {
  SystemConfig cfg;
  cfg.nt = nt;
  cfg.n_users = users;
  cfg.n_elements = elements;
  cfg.relays = {0};
  return cfg;
}

} // namespace

TEST_CASE("path loss reference points") {
  CHECK(path_loss(1.0, 3.76) == doctest::Approx(1e-3));
  CHECK(path_loss(100.0, 2.0) == doctest::Approx(1e-7));
  CHECK(path_loss(10.0, 2.2, -30.0, 1.0) == doctest::Approx(1e-3 * std::pow(10.0, -2.2)));
  // below the reference distance the loss saturates instead of amplifying
  CHECK(path_loss(0.01, 2.0) == doctest::Approx(1e-3));
}

TEST_CASE("geometry is deterministic and inside the disc") {
  Geometry a = make_geometry(6, 42);
  Geometry b = make_geometry(6, 42);
  Geometry c = make_geometry(6, 43);
  REQUIRE(a.users.size() == 6);
  bool same = true, diff = false;
  for (int k = 0; k < 6; ++k) {
    same = same && (a.users[k] - b.users[k]).norm() == 0.0;
    diff = diff || (a.users[k] - c.users[k]).norm() > 1e-12;
    CHECK((a.users[k] - a.ris).norm() <= a.circle_radius + 1e-12);
    CHECK(a.users[k].z() == 0.0);
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("channel dimensions and determinism") {
  SystemConfig cfg = cfg_for(3, 5);
  Geometry geom = make_geometry(3, 7);
  FadingParams fading;
  ChannelSet a = generate(cfg, geom, fading, 11);
  ChannelSet b = generate(cfg, geom, fading, 11);
  ChannelSet c = generate(cfg, geom, fading, 12);

  CHECK(a.E.rows() == 5);
  CHECK(a.E.cols() == 4);
  REQUIRE(a.g.size() == 3);
  CHECK(a.g[0].size() == 4);
  REQUIRE(a.h.size() == 3);
  CHECK(a.h[0].size() == 5);
  CHECK(a.h_uu.rows() == 3);
  CHECK(a.si.size() == 3);

  CHECK((a.E - b.E).norm() == 0.0);
  CHECK((a.g[2] - b.g[2]).norm() == 0.0);
  CHECK((a.h_uu - b.h_uu).norm() == 0.0);
  CHECK((a.E - c.E).norm() > 0.0);
}

TEST_CASE("no self link between a user and itself") {
  SystemConfig cfg = cfg_for(4, 2);
  Geometry geom = make_geometry(4, 3);
  ChannelSet ch = generate(cfg, geom, {}, 5);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(ch.h_uu(k, k)) == 0.0);
  CHECK(std::abs(ch.h_uu(0, 1)) > 0.0);
}

TEST_CASE("self interference scales with configured variance") {
  SystemConfig cfg = cfg_for(3, 0);
  Geometry geom = make_geometry(3, 9);
  cfg.omega_si2 = 0.0;
  ChannelSet quiet = generate(cfg, geom, {}, 11);
  CHECK(quiet.si.norm() == 0.0);

  cfg.omega_si2 = 2.0;
  ChannelSet low = generate(cfg, geom, {}, 11);
  cfg.omega_si2 = 8.0;
  ChannelSet high = generate(cfg, geom, {}, 11);
  CHECK((2.0 * low.si - high.si).norm() < 1e-14 * high.si.norm());
}

TEST_CASE("role variance rescales the same raw draws") {
  FadingParams fading; // relay variance 1, destination variance 0.3
  Geometry geom = make_geometry(2, 21);
  SystemConfig cfg = cfg_for(2, 4);
  cfg.relays = {0};
  ChannelSet a = generate(cfg, geom, fading, 33);
  cfg.relays = {1};
  ChannelSet b = generate(cfg, geom, fading, 33);

  const double ratio = std::sqrt(fading.sigma2_relay / fading.sigma2_dest);
  CHECK((a.g[0] - ratio * b.g[0]).norm() < 1e-12 * a.g[0].norm());
  CHECK((b.g[1] - ratio * a.g[1]).norm() < 1e-12 * b.g[1].norm());
  CHECK((a.h[0] - ratio * b.h[0]).norm() < 1e-12 * a.h[0].norm());
  // links not touching either user are identical
  CHECK((a.E - b.E).norm() == 0.0);
  CHECK((a.h_uu - b.h_uu).norm() == 0.0);
}

TEST_CASE("average gains follow the path loss model") {
  // many elements/antennas so the empirical mean is tight
  SystemConfig cfg = cfg_for(2, 64, 16);
  FadingParams fading;
  fading.sigma2_dest = 1.0; // uniform roles isolate the path loss factor
  Geometry geom = make_geometry(2, 17);
  ChannelSet ch = generate(cfg, geom, fading, 99);

  const double pl_br = path_loss((geom.ris - geom.bs).norm(), fading.alpha_br);
  const double mean_E = ch.E.squaredNorm() / (64.0 * 16.0);
  CHECK(mean_E / pl_br == doctest::Approx(1.0).epsilon(0.15));

  const double pl_ru = path_loss((geom.users[1] - geom.ris).norm(), fading.alpha_ru);
  const double mean_h = ch.h[1].squaredNorm() / 64.0;
  CHECK(mean_h / pl_ru == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("line of sight dominates as the rician factor grows") {
  SystemConfig cfg = cfg_for(1, 32, 8);
  FadingParams fading;
  fading.rician_k_db = 60.0; // essentially pure line of sight
  Geometry geom = make_geometry(1, 2);
  ChannelSet ch = generate(cfg, geom, fading, 4);
  // rank-one outer product: all singular values but one vanish
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch.E);
  CHECK(svd.singularValues()[1] / svd.singularValues()[0] < 1e-2);
}

TEST_CASE("relay selection picks the strongest direct link") {
  SystemConfig cfg = cfg_for(3, 0, 2);
  Geometry geom = make_geometry(3, 1);
  ChannelSet ch;
  ch.E.resize(0, 2);
  ch.g = {Eigen::VectorXcd::Constant(2, 1.0), Eigen::VectorXcd::Constant(2, 3.0),
          Eigen::VectorXcd::Constant(2, 2.0)};
  ch.h = {Eigen::VectorXcd(0), Eigen::VectorXcd(0), Eigen::VectorXcd(0)};
  ch.h_uu = Eigen::MatrixXcd::Zero(3, 3);
  ch.si = Eigen::VectorXcd::Zero(3);

  group_users(cfg, geom, ch);
  CHECK(cfg.relays == std::vector<int>{1});

  ch.g[0] = ch.g[1]; // tie between users 0 and 1 resolves to the lower index
  group_users(cfg, geom, ch);
  CHECK(cfg.relays == std::vector<int>{0});

  group_users(cfg, geom, ch, 2);
  CHECK(cfg.relays == std::vector<int>{0, 1});
  CHECK_THROWS(group_users(cfg, geom, ch, 4));
}

TEST_CASE("side grouping follows the surface plane") {
  SystemConfig cfg = cfg_for(2, 0, 2);
  Geometry geom;
  geom.bs = {0, 0, 0};
  geom.ris = {0, 50, 0};
  geom.users = {{1, 48, 0}, {-2, 53, 0}}; // first shares the BS half space
  ChannelSet ch;
  ch.E.resize(0, 2);
  ch.g = {Eigen::VectorXcd::Constant(2, 2.0), Eigen::VectorXcd::Constant(2, 1.0)};
  ch.h = {Eigen::VectorXcd(0), Eigen::VectorXcd(0)};
  ch.h_uu = Eigen::MatrixXcd::Zero(2, 2);
  ch.si = Eigen::VectorXcd::Zero(2);
  group_users(cfg, geom, ch);
  CHECK(cfg.reflect_side == std::vector<int>{0});
  CHECK(cfg.on_reflect_side(0));
  CHECK_FALSE(cfg.on_reflect_side(1));
}

TEST_CASE("channel serialization round trips exactly") {
  SystemConfig cfg = cfg_for(3, 4);
  Geometry geom = make_geometry(3, 5);
  cfg.omega_si2 = 1.5;
  ChannelSet ch = generate(cfg, geom, {}, 77);

  std::stringstream buf;
  save_channels(buf, ch);
  ChannelSet back = load_channels(buf);

  CHECK((ch.E - back.E).norm() == 0.0);
  for (int k = 0; k < 3; ++k) {
    CHECK((ch.g[k] - back.g[k]).norm() == 0.0);
    CHECK((ch.h[k] - back.h[k]).norm() == 0.0);
  }
  CHECK((ch.h_uu - back.h_uu).norm() == 0.0);
  CHECK((ch.si - back.si).norm() == 0.0);

  std::stringstream bad("not channels");
  CHECK_THROWS(load_channels(bad));
}
