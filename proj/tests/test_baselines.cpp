#include "doctest.h"

#include <cmath>

#include "starcrs/baselines.hpp"

using namespace starcrs;

namespace {

// same star topology as the optimizer tests: user 0 relays to user 1
struct Small {
  SystemConfig cfg;
  ChannelSet ch;

  explicit Small(int n_elements = 2, std::uint64_t seed = 7) {
    cfg.nt = 2;
    cfg.n_users = 2;
    cfg.n_elements = n_elements;
    cfg.pt = 10.0;
    cfg.sigma2 = 1.0;
    cfg.relay_power_factor = 0.5;
    cfg.omega_si2 = 0.1;
    cfg.reflect_side = {0};
    auto geom = make_geometry(cfg.n_users, seed);
    FadingParams fading;
    fading.l0_db = 0.0;
    fading.alpha_bu = 0.5;
    fading.alpha_br = 0.3;
    fading.alpha_ru = 0.3;
    fading.alpha_uu = 0.5;
    ch = generate(cfg, geom, fading, seed);
    group_users(cfg, geom, ch);
  }
};

} // namespace

TEST_CASE("scheme table pins the right variables for each baseline") {
  const auto schemes = all_schemes();
  CHECK(schemes.size() == 12);

  auto expect = [](Scheme s, const char* name, Mode mode, bool psi0, bool lam1,
                   bool common0, bool noma) {
    const auto sp = scheme_spec(s);
    CAPTURE(name);
    CHECK(sp.scheme == s);
    CHECK(sp.name == name);
    CHECK(sp.mode == mode);
    CHECK(sp.pin_psi_zero == psi0);
    CHECK(sp.pin_lambda_one == lam1);
    CHECK(sp.pin_common_zero == common0);
    CHECK(sp.noma == noma);
  };
  expect(Scheme::CRS_FE, "CRS-FE", Mode::FE, false, false, false, false);
  expect(Scheme::CRS_FM, "CRS-FM", Mode::FM, false, false, false, false);
  expect(Scheme::CRS_FT, "CRS-FT", Mode::FT, false, false, false, false);
  expect(Scheme::CRS_HE, "CRS-HE", Mode::HE, false, false, false, false);
  expect(Scheme::CRS_HM, "CRS-HM", Mode::HM, false, false, false, false);
  expect(Scheme::CRS_HT, "CRS-HT", Mode::HT, false, false, false, false);
  expect(Scheme::CRS_FD, "CRS-FD", Mode::FE, true, false, false, false);
  expect(Scheme::CRS_HD, "CRS-HD", Mode::HE, true, false, false, false);
  expect(Scheme::RSMA_ES, "RSMA-ES", Mode::HE, false, true, false, false);
  expect(Scheme::SDMA_ES, "SDMA-ES", Mode::HE, false, true, true, false);
  expect(Scheme::NOMA_ES, "NOMA-ES", Mode::HE, false, true, false, true);
  expect(Scheme::RSMA, "RSMA", Mode::HE, true, true, false, false);
}

TEST_CASE("scheme names round-trip and unknown names throw") {
  for (Scheme s : all_schemes()) CHECK(scheme_from_name(scheme_spec(s).name) == s);
  CHECK_THROWS_AS((void)scheme_from_name("CRS-XX"), std::invalid_argument);
  CHECK_THROWS_AS((void)scheme_from_name(""), std::invalid_argument);
}

TEST_CASE("a scheme run is the pinned optimizer run, nothing more") {
  Small f;
  const auto via_scheme = evaluate_scheme(f.cfg, Scheme::RSMA_ES, f.ch, 3);
  AOOptions opts;
  opts.pin_lambda_one = true;
  const auto direct = alternate(f.cfg, Mode::HE, f.ch, 3, opts);

  CHECK(via_scheme.scheme == "RSMA-ES");
  CHECK(via_scheme.objective == direct.objective);
  CHECK((via_scheme.point.P - direct.point.P).norm() == 0.0);
  CHECK((via_scheme.point.c - direct.point.c).norm() == 0.0);
  CHECK((via_scheme.point.psi_r - direct.point.psi_r).norm() == 0.0);
  CHECK((via_scheme.point.psi_t - direct.point.psi_t).norm() == 0.0);
  CHECK(via_scheme.point.lam == 1.0);
  CHECK(direct.point.lam == 1.0);
}

TEST_CASE("surface-off schemes run the zero-element system") {
  Small f;
  for (Scheme s : {Scheme::CRS_FD, Scheme::CRS_HD, Scheme::RSMA}) {
    const auto sp = scheme_spec(s);
    CAPTURE(sp.name);
    const auto rec = evaluate_scheme(f.cfg, s, f.ch, 3);
    CHECK(rec.scheme == sp.name);
    CHECK(rec.point.psi_r.size() == 0);
    CHECK(rec.point.psi_t.size() == 0);
    CHECK(rec.report.surface_violation == 0.0);
    CHECK(rec.report.feasible(1e-6 * f.cfg.pt, 1e-3, 1e-3));
    CHECK(rec.objective > 0.0);
  }
}

TEST_CASE("pins survive into the returned point exactly") {
  Small f;
  const auto sdma = evaluate_scheme(f.cfg, Scheme::SDMA_ES, f.ch, 3);
  CHECK(sdma.point.lam == 1.0);
  CHECK(sdma.point.c.norm() == 0.0);
  CHECK(sdma.point.P.col(0).norm() == 0.0);
  CHECK(sdma.rates.Rc.norm() == 0.0);
}

TEST_CASE("each restriction is dominated along the warm chain") {
  Small f;
  const std::uint64_t seed = 3;
  const auto sdma = evaluate_scheme(f.cfg, Scheme::SDMA_ES, f.ch, seed);

  AOOptions warm;
  warm.init_point = sdma.point;
  const auto rsma = evaluate_scheme(f.cfg, Scheme::RSMA_ES, f.ch, seed, warm);
  CHECK(rsma.objective >= sdma.objective - 1e-9);

  warm.init_point = rsma.point;
  const auto crs = evaluate_scheme(f.cfg, Scheme::CRS_HE, f.ch, seed, warm);
  CHECK(crs.objective >= rsma.objective - 1e-9);
}

TEST_CASE("superposition baseline reports per-user sic rates") {
  Small f;
  const auto rec = evaluate_scheme(f.cfg, Scheme::NOMA_ES, f.ch, 3);
  CHECK(rec.scheme == "NOMA-ES");
  CHECK(rec.point.lam == 1.0);
  CHECK(rec.point.c.norm() == 0.0);
  CHECK(rec.point.P.col(0).norm() == 0.0);

  const Eigen::VectorXd rates = noma_user_rates(f.cfg, f.ch, rec.point);
  CHECK((rec.rates.Rp - rates).norm() == 0.0);
  CHECK(rec.objective == rates.minCoeff());
  CHECK(rec.rates.Rc.norm() == 0.0);
  CHECK(rec.rates.Rc_cap == 0.0);
  CHECK(rec.report.commonrate_slack == 0.0);
  CHECK(rec.report.feasible(1e-6 * f.cfg.pt, 1e-3, 1e-3));
  CHECK(rec.objective > 0.0);
}
