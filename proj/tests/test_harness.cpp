#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "starcrs/harness.hpp"

using namespace starcrs;

namespace {

// tiny plan that finishes in milliseconds: fast pipeline on a 2x2 system
ExperimentPlan tiny_plan(const std::string& output) {
  ExperimentPlan plan;
  plan.base.nt = 2;
  plan.base.n_users = 2;
  plan.base.pt = 10.0;
  plan.base.sigma2 = 1.0;
  plan.base.relay_power_factor = 0.5;
  plan.base.omega_si2 = 0.1;
  plan.fading.l0_db = 0.0;
  plan.fading.alpha_bu = 0.5;
  plan.fading.alpha_br = 0.3;
  plan.fading.alpha_ru = 0.3;
  plan.fading.alpha_uu = 0.5;
  plan.sweep = "N";
  plan.values = {2};
  plan.use_snr_preset = false;
  plan.schemes = {"FAST-HE"};
  plan.seed_base = 1;
  plan.n_seeds = 3;
  plan.output = output;
  return plan;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) { std::remove(path.c_str()); }
  ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("snr preset inverts the direct-link path loss") {
  Geometry geom; // bs at origin, surface 50 m away
  FadingParams fading;
  const double gain = path_loss(50.0, fading.alpha_bu, fading.l0_db, fading.d0);
  const double pt = pt_for_snr_db(20.0, 1e-12, geom, fading);
  CHECK(pt == doctest::Approx(100.0 * 1e-12 / gain).epsilon(1e-12));
  // +10 dB is exactly a factor of ten
  CHECK(pt_for_snr_db(30.0, 1e-12, geom, fading) == doctest::Approx(10.0 * pt));
  CHECK(pt_for_snr_db(20.0, 2e-12, geom, fading) == doctest::Approx(2.0 * pt));
}

TEST_CASE("plan files load with defaults and reject malformed input") {
  TempFile tmp("plan_load_test.json");

  auto write_plan = [&](const std::string& body) {
    std::ofstream out(tmp.path);
    out << body;
  };

  write_plan(R"({"values": [8, 16], "schemes": ["CRS-FE", "FAST-HE"]})");
  const auto plan = load_plan(tmp.path);
  CHECK(plan.sweep == "N");
  CHECK(plan.values == std::vector<double>{8, 16});
  CHECK(plan.schemes == std::vector<std::string>{"CRS-FE", "FAST-HE"});
  CHECK(plan.n_seeds == 10);
  CHECK(plan.seed_base == 1);
  CHECK(plan.base.nt == 4);
  CHECK(plan.output == "results.csv");
  CHECK(plan.use_snr_preset);

  write_plan(R"({"values": [8], "schemes": ["CRS-FE"], "sweep": "SNR",
                 "system": {"nt": 2, "n_users": 3, "sigma2": 1e-12},
                 "fading": {"l0_db": -20}, "ris": [0, 30, 0],
                 "options": {"max_outer": 5}, "n_seeds": 2, "output": "o.csv"})");
  const auto plan2 = load_plan(tmp.path);
  CHECK(plan2.sweep == "SNR");
  CHECK(plan2.base.nt == 2);
  CHECK(plan2.base.n_users == 3);
  CHECK(plan2.base.sigma2 == 1e-12);
  CHECK(plan2.fading.l0_db == -20.0);
  CHECK(plan2.ris == Eigen::Vector3d(0, 30, 0));
  CHECK(plan2.options.max_outer == 5);
  CHECK(plan2.n_seeds == 2);
  CHECK(plan2.output == "o.csv");

  write_plan(R"({"values": [], "schemes": ["CRS-FE"]})");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  write_plan(R"({"values": [8], "schemes": []})");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  write_plan(R"({"values": [8], "schemes": ["CRS-XX"]})");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  write_plan(R"({"values": [8], "schemes": ["CRS-FE"], "sweep": "K"})");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  write_plan(R"({"values": [8], "schemes": ["CRS-FE"], "n_seeds": 0})");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  write_plan("{ not json");
  CHECK_THROWS_AS((void)load_plan(tmp.path), std::invalid_argument);
  CHECK_THROWS_AS((void)load_plan("no_such_plan.json"), std::invalid_argument);
}

TEST_CASE("cells are deterministic and failures become status rows") {
  const auto plan = tiny_plan("unused.csv");
  RunRecord rec;
  const ResultRow a = run_cell(plan, "FAST-HE", 2, 5, &rec);
  const ResultRow b = run_cell(plan, "FAST-HE", 2, 5);
  CHECK(a.status == "ok");
  CHECK(a.objective > 0.0);
  CHECK(a.objective == b.objective);
  CHECK(a.objective == rec.objective);
  CHECK(a.iterations == rec.outer_iterations);
  CHECK(a.surface_violation == rec.report.surface_violation);

  // unknown scheme fails the cell, not the caller
  const ResultRow bad = run_cell(plan, "CRS-XX", 2, 5);
  CHECK(bad.status.rfind("failed:", 0) == 0);
  CHECK(bad.objective == 0.0);
}

TEST_CASE("result tables round-trip through csv") {
  TempFile tmp("harness_roundtrip.csv");
  ResultTable t;
  ResultRow r;
  r.cell = 0;
  r.scheme = "CRS-FE";
  r.value = 16;
  r.seed = 3;
  r.objective = 1.25;
  r.wall_ms = 12.5;
  r.iterations = 4;
  r.status = "ok";
  r.power_slack = 1e-9;
  r.commonrate_slack = 0.5;
  t.rows.push_back(r);
  r.cell = 1;
  r.status = "failed:solver blew up";
  t.rows.push_back(r);
  t.save_csv(tmp.path);

  const auto back = ResultTable::load_csv(tmp.path);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].scheme == "CRS-FE");
  CHECK(back.rows[0].objective == 1.25);
  CHECK(back.rows[0].seed == 3);
  CHECK(back.rows[0].power_slack == 1e-9);
  CHECK(back.rows[1].status == "failed:solver blew up");

  std::ofstream(tmp.path) << "not,a,result,table\n";
  CHECK_THROWS_AS((void)ResultTable::load_csv(tmp.path), std::invalid_argument);
}

TEST_CASE("plans run every cell once and resume to the same table") {
  TempFile tmp("harness_plan_run.csv");
  const auto plan = tiny_plan(tmp.path);

  const auto t1 = run_plan(plan);
  REQUIRE(t1.rows.size() == 3); // 1 scheme x 1 value x 3 seeds
  for (int i = 0; i < 3; ++i) {
    CHECK(t1.rows[i].cell == i);
    CHECK(t1.rows[i].seed == plan.seed_base + std::uint64_t(i));
    CHECK(t1.rows[i].status == "ok");
  }

  // a second run finds everything on disk and recomputes nothing
  const auto t2 = run_plan(plan);
  REQUIRE(t2.rows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(t2.rows[i].objective == t1.rows[i].objective);
    CHECK(t2.rows[i].wall_ms == t1.rows[i].wall_ms);
  }

  // drop the tail to simulate an interrupted run; the resume fills it back in
  ResultTable part;
  part.rows = {t1.rows[0]};
  part.save_csv(tmp.path);
  const auto t3 = run_plan(plan);
  REQUIRE(t3.rows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(t3.rows[i].cell == t1.rows[i].cell);
    CHECK(t3.rows[i].scheme == t1.rows[i].scheme);
    CHECK(t3.rows[i].value == t1.rows[i].value);
    CHECK(t3.rows[i].seed == t1.rows[i].seed);
    CHECK(t3.rows[i].objective == t1.rows[i].objective);
  }
}

TEST_CASE("summaries aggregate per scheme and sweep point") {
  ResultTable t;
  auto add = [&](const std::string& scheme, double value, std::uint64_t seed, double obj,
                 const std::string& status = "ok") {
    ResultRow r;
    r.scheme = scheme;
    r.value = value;
    r.seed = seed;
    r.objective = obj;
    r.wall_ms = 10.0;
    r.status = status;
    t.rows.push_back(r);
  };
  add("A", 8, 1, 1.0);
  add("A", 8, 2, 2.0);
  add("A", 8, 3, 3.0);
  add("A", 8, 4, 99.0, "failed:boom");
  add("B", 8, 1, 2.0);

  const auto s = summarize(t);
  REQUIRE(s.size() == 2);
  CHECK(s[0].scheme == "A");
  CHECK(s[0].n == 3); // the failed row is excluded
  CHECK(s[0].mean == doctest::Approx(2.0));
  CHECK(s[0].stddev == doctest::Approx(1.0));
  CHECK(s[0].mean_wall_ms == doctest::Approx(10.0));
  CHECK(s[1].scheme == "B");
  CHECK(s[1].n == 1);
  CHECK(s[1].stddev == 0.0);

  CHECK_THROWS_AS((void)summarize(ResultTable{}), std::invalid_argument);
}

TEST_CASE("relative gain is the mean paired ratio minus one") {
  ResultTable a, b;
  auto add = [](ResultTable& t, const std::string& scheme, double value,
                std::uint64_t seed, double obj) {
    ResultRow r;
    r.scheme = scheme;
    r.value = value;
    r.seed = seed;
    r.objective = obj;
    r.status = "ok";
    t.rows.push_back(r);
  };
  for (double value : {8.0, 16.0})
    for (std::uint64_t seed : {1, 2, 3}) {
      add(b, "B", value, seed, 1.0 + double(seed));
      add(a, "A", value, seed, 2.0 * (1.0 + double(seed)));
    }
  // one unpaired row on each side must be ignored
  add(a, "A", 8.0, 9, 5.0);
  add(b, "B", 16.0, 9, 5.0);

  const auto g = relative_gain(a, "A", b, "B");
  REQUIRE(g.size() == 2);
  for (const auto& row : g) {
    CHECK(row.pairs == 3);
    CHECK(row.mean_gain == doctest::Approx(1.0)); // exactly double everywhere
  }

  const auto zero = relative_gain(a, "A", a, "A");
  REQUIRE(zero.size() == 2);
  CHECK(zero[0].mean_gain == doctest::Approx(0.0));
  CHECK(zero[1].mean_gain == doctest::Approx(0.0));
}
