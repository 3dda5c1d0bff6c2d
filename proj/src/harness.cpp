#include "starcrs/harness.hpp"

#include "starcrs/fastopt.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace starcrs {

double pt_for_snr_db(double snr_db, double sigma2, const Geometry& geom,
                     const FadingParams& fading) {
  const double gain =
      path_loss((geom.bs - geom.ris).norm(), fading.alpha_bu, fading.l0_db, fading.d0);
  return std::pow(10.0, snr_db / 10.0) * sigma2 / gain;
}

namespace {

Eigen::Vector3d json_point(const nlohmann::json& j, const Eigen::Vector3d& fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("plan: coordinates must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

bool is_fast_scheme(const std::string& name) { return name.rfind("FAST-", 0) == 0; }

void check_scheme_name(const std::string& name) {
  if (is_fast_scheme(name))
    (void)mode_from_name(name.substr(5));
  else
    (void)scheme_from_name(name);
}

} // namespace

ExperimentPlan load_plan(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::invalid_argument("plan: cannot open " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("plan: " + std::string(e.what()));
  }

  ExperimentPlan plan;
  if (j.contains("system")) {
    const auto& s = j["system"];
    plan.base.nt = s.value("nt", plan.base.nt);
    plan.base.n_users = s.value("n_users", plan.base.n_users);
    plan.base.pt = s.value("pt", plan.base.pt);
    plan.base.sigma2 = s.value("sigma2", plan.base.sigma2);
    plan.base.relay_power_factor = s.value("relay_power_factor", plan.base.relay_power_factor);
    plan.base.omega_si2 = s.value("omega_si2", plan.base.omega_si2);
  }
  if (j.contains("fading")) {
    const auto& f = j["fading"];
    plan.fading.l0_db = f.value("l0_db", plan.fading.l0_db);
    plan.fading.d0 = f.value("d0", plan.fading.d0);
    plan.fading.alpha_bu = f.value("alpha_bu", plan.fading.alpha_bu);
    plan.fading.alpha_br = f.value("alpha_br", plan.fading.alpha_br);
    plan.fading.alpha_ru = f.value("alpha_ru", plan.fading.alpha_ru);
    plan.fading.alpha_uu = f.value("alpha_uu", plan.fading.alpha_uu);
    plan.fading.rician_k_db = f.value("rician_k_db", plan.fading.rician_k_db);
    plan.fading.sigma2_relay = f.value("sigma2_relay", plan.fading.sigma2_relay);
    plan.fading.sigma2_dest = f.value("sigma2_dest", plan.fading.sigma2_dest);
    plan.fading.sigma2_uu = f.value("sigma2_uu", plan.fading.sigma2_uu);
  }
  plan.bs = json_point(j.value("bs", nlohmann::json()), plan.bs);
  plan.ris = json_point(j.value("ris", nlohmann::json()), plan.ris);
  plan.radius = j.value("radius", plan.radius);
  plan.n_relays = j.value("n_relays", plan.n_relays);
  plan.sweep = j.value("sweep", plan.sweep);
  if (j.contains("values")) plan.values = j["values"].get<std::vector<double>>();
  plan.fixed_n = j.value("fixed_n", plan.fixed_n);
  plan.snr_db = j.value("snr_db", plan.snr_db);
  plan.use_snr_preset = j.value("use_snr_preset", plan.use_snr_preset);
  if (j.contains("schemes")) plan.schemes = j["schemes"].get<std::vector<std::string>>();
  plan.seed_base = j.value("seed_base", plan.seed_base);
  plan.n_seeds = j.value("n_seeds", plan.n_seeds);
  if (j.contains("options")) {
    const auto& o = j["options"];
    plan.options.eps_outer = o.value("eps_outer", plan.options.eps_outer);
    plan.options.max_outer = o.value("max_outer", plan.options.max_outer);
    plan.options.eps_inner = o.value("eps_inner", plan.options.eps_inner);
    plan.options.max_inner = o.value("max_inner", plan.options.max_inner);
    plan.options.penalty_init = o.value("penalty_init", plan.options.penalty_init);
    plan.options.penalty_max = o.value("penalty_max", plan.options.penalty_max);
    plan.options.reduced_simple = o.value("reduced_simple", plan.options.reduced_simple);
  }
  plan.output = j.value("output", plan.output);

  if (plan.sweep != "N" && plan.sweep != "SNR")
    throw std::invalid_argument("plan: sweep must be \"N\" or \"SNR\"");
  if (plan.values.empty()) throw std::invalid_argument("plan: empty sweep values");
  if (plan.schemes.empty()) throw std::invalid_argument("plan: empty scheme list");
  if (plan.n_seeds < 1) throw std::invalid_argument("plan: n_seeds must be positive");
  for (const auto& s : plan.schemes) {
    try {
      check_scheme_name(s);
    } catch (const std::exception&) {
      throw std::invalid_argument("plan: unknown scheme " + s);
    }
  }
  return plan;
}

ResultRow run_cell(const ExperimentPlan& plan, const std::string& scheme, double value,
                   std::uint64_t seed, RunRecord* record) {
  ResultRow row;
  row.scheme = scheme;
  row.value = value;
  row.seed = seed;
  try {
    SystemConfig cfg = plan.base;
    cfg.relays.clear();
    cfg.reflect_side.clear();
    cfg.n_elements =
        plan.sweep == "N" ? static_cast<int>(std::lround(value)) : plan.fixed_n;
    const double snr_db = plan.sweep == "SNR" ? value : plan.snr_db;

    const Geometry geom = make_geometry(cfg.n_users, seed, plan.bs, plan.ris, plan.radius);
    if (plan.use_snr_preset) cfg.pt = pt_for_snr_db(snr_db, cfg.sigma2, geom, plan.fading);

    // probe pass ranks users before roles exist; same seed keeps draws aligned
    ChannelSet ch = generate(cfg, geom, plan.fading, seed);
    group_users(cfg, geom, ch, plan.n_relays);
    ch = generate(cfg, geom, plan.fading, seed);

    RunRecord rec;
    if (is_fast_scheme(scheme))
      rec = fast_optimize(cfg, mode_from_name(scheme.substr(5)), ch, seed, plan.options);
    else
      rec = evaluate_scheme(cfg, scheme_from_name(scheme), ch, seed, plan.options);

    row.objective = rec.objective;
    row.wall_ms = rec.wall_ms;
    row.iterations = rec.outer_iterations;
    row.status = "ok";
    row.power_slack = rec.report.power_slack;
    row.surface_violation = rec.report.surface_violation;
    row.binary_violation = rec.report.binary_violation;
    row.time_violation = rec.report.time_violation;
    row.commonrate_slack = rec.report.commonrate_slack;
    if (record) *record = rec;
  } catch (const std::exception& e) {
    std::string what = e.what();
    for (char& c : what)
      if (c == ',' || c == '\n') c = ';';
    row.status = "failed:" + what;
  }
  return row;
}

namespace {

constexpr const char* kCsvHeader =
    "cell,scheme,value,seed,objective,wall_ms,iterations,status,power_slack,"
    "surface_violation,binary_violation,time_violation,commonrate_slack";

std::string csv_line(const ResultRow& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.cell << ',' << r.scheme << ',' << r.value << ',' << r.seed << ','
     << r.objective << ',' << r.wall_ms << ',' << r.iterations << ',' << r.status << ','
     << r.power_slack << ',' << r.surface_violation << ',' << r.binary_violation << ','
     << r.time_violation << ',' << r.commonrate_slack;
  return os.str();
}

ResultRow parse_line(const std::string& line) {
  std::vector<std::string> f;
  std::string tok;
  std::istringstream is(line);
  while (std::getline(is, tok, ',')) f.push_back(tok);
  if (f.size() != 13) throw std::invalid_argument("results: malformed row: " + line);
  ResultRow r;
  r.cell = std::stoi(f[0]);
  r.scheme = f[1];
  r.value = std::stod(f[2]);
  r.seed = std::stoull(f[3]);
  r.objective = std::stod(f[4]);
  r.wall_ms = std::stod(f[5]);
  r.iterations = std::stoi(f[6]);
  r.status = f[7];
  r.power_slack = std::stod(f[8]);
  r.surface_violation = std::stod(f[9]);
  r.binary_violation = std::stod(f[10]);
  r.time_violation = std::stod(f[11]);
  r.commonrate_slack = std::stod(f[12]);
  return r;
}

} // namespace

void ResultTable::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("results: cannot write " + path);
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
}

ResultTable ResultTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("results: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("results: unexpected header in " + path);
  ResultTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(parse_line(line));
  }
  return t;
}

namespace {

struct Cell {
  int index;
  std::string scheme;
  double value;
  std::uint64_t seed;
};

int worker_count(std::size_t cells) {
  int n = 1;
  if (const char* env = std::getenv("STARCRS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<int>(v);
  }
  return std::max(1, std::min<int>(n, static_cast<int>(cells)));
}

} // namespace

ResultTable run_plan(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  int index = 0;
  for (double value : plan.values)
    for (const auto& scheme : plan.schemes)
      for (int i = 0; i < plan.n_seeds; ++i)
        cells.push_back({index++, scheme, value, plan.seed_base + std::uint64_t(i)});

  // resume: cells already on disk are kept verbatim, finished ones get appended
  ResultTable done;
  std::map<std::tuple<std::string, double, std::uint64_t>, ResultRow> have;
  if (std::ifstream(plan.output).good()) {
    done = ResultTable::load_csv(plan.output);
    for (const auto& r : done.rows) have.emplace(std::tie(r.scheme, r.value, r.seed), r);
  }

  std::vector<Cell> pending;
  for (const auto& c : cells)
    if (!have.count({c.scheme, c.value, c.seed})) pending.push_back(c);

  std::ofstream appender;
  if (!pending.empty()) {
    const bool fresh = have.empty();
    appender.open(plan.output, fresh ? std::ios::trunc : std::ios::app);
    if (!appender) throw std::runtime_error("results: cannot write " + plan.output);
    if (fresh) appender << kCsvHeader << '\n';
  }

  std::mutex sink;
  std::atomic<std::size_t> next{0};
  std::vector<ResultRow> fresh_rows(pending.size());
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const Cell& c = pending[i];
      ResultRow row = run_cell(plan, c.scheme, c.value, c.seed);
      row.cell = c.index;
      std::lock_guard<std::mutex> lock(sink);
      fresh_rows[i] = row;
      appender << csv_line(row) << '\n';
      appender.flush();
    }
  };
  const int workers = worker_count(pending.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ResultTable table;
  for (const auto& r : done.rows) table.rows.push_back(r);
  for (const auto& r : fresh_rows) table.rows.push_back(r);
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.cell < b.cell; });
  // canonical order on disk so resumed and uninterrupted runs match exactly
  table.save_csv(plan.output);
  return table;
}

std::vector<SummaryRow> summarize(const ResultTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("summarize: empty table");
  std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> groups;
  for (const auto& r : table.rows)
    if (r.status == "ok") groups[{r.scheme, r.value}].push_back(&r);

  std::vector<SummaryRow> out;
  for (const auto& [key, rows] : groups) {
    SummaryRow s;
    s.scheme = key.first;
    s.value = key.second;
    s.n = static_cast<int>(rows.size());
    for (const auto* r : rows) {
      s.mean += r->objective;
      s.mean_wall_ms += r->wall_ms;
    }
    s.mean /= s.n;
    s.mean_wall_ms /= s.n;
    if (s.n > 1) {
      double ss = 0;
      for (const auto* r : rows) ss += (r->objective - s.mean) * (r->objective - s.mean);
      s.stddev = std::sqrt(ss / (s.n - 1));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<GainRow> relative_gain(const ResultTable& a, const std::string& scheme_a,
                                   const ResultTable& b, const std::string& scheme_b) {
  std::map<std::pair<double, std::uint64_t>, double> base;
  for (const auto& r : b.rows)
    if (r.scheme == scheme_b && r.status == "ok") base[{r.value, r.seed}] = r.objective;

  std::map<double, GainRow> by_value;
  for (const auto& r : a.rows) {
    if (r.scheme != scheme_a || r.status != "ok") continue;
    const auto it = base.find({r.value, r.seed});
    if (it == base.end() || it->second <= 0.0) continue;
    auto& g = by_value[r.value];
    g.value = r.value;
    g.pairs += 1;
    g.mean_gain += r.objective / it->second - 1.0;
  }
  std::vector<GainRow> out;
  for (auto& [value, g] : by_value) {
    g.mean_gain /= g.pairs;
    out.push_back(g);
  }
  return out;
}

} // namespace starcrs
