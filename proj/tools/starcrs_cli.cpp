#include "starcrs/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace starcrs;

namespace {

// flag overrides applied on top of the plan file
struct PlanArgs {
  std::string plan_path;
  std::string output;
  std::string schemes;  // comma-separated
  std::string values;   // comma-separated
  int n_seeds = -1;
  long long seed_base = -1;
};

void add_plan_options(CLI::App* cmd, PlanArgs& args) {
  cmd->add_option("--plan", args.plan_path, "experiment plan (json)")->required();
  cmd->add_option("--output", args.output, "override the plan's output csv");
  cmd->add_option("--schemes", args.schemes, "override schemes (comma-separated)");
  cmd->add_option("--values", args.values, "override sweep values (comma-separated)");
  cmd->add_option("--n-seeds", args.n_seeds, "override the seed count");
  cmd->add_option("--seed-base", args.seed_base, "override the first seed");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

ExperimentPlan effective_plan(const PlanArgs& args) {
  ExperimentPlan plan = load_plan(args.plan_path);
  if (!args.output.empty()) plan.output = args.output;
  if (!args.schemes.empty()) plan.schemes = split_list(args.schemes);
  if (!args.values.empty()) {
    plan.values.clear();
    for (const auto& v : split_list(args.values)) plan.values.push_back(std::stod(v));
  }
  if (args.n_seeds >= 0) plan.n_seeds = args.n_seeds;
  if (args.seed_base >= 0) plan.seed_base = std::uint64_t(args.seed_base);
  if (plan.values.empty() || plan.schemes.empty() || plan.n_seeds < 1)
    throw std::invalid_argument("plan: overrides left an empty sweep");
  return plan;
}

void print_row(const ResultRow& row) {
  std::printf("%-10s value=%-8g seed=%-4llu objective=%-12.6f wall_ms=%-10.1f %s\n",
              row.scheme.c_str(), row.value, (unsigned long long)row.seed, row.objective,
              row.wall_ms, row.status.c_str());
}

// channel construction for one cell, identical to what run_cell solves on
ChannelSet cell_channels(const ExperimentPlan& plan, double value, std::uint64_t seed,
                         SystemConfig& cfg) {
  cfg = plan.base;
  cfg.n_elements = plan.sweep == "N" ? (int)std::lround(value) : plan.fixed_n;
  const double snr_db = plan.sweep == "SNR" ? value : plan.snr_db;
  const Geometry geom = make_geometry(cfg.n_users, seed, plan.bs, plan.ris, plan.radius);
  if (plan.use_snr_preset) cfg.pt = pt_for_snr_db(snr_db, cfg.sigma2, geom, plan.fading);
  ChannelSet ch = generate(cfg, geom, plan.fading, seed);
  group_users(cfg, geom, ch, plan.n_relays);
  return generate(cfg, geom, plan.fading, seed);
}

int cmd_run(const PlanArgs& args, const std::string& scheme, double value,
            std::uint64_t seed, const std::string& record_path) {
  const ExperimentPlan plan = effective_plan(args);
  RunRecord rec;
  const ResultRow row = run_cell(plan, scheme, value, seed, &rec);
  print_row(row);
  if (!record_path.empty() && row.status == "ok") {
    std::ofstream out(record_path);
    if (!out) throw std::invalid_argument("cannot write " + record_path);
    out << rec.to_json() << '\n';
  }
  return 0;
}

int cmd_sweep(const PlanArgs& args) {
  const ExperimentPlan plan = effective_plan(args);
  const ResultTable table = run_plan(plan);
  for (const auto& row : table.rows)
    if (row.status != "ok") print_row(row);
  std::printf("%-10s %-8s %-4s %-12s %-12s %s\n", "scheme", "value", "n", "mean", "stddev",
              "mean_wall_ms");
  for (const auto& s : summarize(table))
    std::printf("%-10s %-8g %-4d %-12.6f %-12.6f %.1f\n", s.scheme.c_str(), s.value, s.n,
                s.mean, s.stddev, s.mean_wall_ms);
  std::printf("results: %s\n", plan.output.c_str());
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& scheme_a,
                const std::string& path_b, const std::string& scheme_b) {
  const ResultTable a = ResultTable::load_csv(path_a);
  const ResultTable b = ResultTable::load_csv(path_b);
  const auto gains = relative_gain(a, scheme_a, b, scheme_b);
  if (gains.empty()) throw std::invalid_argument("compare: no paired cells");
  std::printf("%-8s %-6s gain(%s over %s)\n", "value", "pairs", scheme_a.c_str(),
              scheme_b.c_str());
  for (const auto& g : gains)
    std::printf("%-8g %-6d %+.1f%%\n", g.value, g.pairs, 100.0 * g.mean_gain);
  return 0;
}

int cmd_export(const PlanArgs& args, double value, std::uint64_t seed,
               const std::string& out_path) {
  const ExperimentPlan plan = effective_plan(args);
  SystemConfig cfg;
  const ChannelSet ch = cell_channels(plan, value, seed, cfg);
  save_channels_file(out_path, ch);
  std::printf("wrote %s: E %ldx%ld, %zu users, pt=%g\n", out_path.c_str(), (long)ch.E.rows(),
              (long)ch.E.cols(), ch.g.size(), cfg.pt);
  return 0;
}

int cmd_import(const std::string& in_path) {
  const ChannelSet ch = load_channels_file(in_path);
  std::printf("%s: E %ldx%ld, %zu users, surface links %ld\n", in_path.c_str(),
              (long)ch.E.rows(), (long)ch.E.cols(), ch.g.size(),
              ch.h.empty() ? 0L : (long)ch.h[0].size());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-min fair optimizer for surface-assisted cooperative rate splitting"};
  app.require_subcommand(1);

  PlanArgs args;
  std::string scheme = "CRS-FE", record_path, out_path = "channels.txt", in_path;
  std::string path_a, path_b, scheme_a, scheme_b;
  double value = 16;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "run one (scheme, value, seed) cell");
  add_plan_options(run, args);
  run->add_option("--scheme", scheme, "scheme name or FAST-<mode>");
  run->add_option("--value", value, "sweep value (N or SNR dB)");
  run->add_option("--seed", seed, "channel seed");
  run->add_option("--record", record_path, "write the full run record (json)");

  auto* sweep = app.add_subcommand("sweep", "run the whole plan with resume");
  add_plan_options(sweep, args);

  auto* compare = app.add_subcommand("compare", "relative gain between two result tables");
  compare->add_option("--a", path_a, "first results csv")->required();
  compare->add_option("--scheme-a", scheme_a, "scheme in the first table")->required();
  compare->add_option("--b", path_b, "second results csv")->required();
  compare->add_option("--scheme-b", scheme_b, "scheme in the second table")->required();

  auto* exp = app.add_subcommand("export-channels", "write one cell's channels as text");
  add_plan_options(exp, args);
  exp->add_option("--value", value, "sweep value (N or SNR dB)");
  exp->add_option("--seed", seed, "channel seed");
  exp->add_option("--out", out_path, "destination file");

  auto* imp = app.add_subcommand("import-channels", "validate and describe a channel file");
  imp->add_option("--in", in_path, "channel file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(args, scheme, value, seed, record_path);
    if (sweep->parsed()) return cmd_sweep(args);
    if (compare->parsed()) return cmd_compare(path_a, scheme_a, path_b, scheme_b);
    if (exp->parsed()) return cmd_export(args, value, seed, out_path);
    if (imp->parsed()) return cmd_import(in_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
