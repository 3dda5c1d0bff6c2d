#pragma once

#include "starcrs/baselines.hpp"

namespace starcrs {

// SNR preset: "SNR" is the mean direct-link SNR of a unit-variance user at the
// user-circle center; maps to a transmit power for the given noise floor.
double pt_for_snr_db(double snr_db, double sigma2, const Geometry& geom,
                     const FadingParams& fading);

struct ExperimentPlan {
  SystemConfig base;   // nt, n_users, sigma2, omega_si2, relay_power_factor
  FadingParams fading;
  Eigen::Vector3d bs{0, 0, 0};
  Eigen::Vector3d ris{0, 50, 0};
  double radius = 5.0;
  int n_relays = 1;

  std::string sweep = "N"; // "N" or "SNR"
  std::vector<double> values;
  int fixed_n = 16;        // surface size when sweeping SNR
  double snr_db = 20.0;    // preset when sweeping N
  bool use_snr_preset = true;

  // Scheme names (see scheme_spec), or "FAST-<mode>" for the low-complexity path.
  std::vector<std::string> schemes;
  std::uint64_t seed_base = 1;
  int n_seeds = 10;

  AOOptions options;
  std::string output = "results.csv";
};

ExperimentPlan load_plan(const std::string& json_path);

struct ResultRow {
  int cell = 0;
  std::string scheme;
  double value = 0; // sweep value (N or SNR dB)
  std::uint64_t seed = 0;
  double objective = 0;
  double wall_ms = 0;
  int iterations = 0;
  std::string status; // "ok" or "failed:<what>"
  double power_slack = 0, surface_violation = 0, binary_violation = 0,
         time_violation = 0, commonrate_slack = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  void save_csv(const std::string& path) const;
  static ResultTable load_csv(const std::string& path);
};

// Runs every (scheme, value, seed) cell; cell seeds are seed_base + seed index
// so paired comparisons share channel draws. Appends each finished cell to
// plan.output and skips cells already present, so interrupted runs resume to
// an identical table. Worker count from STARCRS_WORKERS (default 1).
ResultTable run_plan(const ExperimentPlan& plan);

// Evaluate one cell in-process (used by run_plan and the CLI `run` command).
ResultRow run_cell(const ExperimentPlan& plan, const std::string& scheme,
                   double value, std::uint64_t seed, RunRecord* record = nullptr);

struct SummaryRow {
  std::string scheme;
  double value = 0;
  int n = 0;
  double mean = 0, stddev = 0, mean_wall_ms = 0;
};
std::vector<SummaryRow> summarize(const ResultTable& table);

// Mean over paired (value, seed) cells of objective(a)/objective(b) - 1.
struct GainRow {
  double value = 0;
  int pairs = 0;
  double mean_gain = 0;
};
std::vector<GainRow> relative_gain(const ResultTable& a, const std::string& scheme_a,
                                   const ResultTable& b, const std::string& scheme_b);

} // namespace starcrs
