#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "psse/dynamics.hpp"
#include "psse/ekf.hpp"
#include "psse/grid.hpp"
#include "psse/mhe.hpp"
#include "psse/types.hpp"

namespace psse {

// Raised for malformed or inconsistent scenario files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transition matrices from the config: one diagonal applied at every step,
// or one diagonal per step.
struct TransitionSpec {
  bool constant = true;
  std::vector<CVector> diagonals;  // one entry when constant

  std::vector<CMatrix> materialize(int steps) const;  // F_0 .. F_{steps-2}
};

struct ScenarioConfig {
  std::string grid_path;  // resolved against the config file's directory
  GridModel grid;
  MeasurementPlan plan;
  TransitionSpec transition;
  NoiseModel noise;
  int horizon = 40;  // number of time points, k = 0..horizon-1
  int window = 2;
  double mu = 1.0;
  double lambda = 0.0075;
  int replications = 100;
  std::uint64_t base_seed = 1;
  std::vector<std::string> estimators;  // subset of {"mhe", "ekf"}, run order
  std::string output_dir = "out";
  SolverConfig solver;
  ExtractionMethod extraction = ExtractionMethod::kEigen;
  int randomized_count = 100;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;  // throws ConfigError
  MheConfig mhe_config() const;
};

// Strict parse: unknown keys anywhere are an error.
ScenarioConfig load_scenario(const std::string& path);

// Per-time-step error ||estimate_k - truth_k|| / sqrt(N) after both are
// phase-aligned to the reference bus. Sequences must have equal length.
RVector rmse_series(const std::vector<CVector>& truth, const std::vector<CVector>& estimates,
                    int reference_bus);

// Root of the per-time mean of squared per-replication values, skipping
// excluded (diverged) replications. Returns zeros when all are excluded.
RVector aggregate_rmse(const std::vector<RVector>& per_replication,
                       const std::vector<char>& excluded);

struct ReplicationRecord {
  Trajectory trajectory;
  // Per estimator: estimates for k = first_k..K.
  std::map<std::string, std::vector<CVector>> estimates;
  std::map<std::string, char> diverged;
  std::map<std::string, double> mean_window_seconds;
  std::map<std::string, RVector> rmse;  // per-k, empty when diverged
};

struct RunResult {
  ScenarioConfig config;
  int first_k = 0;
  std::vector<ReplicationRecord> replications;
  std::map<std::string, RVector> rmse;             // aggregate per estimator
  std::map<std::string, double> mean_rmse;         // time average of the aggregate
  std::map<std::string, double> divergence_rate;
  std::map<std::string, double> mean_window_seconds;
};

// Simulates and runs every configured estimator on `replications`
// independent trajectories (seed = base_seed + index), in parallel, and
// aggregates. Divergence (a non-finite estimate) never aborts the run.
RunResult run_scenario(const ScenarioConfig& cfg);

// Writes rmse.csv, summary.csv, per-bus trajectory files, replication and
// first-replication dumps into `dir` (created if needed).
void emit_reports(const RunResult& result, const std::string& dir);

}  // namespace psse
