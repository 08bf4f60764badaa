#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "framecast/config.hpp"
#include "framecast/ppo.hpp"

namespace framecast {

/// A sweep over VR-user counts, algorithms and global seeds.
struct ExperimentPlan {
  std::string config_path;             // empty = built-in defaults
  std::vector<int> n_vr_values;        // scenario sweep
  std::vector<std::string> algorithms; // sido | mido | standard_ppo | average
  std::vector<std::uint64_t> seeds;
  long total_steps = 500000;
  int eval_period = 50;
  std::string out_dir = "results";
  int workers = 1;
  bool measure_timing = true;

  void validate() const;
};

/// Plan file: flat key-value. Keys: config, n_vr, algos, seeds, steps,
/// eval_period, out, workers, timing. Lists are comma-separated; seeds
/// also accept "a-b" ranges.
ExperimentPlan load_plan(const std::string& path);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

/// Trainer hyperparameters read from the same config file as the
/// scenario (keys: gamma, lambda, clip, epochs_per_batch, rollout,
/// minibatch, target_update_period, actor_lr, critic_lr, hidden,
/// sido_shared_trunk, eval_episodes).
TrainerParams trainer_params_from_kv(const std::map<std::string, std::string>& kv);
std::vector<std::string> trainer_param_keys();

/// Loads scenario + trainer params from one file (defaults when empty).
std::pair<ScenarioConfig, TrainerParams> load_run_config(const std::string& path);

struct CellResult {
  int n_vr = 0;
  std::string algo;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string log_path;
};

struct PlanResult {
  std::vector<CellResult> cells;
  bool all_ok() const;
};

/// Runs every (scenario, algorithm, seed) cell, writing one training
/// log per cell, one aggregate per (scenario, algorithm), and one
/// timing file per scenario. Cell failures are recorded and the plan
/// continues.
PlanResult run_plan(const ExperimentPlan& plan);

struct MetricVector {
  double reward_total = 0.0;
  double reward_non = 0.0;
  double reward_vr = 0.0;
  double fps_non = 0.0;
  double fps_vr = 0.0;
  double delay_std_vr = 0.0;
  double episode_length = 0.0;
};

struct AggregatePoint {
  long step = 0;
  MetricVector mean;
  MetricVector stddev;  // sample std across seeds
};

/// Pointwise mean/std across per-seed logs (logs must share the same
/// evaluation steps).
std::vector<AggregatePoint> aggregate_logs(const std::vector<TrainingLog>& logs);
void write_aggregate_csv(const std::vector<AggregatePoint>& agg,
                         const std::string& path);
std::vector<AggregatePoint> read_aggregate_csv(const std::string& path);

struct TimingRow {
  std::string algo;
  double train_step_seconds = 0.0;  // median single update phase
  double exec_step_seconds = 0.0;   // median single policy step
};

/// Median single-step train and execution wall-clock per algorithm at
/// the given scenario.
std::vector<TimingRow> measure_timing(const ScenarioConfig& config,
                                      const TrainerParams& params,
                                      const std::vector<std::string>& algorithms,
                                      int n_updates = 100, long n_exec_steps = 10000);
void write_timing_csv(const std::vector<TimingRow>& rows, const std::string& path);
std::vector<TimingRow> read_timing_csv(const std::string& path);

struct AlgoFinal {
  std::string algo;
  MetricVector final_mean;  // over the last 10% of evaluation points
};

struct ScenarioReport {
  int n_vr = 0;
  std::vector<AlgoFinal> finals;
};

/// Reads a result directory produced by run_plan and reduces each
/// (scenario, algorithm) to final-window means.
std::vector<ScenarioReport> summarize(const std::string& result_dir);

/// Relative improvement (x - y) / |y|; a negative delay-std improvement
/// means less cybersickness.
double relative_improvement(double x, double y);

/// Human-readable comparison table with pairwise relative improvements.
std::string format_summary(const std::vector<ScenarioReport>& reports);
void write_summary_csv(const std::vector<ScenarioReport>& reports,
                       const std::string& path);

}  // namespace framecast
