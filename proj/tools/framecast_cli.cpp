#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "framecast/baselines.hpp"
#include "framecast/channel.hpp"
#include "framecast/harness.hpp"

namespace {

int cmd_run(const std::string& plan_path, const std::string& config_path,
            const std::string& seeds, long steps, int eval_period,
            const std::string& algos, const std::string& n_vr,
            const std::string& out_dir, int workers, bool no_timing) {
  framecast::ExperimentPlan plan;
  if (!plan_path.empty()) plan = framecast::load_plan(plan_path);
  if (!config_path.empty()) plan.config_path = config_path;
  if (!seeds.empty()) plan.seeds = framecast::parse_seed_list(seeds);
  if (steps > 0) plan.total_steps = steps;
  if (eval_period > 0) plan.eval_period = eval_period;
  if (!algos.empty()) {
    plan.algorithms.clear();
    std::string item;
    for (char c : algos + ",") {
      if (c == ',') {
        if (!item.empty()) plan.algorithms.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
  }
  if (!n_vr.empty()) plan.n_vr_values = framecast::parse_int_list(n_vr);
  if (!out_dir.empty()) plan.out_dir = out_dir;
  if (workers > 0) plan.workers = workers;
  if (no_timing) plan.measure_timing = false;

  framecast::PlanResult result = framecast::run_plan(plan);
  int ok = 0, failed = 0;
  for (const auto& cell : result.cells) {
    cell.ok ? ++ok : ++failed;
    if (!cell.ok) {
      std::fprintf(stderr, "cell vr%d/%s/seed%llu failed: %s\n", cell.n_vr,
                   cell.algo.c_str(), static_cast<unsigned long long>(cell.seed),
                   cell.error.c_str());
    }
  }
  std::printf("plan finished: %d cell(s) ok, %d failed, results in %s\n", ok, failed,
              plan.out_dir.c_str());
  return failed == 0 ? 0 : 2;
}

int cmd_summarize(const std::string& result_dir, const std::string& csv_out) {
  auto reports = framecast::summarize(result_dir);
  std::fputs(framecast::format_summary(reports).c_str(), stdout);
  std::string path = csv_out.empty() ? result_dir + "/summary.csv" : csv_out;
  framecast::write_summary_csv(reports, path);
  std::printf("summary written to %s\n", path.c_str());
  return 0;
}

int cmd_oracle(const std::string& config_path, double power, long samples,
               const std::string& band) {
  framecast::ScenarioConfig config;
  if (!config_path.empty()) {
    config = framecast::load_run_config(config_path).first;
  }
  if (power <= 0.0) power = config.p_max / config.n_users;
  auto users = framecast::build_scenario(config);
  auto prob = framecast::failure_probability_oracle(config, power, samples);
  std::printf("per-frame failure probability at %.6g W per user (%ld samples):\n",
              power, samples);
  for (std::size_t n = 0; n < prob.size(); ++n) {
    std::printf("  user %zu (%s, %.1f m): %.4f\n", n,
                users[n].mode == 1 ? "vr" : "non-vr", users[n].distance, prob[n]);
  }
  if (!band.empty()) {
    double lo = 0.0, hi = 1.0;
    if (std::sscanf(band.c_str(), "%lf,%lf", &lo, &hi) != 2) {
      std::fprintf(stderr, "bad --band, expected 'lo,hi'\n");
      return 1;
    }
    for (std::size_t n = 0; n < prob.size(); ++n) {
      if (prob[n] < lo || prob[n] > hi) {
        std::printf("user %zu outside band [%.4g, %.4g]\n", n, lo, hi);
        return 1;
      }
    }
    std::printf("all users inside band [%.4g, %.4g]\n", lo, hi);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-slotted 360-video downlink simulator and PPO trainer"};
  app.require_subcommand(1);

  std::string plan_path, config_path, seeds, algos, n_vr, out_dir;
  long steps = 0;
  int eval_period = 0, workers = 0;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "run an experiment plan");
  run->add_option("plan", plan_path, "plan file (key = value)");
  run->add_option("--config", config_path, "scenario/trainer config file");
  run->add_option("--seeds", seeds, "comma list or a-b range");
  run->add_option("--steps", steps, "training steps per cell");
  run->add_option("--eval-period", eval_period, "evaluation period in steps");
  run->add_option("--algo", algos, "comma list: sido,mido,standard_ppo,average");
  run->add_option("--n-vr", n_vr, "comma list of VR-user counts");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "parallel cell workers");
  run->add_flag("--no-timing", no_timing, "skip the timing report");

  std::string result_dir, csv_out;
  auto* summ = app.add_subcommand("summarize", "summarize a result directory");
  summ->add_option("dir", result_dir, "result directory")->required();
  summ->add_option("--out", csv_out, "summary csv path");

  std::string oracle_config, band;
  double power = 0.0;
  long samples = 100000;
  auto* oracle = app.add_subcommand("oracle", "Monte Carlo failure-probability check");
  oracle->add_option("--config", oracle_config, "scenario config file");
  oracle->add_option("--power", power, "per-user power in W (default p_max/N)");
  oracle->add_option("--samples", samples, "Monte Carlo samples");
  oracle->add_option("--band", band, "acceptance band 'lo,hi'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(plan_path, config_path, seeds, steps, eval_period, algos, n_vr,
                     out_dir, workers, no_timing);
    }
    if (summ->parsed()) return cmd_summarize(result_dir, csv_out);
    if (oracle->parsed()) return cmd_oracle(oracle_config, power, samples, band);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
