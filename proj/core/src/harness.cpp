#include "framecast/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "framecast/baselines.hpp"

namespace framecast {

namespace fs = std::filesystem;

void ExperimentPlan::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid plan: ") + what);
  };
  require(!n_vr_values.empty(), "n_vr list is empty");
  require(!algorithms.empty(), "algorithm list is empty");
  require(!seeds.empty(), "seed list is empty");
  std::vector<std::uint64_t> s = seeds;
  std::sort(s.begin(), s.end());
  require(std::adjacent_find(s.begin(), s.end()) == s.end(), "seeds must be distinct");
  require(total_steps >= 1, "steps must be >= 1");
  require(eval_period >= 1, "eval_period must be >= 1");
  require(!out_dir.empty(), "out directory is empty");
  require(workers >= 1, "workers must be >= 1");
  for (const std::string& a : algorithms) {
    require(a == "sido" || a == "mido" || a == "standard_ppo" || a == "average",
            "algorithms must be sido|mido|standard_ppo|average");
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      std::uint64_t lo = std::stoull(item.substr(0, dash));
      std::uint64_t hi = std::stoull(item.substr(dash + 1));
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(std::stoull(item));
    }
  }
  return out;
}

namespace {

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

ExperimentPlan load_plan(const std::string& path) {
  auto kv = parse_kv_file(path);
  ExperimentPlan plan;
  for (const auto& [key, value] : kv) {
    if (key == "config") plan.config_path = value;
    else if (key == "n_vr") plan.n_vr_values = parse_int_list(value);
    else if (key == "algos") plan.algorithms = parse_string_list(value);
    else if (key == "seeds") plan.seeds = parse_seed_list(value);
    else if (key == "steps") plan.total_steps = std::stol(value);
    else if (key == "eval_period") plan.eval_period = std::stoi(value);
    else if (key == "out") plan.out_dir = value;
    else if (key == "workers") plan.workers = std::stoi(value);
    else if (key == "timing") plan.measure_timing = std::stoi(value) != 0;
    else throw std::invalid_argument("invalid plan: unknown key '" + key + "'");
  }
  // Relative config paths resolve against the plan file location.
  if (!plan.config_path.empty() && fs::path(plan.config_path).is_relative()) {
    fs::path base = fs::path(path).parent_path();
    if (!base.empty()) plan.config_path = (base / plan.config_path).string();
  }
  plan.validate();
  return plan;
}

std::vector<std::string> trainer_param_keys() {
  return {"gamma",        "lambda",   "clip",
          "epochs_per_batch", "rollout",  "minibatch",
          "target_update_period", "actor_lr", "critic_lr",
          "hidden",       "critic_hidden", "sido_shared_trunk", "eval_episodes",
          "normalize_advantages", "per_group_advantage_norm"};
}

TrainerParams trainer_params_from_kv(const std::map<std::string, std::string>& kv) {
  TrainerParams p;
  auto get = [&kv](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("gamma")) p.gamma = std::stod(*v);
  if (auto* v = get("lambda")) p.lambda = std::stod(*v);
  if (auto* v = get("clip")) p.clip = std::stod(*v);
  if (auto* v = get("epochs_per_batch")) p.epochs_per_batch = std::stoi(*v);
  if (auto* v = get("rollout")) p.rollout_length = std::stoi(*v);
  if (auto* v = get("minibatch")) p.minibatch_size = std::stoi(*v);
  if (auto* v = get("target_update_period")) p.target_update_period = std::stoi(*v);
  if (auto* v = get("actor_lr")) p.actor_lr = std::stod(*v);
  if (auto* v = get("critic_lr")) p.critic_lr = std::stod(*v);
  if (auto* v = get("hidden")) p.hidden_sizes = parse_int_list(*v);
  if (auto* v = get("critic_hidden")) p.critic_hidden_sizes = parse_int_list(*v);
  if (auto* v = get("sido_shared_trunk")) p.sido_shared_trunk = std::stoi(*v) != 0;
  if (auto* v = get("normalize_advantages")) p.normalize_advantages = std::stoi(*v) != 0;
  if (auto* v = get("per_group_advantage_norm")) p.per_group_advantage_norm = std::stoi(*v) != 0;
  if (auto* v = get("eval_episodes")) p.eval_episodes = std::stoi(*v);
  p.validate();
  return p;
}

std::pair<ScenarioConfig, TrainerParams> load_run_config(const std::string& path) {
  if (path.empty()) return {ScenarioConfig{}, TrainerParams{}};
  auto kv = parse_kv_file(path);
  ScenarioConfig scenario = scenario_from_kv(kv, trainer_param_keys());
  TrainerParams params = trainer_params_from_kv(kv);
  return {scenario, params};
}

bool PlanResult::all_ok() const {
  for (const auto& c : cells) {
    if (!c.ok) return false;
  }
  return true;
}

namespace {

std::string scenario_dir_name(int n_vr) { return "vr" + std::to_string(n_vr); }

TrainingLog run_cell(const ScenarioConfig& base, const TrainerParams& params,
                     const std::string& algo, std::uint64_t seed, long total_steps,
                     int eval_period, const std::string& checkpoint_path) {
  ScenarioConfig config = base;
  config.seed = seed;
  if (algo == "average") {
    return baseline_training_log(config, make_average_policy(config), "average",
                                 total_steps, eval_period, params.eval_episodes,
                                 seed);
  }
  Trainer trainer(config, critic_kind_from_string(algo), params, seed);
  TrainingLog log = trainer.train(total_steps, eval_period);
  if (!checkpoint_path.empty()) trainer.actor().net().save(checkpoint_path);
  return log;
}

}  // namespace

PlanResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  auto [base_config, params] = load_run_config(plan.config_path);

  struct Cell {
    int n_vr;
    std::string algo;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n_vr : plan.n_vr_values) {
    for (const auto& algo : plan.algorithms) {
      for (std::uint64_t seed : plan.seeds) cells.push_back({n_vr, algo, seed});
    }
  }

  fs::create_directories(plan.out_dir);
  for (int n_vr : plan.n_vr_values) {
    for (const auto& algo : plan.algorithms) {
      fs::create_directories(fs::path(plan.out_dir) / scenario_dir_name(n_vr) / algo);
    }
  }

  PlanResult result;
  result.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      CellResult& cr = result.cells[i];
      cr.n_vr = cell.n_vr;
      cr.algo = cell.algo;
      cr.seed = cell.seed;
      fs::path log_path = fs::path(plan.out_dir) / scenario_dir_name(cell.n_vr) /
                          cell.algo / ("seed" + std::to_string(cell.seed) + ".csv");
      cr.log_path = log_path.string();
      try {
        ScenarioConfig config = base_config;
        config.n_vr = cell.n_vr;
        config.validate();
        fs::path ckpt = fs::path(plan.out_dir) / scenario_dir_name(cell.n_vr) /
                        cell.algo /
                        ("actor_seed" + std::to_string(cell.seed) + ".ckpt");
        TrainingLog log = run_cell(config, params, cell.algo, cell.seed,
                                   plan.total_steps, plan.eval_period,
                                   cell.algo == "average" ? "" : ckpt.string());
        write_training_log_csv(log, cr.log_path);
        cr.ok = true;
      } catch (const std::exception& e) {
        cr.ok = false;
        cr.error = e.what();
        std::lock_guard<std::mutex> lock(io_mutex);
        std::ofstream fail(fs::path(plan.out_dir) / "failures.log", std::ios::app);
        fail << scenario_dir_name(cell.n_vr) << "," << cell.algo << ",seed"
             << cell.seed << ": " << e.what() << "\n";
      }
    }
  };
  {
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(plan.workers, static_cast<int>(cells.size()));
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregates from the per-seed logs that succeeded.
  for (int n_vr : plan.n_vr_values) {
    for (const auto& algo : plan.algorithms) {
      std::vector<TrainingLog> logs;
      for (const auto& cr : result.cells) {
        if (cr.n_vr == n_vr && cr.algo == algo && cr.ok) {
          logs.push_back(read_training_log_csv(cr.log_path));
        }
      }
      if (logs.empty()) continue;
      auto agg = aggregate_logs(logs);
      fs::path agg_path = fs::path(plan.out_dir) / scenario_dir_name(n_vr) / algo /
                          "aggregate.csv";
      write_aggregate_csv(agg, agg_path.string());
    }
  }

  if (plan.measure_timing) {
    for (int n_vr : plan.n_vr_values) {
      ScenarioConfig config = base_config;
      config.n_vr = n_vr;
      config.seed = plan.seeds.front();
      auto rows = measure_timing(config, params, plan.algorithms);
      fs::path timing_path =
          fs::path(plan.out_dir) / scenario_dir_name(n_vr) / "timing.csv";
      write_timing_csv(rows, timing_path.string());
    }
  }
  return result;
}

std::vector<AggregatePoint> aggregate_logs(const std::vector<TrainingLog>& logs) {
  if (logs.empty()) throw std::invalid_argument("aggregate_logs: no logs");
  const std::size_t points = logs.front().records.size();
  for (const auto& log : logs) {
    if (log.records.size() != points) {
      throw std::invalid_argument("aggregate_logs: logs have different lengths");
    }
  }
  std::vector<AggregatePoint> agg(points);
  const double n = static_cast<double>(logs.size());
  for (std::size_t p = 0; p < points; ++p) {
    agg[p].step = logs.front().records[p].step;
    auto acc = [&](auto metric_of) {
      double sum = 0.0, sumsq = 0.0;
      for (const auto& log : logs) {
        if (log.records[p].step != agg[p].step) {
          throw std::invalid_argument("aggregate_logs: step grids differ");
        }
        double x = metric_of(log.records[p]);
        sum += x;
        sumsq += x * x;
      }
      double mean = sum / n;
      double var = logs.size() > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0))
                                   : 0.0;
      return std::make_pair(mean, std::sqrt(var));
    };
    auto set = [&](double MetricVector::* field, auto metric_of) {
      auto [m, s] = acc(metric_of);
      agg[p].mean.*field = m;
      agg[p].stddev.*field = s;
    };
    set(&MetricVector::reward_total, [](const EvalRecord& r) { return r.eval_reward_total; });
    set(&MetricVector::reward_non, [](const EvalRecord& r) { return r.eval_reward_non; });
    set(&MetricVector::reward_vr, [](const EvalRecord& r) { return r.eval_reward_vr; });
    set(&MetricVector::fps_non, [](const EvalRecord& r) { return r.fps_non_mean; });
    set(&MetricVector::fps_vr, [](const EvalRecord& r) { return r.fps_vr_mean; });
    set(&MetricVector::delay_std_vr, [](const EvalRecord& r) { return r.delay_std_vr_mean; });
    set(&MetricVector::episode_length, [](const EvalRecord& r) { return r.episode_length_mean; });
  }
  return agg;
}

namespace {

constexpr const char* kAggregateHeader =
    "step,reward_total_mean,reward_total_std,reward_non_mean,reward_non_std,"
    "reward_vr_mean,reward_vr_std,fps_non_mean,fps_non_std,fps_vr_mean,fps_vr_std,"
    "delay_std_vr_mean,delay_std_vr_std,episode_length_mean,episode_length_std";

}  // namespace

void write_aggregate_csv(const std::vector<AggregatePoint>& agg,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write aggregate csv: " + path);
  out << kAggregateHeader << "\n";
  char buf[512];
  for (const auto& p : agg) {
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g,%.10g,%.10g,%.10g\n",
                  p.step, p.mean.reward_total, p.stddev.reward_total,
                  p.mean.reward_non, p.stddev.reward_non, p.mean.reward_vr,
                  p.stddev.reward_vr, p.mean.fps_non, p.stddev.fps_non, p.mean.fps_vr,
                  p.stddev.fps_vr, p.mean.delay_std_vr, p.stddev.delay_std_vr,
                  p.mean.episode_length, p.stddev.episode_length);
    out << buf;
  }
}

std::vector<AggregatePoint> read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open aggregate csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty aggregate csv: " + path);
  std::vector<AggregatePoint> agg;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f;
    AggregatePoint p;
    auto next = [&]() {
      if (!std::getline(ls, f, ',')) {
        throw std::runtime_error("malformed aggregate row in " + path);
      }
      return std::stod(f);
    };
    p.step = static_cast<long>(next());
    p.mean.reward_total = next();
    p.stddev.reward_total = next();
    p.mean.reward_non = next();
    p.stddev.reward_non = next();
    p.mean.reward_vr = next();
    p.stddev.reward_vr = next();
    p.mean.fps_non = next();
    p.stddev.fps_non = next();
    p.mean.fps_vr = next();
    p.stddev.fps_vr = next();
    p.mean.delay_std_vr = next();
    p.stddev.delay_std_vr = next();
    p.mean.episode_length = next();
    p.stddev.episode_length = next();
    agg.push_back(p);
  }
  return agg;
}

std::vector<TimingRow> measure_timing(const ScenarioConfig& config,
                                      const TrainerParams& params,
                                      const std::vector<std::string>& algorithms,
                                      int n_updates, long n_exec_steps) {
  std::vector<TimingRow> rows;
  for (const auto& algo : algorithms) {
    TimingRow row;
    row.algo = algo;
    if (algo == "average") {
      // No training step; execution is the policy table lookup + env step.
      auto policy = make_average_policy(config);
      auto users = build_scenario(config);
      Environment env(config, users, substream_seed(config.seed, "exec-timing"));
      GroupedState state = env.reset();
      std::vector<double> times;
      times.reserve(n_exec_steps);
      for (long i = 0; i < n_exec_steps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Environment::StepResult res = env.step(policy(state));
        auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
        state = res.done ? env.reset() : res.state;
      }
      std::sort(times.begin(), times.end());
      row.train_step_seconds = 0.0;
      row.exec_step_seconds = times.empty() ? 0.0
                              : times.size() % 2 == 1
                                  ? times[times.size() / 2]
                                  : 0.5 * (times[times.size() / 2 - 1] +
                                           times[times.size() / 2]);
    } else {
      ScenarioConfig c = config;
      Trainer trainer(c, critic_kind_from_string(algo), params, config.seed);
      row.train_step_seconds = trainer.median_update_seconds(n_updates);
      row.exec_step_seconds = trainer.median_exec_seconds(n_exec_steps);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_timing_csv(const std::vector<TimingRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write timing csv: " + path);
  out << "algo,train_step_seconds,exec_step_seconds\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6e,%.6e\n", r.algo.c_str(),
                  r.train_step_seconds, r.exec_step_seconds);
    out << buf;
  }
}

std::vector<TimingRow> read_timing_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open timing csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty timing csv: " + path);
  std::vector<TimingRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    TimingRow r;
    std::string f;
    std::getline(ls, r.algo, ',');
    std::getline(ls, f, ',');
    r.train_step_seconds = std::stod(f);
    std::getline(ls, f, ',');
    r.exec_step_seconds = std::stod(f);
    rows.push_back(std::move(r));
  }
  return rows;
}

double relative_improvement(double x, double y) {
  if (y == 0.0) return 0.0;
  return (x - y) / std::abs(y);
}

namespace {

MetricVector final_window_mean(const std::vector<AggregatePoint>& agg) {
  if (agg.empty()) throw std::invalid_argument("final_window_mean: empty aggregate");
  const std::size_t window =
      std::max<std::size_t>(1, (agg.size() + 9) / 10);  // last 10%, rounded up
  MetricVector m;
  for (std::size_t i = agg.size() - window; i < agg.size(); ++i) {
    m.reward_total += agg[i].mean.reward_total;
    m.reward_non += agg[i].mean.reward_non;
    m.reward_vr += agg[i].mean.reward_vr;
    m.fps_non += agg[i].mean.fps_non;
    m.fps_vr += agg[i].mean.fps_vr;
    m.delay_std_vr += agg[i].mean.delay_std_vr;
    m.episode_length += agg[i].mean.episode_length;
  }
  const double inv = 1.0 / static_cast<double>(window);
  m.reward_total *= inv;
  m.reward_non *= inv;
  m.reward_vr *= inv;
  m.fps_non *= inv;
  m.fps_vr *= inv;
  m.delay_std_vr *= inv;
  m.episode_length *= inv;
  return m;
}

}  // namespace

std::vector<ScenarioReport> summarize(const std::string& result_dir) {
  std::vector<ScenarioReport> reports;
  std::vector<fs::path> scenario_dirs;
  for (const auto& entry : fs::directory_iterator(result_dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("vr", 0) == 0) {
      scenario_dirs.push_back(entry.path());
    }
  }
  std::sort(scenario_dirs.begin(), scenario_dirs.end());
  for (const auto& dir : scenario_dirs) {
    ScenarioReport report;
    report.n_vr = std::stoi(dir.filename().string().substr(2));
    std::vector<fs::path> algo_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory()) algo_dirs.push_back(entry.path());
    }
    std::sort(algo_dirs.begin(), algo_dirs.end());
    for (const auto& adir : algo_dirs) {
      fs::path agg_path = adir / "aggregate.csv";
      if (!fs::exists(agg_path)) continue;
      AlgoFinal f;
      f.algo = adir.filename().string();
      f.final_mean = final_window_mean(read_aggregate_csv(agg_path.string()));
      report.finals.push_back(std::move(f));
    }
    if (!report.finals.empty()) reports.push_back(std::move(report));
  }
  if (reports.empty()) {
    throw std::runtime_error("summarize: no aggregates found under " + result_dir);
  }
  return reports;
}

std::string format_summary(const std::vector<ScenarioReport>& reports) {
  std::ostringstream out;
  char buf[256];
  for (const auto& report : reports) {
    out << "scenario vr" << report.n_vr << " (final-window means)\n";
    out << "  algo            reward_total   fps_non   fps_vr   delay_std_vr"
           "   ep_length\n";
    for (const auto& f : report.finals) {
      std::snprintf(buf, sizeof(buf), "  %-14s %12.3f %9.3f %8.3f %14.6g %11.2f\n",
                    f.algo.c_str(), f.final_mean.reward_total, f.final_mean.fps_non,
                    f.final_mean.fps_vr, f.final_mean.delay_std_vr,
                    f.final_mean.episode_length);
      out << buf;
    }
    if (report.finals.size() >= 2) {
      out << "  pairwise relative improvements ((X-Y)/|Y|):\n";
      for (const auto& x : report.finals) {
        for (const auto& y : report.finals) {
          if (x.algo == y.algo) continue;
          std::snprintf(
              buf, sizeof(buf),
              "    %s vs %s: reward %+.1f%%, fps_non %+.1f%%, fps_vr %+.1f%%, "
              "delay_std_vr %+.1f%%\n",
              x.algo.c_str(), y.algo.c_str(),
              100.0 * relative_improvement(x.final_mean.reward_total,
                                           y.final_mean.reward_total),
              100.0 * relative_improvement(x.final_mean.fps_non, y.final_mean.fps_non),
              100.0 * relative_improvement(x.final_mean.fps_vr, y.final_mean.fps_vr),
              100.0 * relative_improvement(x.final_mean.delay_std_vr,
                                           y.final_mean.delay_std_vr));
          out << buf;
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

void write_summary_csv(const std::vector<ScenarioReport>& reports,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary csv: " + path);
  out << "n_vr,algo,reward_total,reward_non,reward_vr,fps_non,fps_vr,"
         "delay_std_vr,episode_length\n";
  char buf[320];
  for (const auto& report : reports) {
    for (const auto& f : report.finals) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    report.n_vr, f.algo.c_str(), f.final_mean.reward_total,
                    f.final_mean.reward_non, f.final_mean.reward_vr,
                    f.final_mean.fps_non, f.final_mean.fps_vr,
                    f.final_mean.delay_std_vr, f.final_mean.episode_length);
      out << buf;
    }
  }
}

}  // namespace framecast
