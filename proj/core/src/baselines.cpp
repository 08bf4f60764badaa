#include "framecast/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace framecast {

std::vector<double> average_allocation(int n_users, double p_max) {
  if (n_users < 1) throw std::invalid_argument("average_allocation: n_users >= 1");
  if (!(p_max > 0.0)) throw std::invalid_argument("average_allocation: p_max > 0");
  return std::vector<double>(n_users, p_max / n_users);
}

PolicyFn make_average_policy(const ScenarioConfig& config) {
  std::vector<double> powers = average_allocation(config.n_users, config.p_max);
  return [powers](const GroupedState&) { return powers; };
}

namespace {

struct Moments {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    double m = mean();
    double var = sumsq / n - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
  }
};

}  // namespace

BaselineSummary run_baseline(const ScenarioConfig& config, const PolicyFn& policy,
                             long n_episodes, Rng& rng) {
  if (n_episodes < 1) throw std::invalid_argument("run_baseline: n_episodes >= 1");
  auto users = build_scenario(config);
  Environment env(config, users, rng.next_u64());
  Moments reward, reward_non, reward_vr, fps_non, fps_vr, std_vr, length;
  std::vector<long> failures(users.size(), 0);
  long slots = 0;
  for (long e = 0; e < n_episodes; ++e) {
    GroupedState state = env.reset();
    double r_non = 0.0, r_vr = 0.0;
    bool done = false;
    while (!done) {
      Environment::StepResult res = env.step(policy(state));
      r_non += res.reward.non_vr;
      r_vr += res.reward.vr;
      for (std::size_t n = 0; n < res.outcomes.size(); ++n) {
        if (!res.outcomes[n].success) ++failures[n];
      }
      ++slots;
      done = res.done;
      if (!done) state = res.state;
    }
    reward.add(r_non + r_vr);
    reward_non.add(r_non);
    reward_vr.add(r_vr);
    double f_non = 0.0, f_vr = 0.0, s_vr = 0.0;
    int c_non = 0, c_vr = 0;
    for (std::size_t n = 0; n < users.size(); ++n) {
      if (users[n].mode == 1) {
        f_vr += env.traces()[n].achieved_fps;
        s_vr += env.traces()[n].delay_std;
        ++c_vr;
      } else {
        f_non += env.traces()[n].achieved_fps;
        ++c_non;
      }
    }
    if (c_non > 0) fps_non.add(f_non / c_non);
    if (c_vr > 0) {
      fps_vr.add(f_vr / c_vr);
      std_vr.add(s_vr / c_vr);
    }
    length.add(env.steps_taken());
  }
  BaselineSummary s;
  s.episodes = n_episodes;
  s.reward_mean = reward.mean();
  s.reward_std = reward.stddev();
  s.reward_non_mean = reward_non.mean();
  s.reward_vr_mean = reward_vr.mean();
  s.fps_non_mean = fps_non.mean();
  s.fps_non_std = fps_non.stddev();
  s.fps_vr_mean = fps_vr.mean();
  s.fps_vr_std = fps_vr.stddev();
  s.delay_std_vr_mean = std_vr.mean();
  s.delay_std_vr_std = std_vr.stddev();
  s.episode_length_mean = length.mean();
  s.episode_length_std = length.stddev();
  s.per_user_failure_rate.resize(users.size());
  for (std::size_t n = 0; n < users.size(); ++n) {
    s.per_user_failure_rate[n] =
        slots > 0 ? static_cast<double>(failures[n]) / static_cast<double>(slots) : 0.0;
  }
  return s;
}

TrainingLog baseline_training_log(const ScenarioConfig& config,
                                  const PolicyFn& policy,
                                  const std::string& variant_name,
                                  long total_steps, int eval_period,
                                  int eval_episodes, std::uint64_t seed) {
  if (total_steps < 1 || eval_period < 1 || eval_episodes < 1) {
    throw std::invalid_argument("baseline_training_log: counts must be >= 1");
  }
  auto users = build_scenario(config);
  // One evaluation pass; the policy is fixed, so every record repeats it.
  EvalRecord rec;
  rec.seed = seed;
  rec.variant = variant_name;
  for (int e = 0; e < eval_episodes; ++e) {
    Environment env(config, users,
                    substream_seed(seed, "eval-episode", static_cast<std::uint64_t>(e)));
    GroupedState state = env.reset();
    double r_non = 0.0, r_vr = 0.0;
    bool done = false;
    while (!done) {
      Environment::StepResult res = env.step(policy(state));
      r_non += res.reward.non_vr;
      r_vr += res.reward.vr;
      done = res.done;
      if (!done) state = res.state;
    }
    rec.eval_reward_non += r_non;
    rec.eval_reward_vr += r_vr;
    double f_non = 0.0, f_vr = 0.0, s_vr = 0.0;
    int c_non = 0, c_vr = 0;
    for (std::size_t n = 0; n < users.size(); ++n) {
      if (users[n].mode == 1) {
        f_vr += env.traces()[n].achieved_fps;
        s_vr += env.traces()[n].delay_std;
        ++c_vr;
      } else {
        f_non += env.traces()[n].achieved_fps;
        ++c_non;
      }
    }
    if (c_non > 0) rec.fps_non_mean += f_non / c_non;
    if (c_vr > 0) {
      rec.fps_vr_mean += f_vr / c_vr;
      rec.delay_std_vr_mean += s_vr / c_vr;
    }
    rec.episode_length_mean += env.steps_taken();
  }
  const double inv = 1.0 / eval_episodes;
  rec.eval_reward_non *= inv;
  rec.eval_reward_vr *= inv;
  rec.eval_reward_total = rec.eval_reward_non + rec.eval_reward_vr;
  rec.fps_non_mean *= inv;
  rec.fps_vr_mean *= inv;
  rec.delay_std_vr_mean *= inv;
  rec.episode_length_mean *= inv;

  TrainingLog log;
  for (long step = eval_period; step <= total_steps; step += eval_period) {
    EvalRecord r = rec;
    r.step = step;
    log.records.push_back(std::move(r));
  }
  return log;
}

}  // namespace framecast
