#pragma once

#include <functional>
#include <string>
#include <vector>

#include "framecast/config.hpp"
#include "framecast/env.hpp"
#include "framecast/ppo.hpp"
#include "framecast/rng.hpp"

namespace framecast {

/// p_max / n_users to every user.
std::vector<double> average_allocation(int n_users, double p_max);

/// A baseline policy maps the grouped state to per-user powers.
using PolicyFn = std::function<std::vector<double>(const GroupedState&)>;

PolicyFn make_average_policy(const ScenarioConfig& config);

struct BaselineSummary {
  long episodes = 0;
  double reward_mean = 0.0, reward_std = 0.0;
  double reward_non_mean = 0.0, reward_vr_mean = 0.0;
  double fps_non_mean = 0.0, fps_non_std = 0.0;
  double fps_vr_mean = 0.0, fps_vr_std = 0.0;
  double delay_std_vr_mean = 0.0, delay_std_vr_std = 0.0;
  double episode_length_mean = 0.0, episode_length_std = 0.0;
  std::vector<double> per_user_failure_rate;  // failures / slots stepped
};

/// Seeded rollouts of a fixed policy. The standard-PPO baseline is not
/// here: it is the ppo trainer with the standard critic variant.
BaselineSummary run_baseline(const ScenarioConfig& config, const PolicyFn& policy,
                             long n_episodes, Rng& rng);

/// Evaluation-cadence log for a non-learning policy, with the same
/// columns and eval-episode seeds as the trainer log so curves are
/// directly comparable.
TrainingLog baseline_training_log(const ScenarioConfig& config,
                                  const PolicyFn& policy,
                                  const std::string& variant_name,
                                  long total_steps, int eval_period,
                                  int eval_episodes, std::uint64_t seed);

}  // namespace framecast
