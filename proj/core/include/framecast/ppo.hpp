#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "framecast/config.hpp"
#include "framecast/dirichlet.hpp"
#include "framecast/env.hpp"
#include "framecast/nn.hpp"

namespace framecast {

struct TrainerParams {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs_per_batch = 10;
  int rollout_length = 2048;
  int minibatch_size = 256;
  int target_update_period = 1;  // update phases between target syncs
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  std::vector<int> hidden_sizes = {128, 128};
  // Critic width may differ from the actor's; empty = same as hidden_sizes.
  std::vector<int> critic_hidden_sizes;
  bool sido_shared_trunk = true;
  int eval_episodes = 4;
  // Zero-mean unit-variance rescale of the summed advantages before the
  // actor update (stabilizer; the raw objective uses them unscaled).
  bool normalize_advantages = true;
  // Normalize each group's advantage stream before summing instead of
  // normalizing the sum. Keeps both streams influential when their
  // scales differ by orders of magnitude; only the differentiated
  // critics produce distinct streams, so the standard variant is
  // unaffected.
  bool per_group_advantage_norm = false;

  const std::vector<int>& critic_hidden() const {
    return critic_hidden_sizes.empty() ? hidden_sizes : critic_hidden_sizes;
  }

  void validate() const;
};

enum class CriticKind { kStandard, kSido, kMido };

CriticKind critic_kind_from_string(const std::string& name);
std::string to_string(CriticKind kind);

/// Stochastic policy over power fractions: an MLP on the global state
/// emits one raw output per user; concentrations softplus(raw) + 1
/// parameterize a Dirichlet on the simplex. The +1 floor keeps the
/// density bounded at the corners.
class ActorPolicy {
 public:
  ActorPolicy() = default;
  ActorPolicy(int state_dim, int n_users, const std::vector<int>& hidden, Rng& rng);

  struct ActionSample {
    std::vector<double> fractions;
    double log_prob = 0.0;
  };

  ActionSample sample(std::span<const double> state, Rng& rng) const;
  /// Deterministic evaluation action: the concentration mean alpha/sum.
  std::vector<double> mean_action(std::span<const double> state) const;
  std::vector<double> concentrations(std::span<const double> state) const;
  double log_prob(std::span<const double> state,
                  std::span<const double> fractions) const;
  /// Accumulates coef * d log pi(fractions|state) / d theta into the
  /// network gradients; returns log pi.
  double accumulate_log_prob_grad(std::span<const double> state,
                                  std::span<const double> fractions, double coef);
  double entropy(std::span<const double> state) const;

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  int n_users() const { return n_users_; }

 private:
  Mlp net_;
  int n_users_ = 0;
};

/// Value network in one of three layouts:
///  - standard: one network on the global state, scalar value;
///  - sido: per-group input branches (adapter per branch) into a shared
///    trunk with per-group scalar heads, so V_non sees only s_non and
///    V_vr only s_vr;
///  - mido: one network on the global state with a two-component head.
/// A target copy supplies the values used for advantage targets and is
/// synchronized on demand.
class Critic {
 public:
  Critic() = default;
  Critic(CriticKind kind, int non_dim, int vr_dim, const std::vector<int>& hidden,
         bool shared_trunk, Rng& rng);

  CriticKind kind() const { return kind_; }
  int non_dim() const { return non_dim_; }
  int vr_dim() const { return vr_dim_; }

  /// (V_non, V_vr); the standard layout reports (V, 0).
  std::pair<double, double> values(std::span<const double> s_non,
                                   std::span<const double> s_vr) const;
  std::pair<double, double> target_values(std::span<const double> s_non,
                                          std::span<const double> s_vr) const;
  void sync_target();

  void zero_grad();
  /// Accumulates d_non * dV_non/dphi + d_vr * dV_vr/dphi.
  void accumulate_value_grad(std::span<const double> s_non,
                             std::span<const double> s_vr, double d_non,
                             double d_vr);
  void adam_update(double lr);

  long parameter_count() const;
  bool shared_trunk() const { return shared_trunk_; }

  /// Flat parameter access over every live layer, in a fixed order
  /// (used by gradient checks and checkpoints). Targets are excluded.
  std::vector<double> flatten_params() const;
  void set_params(std::span<const double> flat);
  std::vector<double> flatten_grads() const;

 private:
  std::vector<const DenseLayer*> layer_view() const;
  std::vector<DenseLayer*> layer_view();
  struct Stack {
    // adapter -> trunk layers -> head; trunk may be shared between the
    // two sido branches.
    DenseLayer adapter_non, adapter_vr;
    std::vector<DenseLayer> trunk_non, trunk_vr;  // trunk_vr empty when shared
    DenseLayer head_non, head_vr;
  };

  double branch_value(const Stack& s, bool vr_branch,
                      std::span<const double> input) const;
  void branch_backward(Stack& s, bool vr_branch, std::span<const double> input,
                       double dv);

  CriticKind kind_ = CriticKind::kStandard;
  int non_dim_ = 0;
  int vr_dim_ = 0;
  bool shared_trunk_ = true;
  Mlp net_, target_net_;        // standard and mido layouts
  Stack sido_, sido_target_;    // sido layout
  long sido_adam_t_ = 0;
};

/// Wrapper for sido-only value evaluation; throws std::logic_error on
/// other layouts.
std::pair<double, double> sido_values(const Critic& critic,
                                      std::span<const double> s_non,
                                      std::span<const double> s_vr);
/// Wrapper for mido-only value evaluation on the global state vector.
std::pair<double, double> mido_values(const Critic& critic,
                                      std::span<const double> global_state);

/// One MDP step as stored for training.
struct Transition {
  std::vector<double> s_non, s_vr;  // normalized state vectors
  std::vector<double> fractions;    // action on the simplex
  double log_prob = 0.0;            // under the collection policy
  double reward_non = 0.0;
  double reward_vr = 0.0;
  bool done = false;
  double value_non = 0.0, value_vr = 0.0;            // target critic at s
  double next_value_non = 0.0, next_value_vr = 0.0;  // target critic at s'
  int slot_index = 0;

  std::vector<double> global_state() const;
};

/// GAE with the recursion A^t = delta^t + gamma*lambda*(1-done^t)*A^{t+1},
/// delta^t = r^t + gamma*(1-done^t)*next_value^t - value^t.
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   std::span<const int> dones, double gamma,
                                   double lambda);

struct GroupedAdvantages {
  std::vector<double> non, vr;
};

/// Per-group GAE on the stored target-critic values. The standard
/// layout runs once on the summed rewards and reports that stream as
/// `non` with `vr` all zero.
GroupedAdvantages grouped_advantages(const std::vector<Transition>& batch,
                                     CriticKind kind, double gamma, double lambda);

struct ActorDiagnostics {
  double loss = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

struct CriticDiagnostics {
  double loss = 0.0;
};

struct EvalRecord {
  long step = 0;
  std::uint64_t seed = 0;
  std::string variant;
  double eval_reward_total = 0.0;
  double eval_reward_non = 0.0;
  double eval_reward_vr = 0.0;
  double fps_non_mean = 0.0;
  double fps_vr_mean = 0.0;
  double delay_std_vr_mean = 0.0;
  double episode_length_mean = 0.0;
};

struct TrainingLog {
  std::vector<EvalRecord> records;
};

void write_training_log_csv(const TrainingLog& log, const std::string& path);
TrainingLog read_training_log_csv(const std::string& path);

class Trainer {
 public:
  Trainer(ScenarioConfig config, CriticKind kind, TrainerParams params,
          std::uint64_t seed);

  /// Alternates rollout collection and clipped-surrogate updates;
  /// records evaluation metrics every eval_period environment steps.
  /// On a numeric abort the last-good actor checkpoint is written to
  /// checkpoint_prefix + "_actor.ckpt" (when a prefix is given) and the
  /// error is rethrown.
  TrainingLog train(long total_steps, int eval_period,
                    const std::string& checkpoint_prefix = "");

  ActorDiagnostics actor_update(const std::vector<Transition>& batch,
                                std::span<const double> advantages_total);
  CriticDiagnostics critic_update(const std::vector<Transition>& batch,
                                  const GroupedAdvantages& advantages);
  EvalRecord evaluate(long step);

  ActorPolicy& actor() { return actor_; }
  Critic& critic() { return critic_; }
  const ScenarioConfig& config() const { return config_; }
  const TrainerParams& params() const { return params_; }
  CriticKind kind() const { return kind_; }

  /// Median wall-clock seconds of one update phase over n_updates
  /// repetitions on one collected rollout. Mutates the networks; use a
  /// dedicated trainer instance.
  double median_update_seconds(int n_updates);
  /// Median wall-clock seconds of one policy execution step (state
  /// vector build + actor forward + env step), over n_steps steps.
  double median_exec_seconds(long n_steps);

 private:
  void collect_step(std::vector<Transition>& buffer);
  void run_update_phase(std::vector<Transition>& buffer);

  ScenarioConfig config_;
  CriticKind kind_;
  TrainerParams params_;
  std::vector<UserProfile> users_;
  Environment env_;
  ActorPolicy actor_;
  Critic critic_;
  Rng policy_rng_;
  Rng shuffle_rng_;
  std::uint64_t seed_ = 0;
  long global_step_ = 0;
  long update_count_ = 0;
  GroupedState current_state_;
  bool episode_open_ = false;
};

}  // namespace framecast
