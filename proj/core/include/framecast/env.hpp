#pragma once

#include <span>
#include <string>
#include <vector>

#include "framecast/channel.hpp"
#include "framecast/config.hpp"
#include "framecast/rng.hpp"

namespace framecast {

/// Slot reward split by user group.
struct GroupedReward {
  double non_vr = 0.0;
  double vr = 0.0;
  double total() const { return non_vr + vr; }
};

/// One user's share of the observation. frames_left and tolerance_left
/// are raw counters; normalization happens in the vector builders.
struct UserBlock {
  double frames_left = 0.0;        // T - t
  double tolerance_left = 0.0;     // (T - I_bar) - failures, floored at 0
  double data_size = 0.0;          // bits of the pending frame
  double gain = 0.0;               // current channel gain
  double running_delay_std = 0.0;  // VR users only
};

/// Observation grouped as non-VR blocks then VR blocks, in user index
/// order. The global state is the concatenation of the two vectors.
struct GroupedState {
  std::vector<UserBlock> non_vr;
  std::vector<UserBlock> vr;

  static int non_vr_dim(int n_non) { return 4 * n_non; }
  static int vr_dim(int n_vr) { return 5 * n_vr; }

  std::vector<double> non_vr_vector(const ScenarioConfig& config) const;
  std::vector<double> vr_vector(const ScenarioConfig& config) const;
  std::vector<double> global_vector(const ScenarioConfig& config) const;
};

/// Per-user episode bookkeeping: ordered successful slots, the delays
/// between consecutive successful frames, and the running delay std.
struct EpisodeTrace {
  std::vector<int> success_slots;  // 1-based slot indices
  std::vector<double> delays;
  int success_count = 0;
  double delay_mean = 0.0;
  double delay_std = 0.0;
  double qos = 0.0;
  int achieved_fps = 0;

  // Partial next-delay accumulator: time elapsed since the last
  // successful frame was received.
  double open_gap = 0.0;
  bool has_success = false;
};

/// p_max * softmax(raw): positive components summing to p_max, so the
/// sum-power constraint holds by construction.
std::vector<double> project_action(std::span<const double> raw_outputs, double p_max);

/// Delays between consecutive successful frames for a full episode:
/// d^{i,i+1} = (1/T - l_{mu_i}) + sum of latencies over slots
/// mu_i+1 .. mu_{i+1}. Empty when fewer than two successes.
std::vector<double> inter_frame_delays(const std::vector<double>& latencies,
                                       const std::vector<int>& successes, int T);

/// Population std over the delay list (denominator = number of delays,
/// i.e. K-1). Zero when fewer than two delays exist.
double delay_std(std::span<const double> delays);

/// Q_n = w_frame * achieved_fps - w_sickness * mode * delay_std.
double episode_qos(const EpisodeTrace& trace, int mode, double w_frame,
                   double w_sickness);

/// Slot reward. Per-user success pays +1 (non-VR) / +1.5 (VR) times
/// w_frame; every VR user's current running delay std is charged at
/// w_sickness each slot; a group whose user exhausted its tolerance at
/// slot t is charged the early-termination penalty 2*(T - t).
/// Traces must already include slot t.
GroupedReward reward_for_slot(const std::vector<SlotOutcome>& outcomes,
                              const std::vector<EpisodeTrace>& traces,
                              const std::vector<UserProfile>& users, int t, int T,
                              bool non_vr_terminated, bool vr_terminated,
                              double w_frame, double w_sickness);

/// Audit record for the per-slot episode CSV.
struct SlotRecord {
  int slot = 0;
  int user = 0;
  double power = 0.0;
  double gain = 0.0;
  double rate = 0.0;
  double latency = 0.0;
  int success = 0;
};

void write_episode_csv(const std::vector<SlotRecord>& records,
                       const std::string& path);

/// The frame-slotted MDP. One instance is single-threaded; run several
/// instances with independent rng seeds for parallel experiments.
class Environment {
 public:
  Environment(ScenarioConfig config, std::vector<UserProfile> users,
              std::uint64_t rng_seed);

  struct StepResult {
    GroupedState state;
    GroupedReward reward;
    bool done = false;
    std::vector<SlotOutcome> outcomes;
  };

  const GroupedState& reset();

  /// Advances one slot. Powers must be componentwise >= 0 and sum to at
  /// most p_max * (1 + 1e-6). Throws std::logic_error on a finished
  /// episode. done is set at slot T or when any user's failures exceed
  /// its tolerance (early termination).
  StepResult step(std::span<const double> powers);

  int slot() const { return t_; }
  bool episode_done() const { return done_; }
  int steps_taken() const { return steps_taken_; }
  const GroupedState& state() const { return state_; }
  const std::vector<EpisodeTrace>& traces() const { return traces_; }
  const std::vector<UserProfile>& users() const { return users_; }
  const ScenarioConfig& config() const { return config_; }

  /// When enabled, every step appends per-user SlotRecords.
  void set_recording(bool on) { recording_ = on; }
  const std::vector<SlotRecord>& records() const { return records_; }
  void clear_records() { records_.clear(); }

 private:
  void draw_slot_samples();
  void rebuild_state();

  ScenarioConfig config_;
  std::vector<UserProfile> users_;
  Rng rng_;
  int t_ = 0;
  bool done_ = true;
  int steps_taken_ = 0;
  std::vector<int> failures_;
  std::vector<EpisodeTrace> traces_;
  std::vector<ChannelSample> current_;
  GroupedState state_;
  bool recording_ = false;
  std::vector<SlotRecord> records_;
};

}  // namespace framecast
