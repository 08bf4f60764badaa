#include "framecast/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "framecast/errors.hpp"

namespace framecast {

namespace {

void append_block(std::vector<double>& out, const UserBlock& b,
                  const ScenarioConfig& c, bool with_std) {
  const double t = c.frames_per_second;
  out.push_back(b.frames_left / t);
  out.push_back(b.tolerance_left / t);
  out.push_back(b.data_size / (c.frame_bits() / c.compression_min));
  out.push_back((std::log10(b.gain) + c.gain_log_offset) * c.gain_log_scale);
  if (with_std) out.push_back(b.running_delay_std * c.std_scale);
}

}  // namespace

std::vector<double> GroupedState::non_vr_vector(const ScenarioConfig& config) const {
  std::vector<double> v;
  v.reserve(non_vr.size() * 4);
  for (const auto& b : non_vr) append_block(v, b, config, false);
  return v;
}

std::vector<double> GroupedState::vr_vector(const ScenarioConfig& config) const {
  std::vector<double> v;
  v.reserve(vr.size() * 5);
  for (const auto& b : vr) append_block(v, b, config, true);
  return v;
}

std::vector<double> GroupedState::global_vector(const ScenarioConfig& config) const {
  std::vector<double> v = non_vr_vector(config);
  std::vector<double> w = vr_vector(config);
  v.insert(v.end(), w.begin(), w.end());
  return v;
}

std::vector<double> project_action(std::span<const double> raw_outputs, double p_max) {
  for (double r : raw_outputs) {
    if (!std::isfinite(r)) throw numeric_error("project_action: non-finite input");
  }
  if (raw_outputs.empty()) throw std::invalid_argument("project_action: empty input");
  double m = *std::max_element(raw_outputs.begin(), raw_outputs.end());
  std::vector<double> powers(raw_outputs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < raw_outputs.size(); ++i) {
    powers[i] = std::exp(raw_outputs[i] - m);
    sum += powers[i];
  }
  for (double& p : powers) p *= p_max / sum;
  return powers;
}

std::vector<double> inter_frame_delays(const std::vector<double>& latencies,
                                       const std::vector<int>& successes, int T) {
  if (latencies.size() != successes.size()) {
    throw std::invalid_argument("inter_frame_delays: length mismatch");
  }
  const double tti = 1.0 / T;
  std::vector<int> mu;
  for (std::size_t t = 0; t < successes.size(); ++t) {
    if (successes[t]) mu.push_back(static_cast<int>(t));
  }
  std::vector<double> delays;
  if (mu.size() < 2) return delays;
  delays.reserve(mu.size() - 1);
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    double d = tti - latencies[mu[i]];
    for (int t = mu[i] + 1; t <= mu[i + 1]; ++t) d += latencies[t];
    delays.push_back(d);
  }
  return delays;
}

double delay_std(std::span<const double> delays) {
  const std::size_t n = delays.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double d : delays) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : delays) ss += (d - mean) * (d - mean);
  return std::sqrt(ss / static_cast<double>(n));
}

double episode_qos(const EpisodeTrace& trace, int mode, double w_frame,
                   double w_sickness) {
  return w_frame * trace.achieved_fps - w_sickness * mode * trace.delay_std;
}

GroupedReward reward_for_slot(const std::vector<SlotOutcome>& outcomes,
                              const std::vector<EpisodeTrace>& traces,
                              const std::vector<UserProfile>& users, int t, int T,
                              bool non_vr_terminated, bool vr_terminated,
                              double w_frame, double w_sickness) {
  GroupedReward r;
  for (std::size_t n = 0; n < users.size(); ++n) {
    if (users[n].mode == 0) {
      r.non_vr += w_frame * outcomes[n].success;
    } else {
      r.vr += 1.5 * w_frame * outcomes[n].success;
      r.vr -= w_sickness * traces[n].delay_std;
    }
  }
  const double penalty = 2.0 * (T - t);
  if (non_vr_terminated) r.non_vr -= penalty;
  if (vr_terminated) r.vr -= penalty;
  return r;
}

void write_episode_csv(const std::vector<SlotRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write episode csv: " + path);
  out << "slot,user,power,gain,rate,latency,success\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.10g,%.10g,%d\n", r.slot,
                  r.user, r.power, r.gain, r.rate, r.latency, r.success);
    out << buf;
  }
}

Environment::Environment(ScenarioConfig config, std::vector<UserProfile> users,
                         std::uint64_t rng_seed)
    : config_(std::move(config)), users_(std::move(users)), rng_(rng_seed) {
  config_.validate();
  if (static_cast<int>(users_.size()) != config_.n_users) {
    throw std::invalid_argument("Environment: profile count != n_users");
  }
}

const GroupedState& Environment::reset() {
  t_ = 1;
  done_ = false;
  steps_taken_ = 0;
  failures_.assign(users_.size(), 0);
  traces_.assign(users_.size(), EpisodeTrace{});
  draw_slot_samples();
  rebuild_state();
  return state_;
}

void Environment::draw_slot_samples() {
  current_ = draw_channel(users_, config_, rng_);
}

void Environment::rebuild_state() {
  const int T = config_.frames_per_second;
  state_.non_vr.clear();
  state_.vr.clear();
  for (std::size_t n = 0; n < users_.size(); ++n) {
    UserBlock b;
    b.frames_left = static_cast<double>(T - t_);
    const int budget = users_[n].mode == 1 ? T - config_.min_fps_vr
                                           : T - config_.min_fps_non;
    b.tolerance_left = std::max(0, budget - failures_[n]);
    b.data_size = config_.frame_bits() / current_[n].compression_ratio;
    b.gain = current_[n].gain;
    b.running_delay_std = traces_[n].delay_std;
    if (users_[n].mode == 1) {
      state_.vr.push_back(b);
    } else {
      state_.non_vr.push_back(b);
    }
  }
}

Environment::StepResult Environment::step(std::span<const double> powers) {
  if (done_) throw std::logic_error("Environment::step: episode is finished");
  if (powers.size() != users_.size()) {
    throw std::invalid_argument("Environment::step: power vector size mismatch");
  }
  double sum = 0.0;
  for (double p : powers) {
    if (!(p >= 0.0)) throw std::invalid_argument("Environment::step: power must be >= 0");
    sum += p;
  }
  if (sum > config_.p_max * (1.0 + 1e-6)) {
    throw std::invalid_argument("Environment::step: powers exceed p_max");
  }

  const int T = config_.frames_per_second;
  const double tti = config_.tti();

  std::vector<SlotOutcome> outcomes(users_.size());
  bool non_vr_terminated = false;
  bool vr_terminated = false;
  for (std::size_t n = 0; n < users_.size(); ++n) {
    outcomes[n] = transmit_frame(powers[n], current_[n], config_);
    EpisodeTrace& tr = traces_[n];
    if (outcomes[n].success) {
      if (tr.has_success) {
        tr.delays.push_back(tr.open_gap + outcomes[n].latency);
        tr.delay_std = delay_std(tr.delays);
        double mean = 0.0;
        for (double d : tr.delays) mean += d;
        tr.delay_mean = mean / static_cast<double>(tr.delays.size());
      }
      tr.has_success = true;
      tr.open_gap = tti - outcomes[n].latency;
      tr.success_slots.push_back(t_);
      ++tr.success_count;
      tr.achieved_fps = tr.success_count;
    } else {
      ++failures_[n];
      if (tr.has_success) tr.open_gap += outcomes[n].latency;
      const int budget = users_[n].mode == 1 ? T - config_.min_fps_vr
                                             : T - config_.min_fps_non;
      if (failures_[n] > budget) {
        if (users_[n].mode == 1) {
          vr_terminated = true;
        } else {
          non_vr_terminated = true;
        }
      }
    }
  }

  GroupedReward reward =
      reward_for_slot(outcomes, traces_, users_, t_, T, non_vr_terminated,
                      vr_terminated, config_.w_frame, config_.w_sickness);

  if (recording_) {
    for (std::size_t n = 0; n < users_.size(); ++n) {
      records_.push_back({t_, static_cast<int>(n), outcomes[n].power,
                          outcomes[n].gain, outcomes[n].rate, outcomes[n].latency,
                          outcomes[n].success});
    }
  }

  ++steps_taken_;
  done_ = (t_ == T) || non_vr_terminated || vr_terminated;
  if (done_) {
    for (std::size_t n = 0; n < users_.size(); ++n) {
      traces_[n].qos = episode_qos(traces_[n], users_[n].mode, config_.w_frame,
                                   config_.w_sickness);
    }
    rebuild_state();
  } else {
    ++t_;
    draw_slot_samples();
    rebuild_state();
  }
  return {state_, reward, done_, std::move(outcomes)};
}

}  // namespace framecast
