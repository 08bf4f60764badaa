#pragma once

#include <utility>
#include <vector>

#include "framecast/config.hpp"
#include "framecast/rng.hpp"

namespace framecast {

/// One user's channel realization for one slot. The gain is the
/// large-scale gain times an Exponential(1) power multiplier (Rayleigh
/// amplitude fading); the compression ratio is redrawn every slot.
struct ChannelSample {
  double gain = 0.0;
  double compression_ratio = 0.0;
};

/// Per-user per-slot transmission record.
struct SlotOutcome {
  double power = 0.0;      // [W]
  double gain = 0.0;
  double compression_ratio = 0.0;
  double data_size = 0.0;  // [bits], f*b / compression
  double rate = 0.0;       // [bits/s]
  double latency = 0.0;    // [s], capped at the TTI
  int success = 0;         // 1 iff the frame met its slot deadline
};

/// Shannon rate W * log2(1 + p*g / (sigma^2 * W)).
/// Monotone nondecreasing in power and gain.
double shannon_rate(double power, double gain, double bandwidth, double noise_psd);

/// Latency min(data_size/rate, 1/T) and the deadline indicator.
/// rate == 0 yields (1/T, 0).
std::pair<double, int> frame_latency(double data_size, double rate,
                                     int frames_per_second);

/// Fresh fading and compression draws for every user, in index order.
/// Deterministic for a given rng state.
std::vector<ChannelSample> draw_channel(const std::vector<UserProfile>& users,
                                        const ScenarioConfig& config, Rng& rng);

/// Assembles the full slot outcome for one user.
SlotOutcome transmit_frame(double power, const ChannelSample& sample,
                           const ScenarioConfig& config);

/// Monte Carlo estimate of the per-user frame failure probability
/// P(I = 0) when every user gets `power_per_user` each slot. Used to
/// calibrate the default power budget. n_samples >= 10^4.
std::vector<double> failure_probability_oracle(const ScenarioConfig& config,
                                               double power_per_user,
                                               long n_samples);

}  // namespace framecast
