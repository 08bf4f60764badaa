#include "framecast/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace framecast {

double shannon_rate(double power, double gain, double bandwidth, double noise_psd) {
  if (!(bandwidth > 0.0)) throw std::domain_error("shannon_rate: bandwidth must be > 0");
  if (!(noise_psd > 0.0)) throw std::domain_error("shannon_rate: noise_psd must be > 0");
  if (power < 0.0) throw std::domain_error("shannon_rate: power must be >= 0");
  if (!(gain > 0.0)) throw std::domain_error("shannon_rate: gain must be > 0");
  double snr = power * gain / (noise_psd * bandwidth);
  return bandwidth * std::log2(1.0 + snr);
}

std::pair<double, int> frame_latency(double data_size, double rate,
                                     int frames_per_second) {
  if (!(data_size > 0.0)) throw std::domain_error("frame_latency: data_size must be > 0");
  if (frames_per_second < 1) {
    throw std::domain_error("frame_latency: frames_per_second must be >= 1");
  }
  const double tti = 1.0 / frames_per_second;
  if (rate <= 0.0) return {tti, 0};
  double raw = data_size / rate;
  if (raw <= tti) return {raw, 1};
  return {tti, 0};
}

std::vector<ChannelSample> draw_channel(const std::vector<UserProfile>& users,
                                        const ScenarioConfig& config, Rng& rng) {
  std::vector<ChannelSample> samples(users.size());
  for (std::size_t n = 0; n < users.size(); ++n) {
    samples[n].gain = users[n].large_scale_gain * rng.exponential();
    samples[n].compression_ratio =
        rng.uniform(config.compression_min, config.compression_max);
  }
  return samples;
}

SlotOutcome transmit_frame(double power, const ChannelSample& sample,
                           const ScenarioConfig& config) {
  SlotOutcome out;
  out.power = power;
  out.gain = sample.gain;
  out.compression_ratio = sample.compression_ratio;
  out.data_size = config.frame_bits() / sample.compression_ratio;
  out.rate = power > 0.0
                 ? shannon_rate(power, sample.gain, config.bandwidth_per_user,
                                config.noise_psd)
                 : 0.0;
  auto [latency, success] =
      frame_latency(out.data_size, out.rate, config.frames_per_second);
  out.latency = latency;
  out.success = success;
  return out;
}

std::vector<double> failure_probability_oracle(const ScenarioConfig& config,
                                               double power_per_user,
                                               long n_samples) {
  if (n_samples < 10000) {
    throw std::invalid_argument("failure_probability_oracle: n_samples must be >= 1e4");
  }
  auto users = build_scenario(config);
  Rng rng(substream_seed(config.seed, "failure-oracle"));
  std::vector<long> failures(users.size(), 0);
  for (long s = 0; s < n_samples; ++s) {
    auto samples = draw_channel(users, config, rng);
    for (std::size_t n = 0; n < users.size(); ++n) {
      SlotOutcome out = transmit_frame(power_per_user, samples[n], config);
      if (!out.success) ++failures[n];
    }
  }
  std::vector<double> prob(users.size());
  for (std::size_t n = 0; n < users.size(); ++n) {
    prob[n] = static_cast<double>(failures[n]) / static_cast<double>(n_samples);
  }
  return prob;
}

}  // namespace framecast
