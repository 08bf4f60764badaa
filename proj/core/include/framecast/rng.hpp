#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace framecast {

/// Deterministic random source. std::mt19937_64 supplies the raw bit
/// stream; all distribution transforms are implemented here so that
/// sampled sequences are identical across platforms and standard
/// library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform on (0, 1), both endpoints excluded.
  double uniform_open();
  /// Exponential with rate 1 (strictly positive).
  double exponential();
  /// Standard normal (Box-Muller, second value cached).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Derives a substream seed for a named component so that independent
/// parts of a run (scenario draw, episode dynamics, policy sampling,
/// minibatch shuffling, evaluation) consume disjoint streams.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view label);

/// Substream further indexed by an integer (e.g. per-seed, per-cell).
std::uint64_t substream_seed(std::uint64_t seed, std::string_view label,
                             std::uint64_t index);

}  // namespace framecast
