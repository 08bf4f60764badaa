#include "framecast/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace framecast {

namespace {

// splitmix64 finalizer, used for seed mixing only.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_open();
  double u2 = uniform_open();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::domain_error("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost trick: Gamma(a) = Gamma(a+1) * U^(1/a).
    double u = uniform_open();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform_open();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view label) {
  return mix64(seed ^ mix64(fnv1a(label)));
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view label,
                             std::uint64_t index) {
  return mix64(substream_seed(seed, label) ^ mix64(index + 0x51ed270b7a2cf345ULL));
}

}  // namespace framecast
