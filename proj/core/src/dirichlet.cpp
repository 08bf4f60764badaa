#include "framecast/dirichlet.hpp"

#include <cmath>
#include <stdexcept>

namespace framecast {

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion, |error| < 1e-12 for x >= 6.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                    inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result;
}

namespace {

void check_concentrations(std::span<const double> conc) {
  if (conc.empty()) throw std::invalid_argument("dirichlet: empty concentration vector");
  for (double a : conc) {
    if (!(a > 0.0)) throw std::domain_error("dirichlet: concentrations must be positive");
  }
}

}  // namespace

DirichletSample dirichlet_sample(std::span<const double> concentrations, Rng& rng) {
  check_concentrations(concentrations);
  DirichletSample s;
  s.fractions.resize(concentrations.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < concentrations.size(); ++i) {
    s.fractions[i] = rng.gamma(concentrations[i]);
    sum += s.fractions[i];
  }
  for (double& f : s.fractions) f /= sum;
  s.log_prob = dirichlet_log_prob(concentrations, s.fractions);
  return s;
}

double dirichlet_log_prob(std::span<const double> concentrations,
                          std::span<const double> x) {
  check_concentrations(concentrations);
  if (x.size() != concentrations.size()) {
    throw std::invalid_argument("dirichlet_log_prob: size mismatch");
  }
  double alpha0 = 0.0;
  double logp = 0.0;
  for (std::size_t i = 0; i < concentrations.size(); ++i) {
    const double xi = x[i] > 1e-300 ? x[i] : 1e-300;
    logp += (concentrations[i] - 1.0) * std::log(xi) - std::lgamma(concentrations[i]);
    alpha0 += concentrations[i];
  }
  logp += std::lgamma(alpha0);
  return logp;
}

void dirichlet_log_prob_grad(std::span<const double> concentrations,
                             std::span<const double> x, std::span<double> grad) {
  check_concentrations(concentrations);
  if (x.size() != concentrations.size() || grad.size() != x.size()) {
    throw std::invalid_argument("dirichlet_log_prob_grad: size mismatch");
  }
  double alpha0 = 0.0;
  for (double a : concentrations) alpha0 += a;
  const double psi0 = digamma(alpha0);
  for (std::size_t i = 0; i < concentrations.size(); ++i) {
    const double xi = x[i] > 1e-300 ? x[i] : 1e-300;
    grad[i] = std::log(xi) - digamma(concentrations[i]) + psi0;
  }
}

double dirichlet_entropy(std::span<const double> concentrations) {
  check_concentrations(concentrations);
  double alpha0 = 0.0;
  double log_beta = 0.0;
  for (double a : concentrations) {
    alpha0 += a;
    log_beta += std::lgamma(a);
  }
  log_beta -= std::lgamma(alpha0);
  const double n = static_cast<double>(concentrations.size());
  double h = log_beta + (alpha0 - n) * digamma(alpha0);
  for (double a : concentrations) h -= (a - 1.0) * digamma(a);
  return h;
}

}  // namespace framecast
