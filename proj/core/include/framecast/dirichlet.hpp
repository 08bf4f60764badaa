#pragma once

#include <span>
#include <vector>

#include "framecast/rng.hpp"

namespace framecast {

/// Digamma (psi) via recurrence into the asymptotic regime.
double digamma(double x);

struct DirichletSample {
  std::vector<double> fractions;  // on the simplex, strictly positive
  double log_prob = 0.0;          // exact log-density at the sample
};

/// Samples a Dirichlet distribution by normalizing Gamma draws.
/// Concentrations must be strictly positive.
DirichletSample dirichlet_sample(std::span<const double> concentrations, Rng& rng);

/// Exact log-density of the Dirichlet at a point on the simplex.
double dirichlet_log_prob(std::span<const double> concentrations,
                          std::span<const double> x);

/// d log p(x) / d alpha_i = ln x_i - psi(alpha_i) + psi(sum alpha).
void dirichlet_log_prob_grad(std::span<const double> concentrations,
                             std::span<const double> x, std::span<double> grad);

double dirichlet_entropy(std::span<const double> concentrations);

}  // namespace framecast
