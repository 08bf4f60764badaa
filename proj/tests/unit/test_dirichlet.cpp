#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "framecast/dirichlet.hpp"

using namespace framecast;

TEST_SUITE("dirichlet") {

TEST_CASE("digamma agrees with known values and the recurrence") {
  // psi(1) = -Euler-Mascheroni.
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-10));
  CHECK(digamma(0.5) == doctest::Approx(-1.9635100260214235).epsilon(1e-10));
  for (double x : {0.3, 1.7, 4.2, 11.0}) {
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-10));
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
}

TEST_CASE("uniform concentrations give the flat simplex density") {
  // Dirichlet(1,1,1) density = Gamma(3) = 2 everywhere.
  Rng rng(1);
  std::vector<double> alpha{1.0, 1.0, 1.0};
  for (int i = 0; i < 100; ++i) {
    auto s = dirichlet_sample(alpha, rng);
    CHECK(s.log_prob == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("huge concentrations collapse to the simplex center") {
  Rng rng(2);
  std::vector<double> alpha(4, 1e6);
  auto s = dirichlet_sample(alpha, rng);
  for (double f : s.fractions) CHECK(f == doctest::Approx(0.25).epsilon(2e-2));
}

TEST_CASE("Beta(2,2) density at the midpoint is 1.5") {
  std::vector<double> alpha{2.0, 2.0};
  std::vector<double> x{0.5, 0.5};
  CHECK(dirichlet_log_prob(alpha, x) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-12));
  CHECK(dirichlet_log_prob(alpha, x) == doctest::Approx(0.4055).epsilon(1e-3));
}

TEST_CASE("samples live strictly inside the simplex and sum to one") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> alpha(1 + static_cast<int>(rng.uniform() * 7));
    for (double& a : alpha) a = rng.uniform(0.2, 8.0);
    auto s = dirichlet_sample(alpha, rng);
    double sum = 0.0;
    for (double f : s.fractions) {
      CHECK(f > 0.0);
      sum += f;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(std::isfinite(s.log_prob));
  }
}

TEST_CASE("the two-component density integrates to one") {
  // Quadrature of exp(log_prob) over x in (0,1) with x2 = 1-x. The
  // substitution x = sin^2(theta) clusters nodes at the endpoints where
  // the density can have unbounded derivatives.
  for (auto alpha : {std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0},
                     std::vector<double>{1.7, 3.2}, std::vector<double>{5.5, 1.2}}) {
    const int n = 200000;  // Simpson needs even n
    const double h = (M_PI / 2.0) / n;
    auto f = [&](double theta) {
      const double s = std::sin(theta);
      const double x = s * s;
      if (x <= 0.0 || x >= 1.0) return 0.0;
      std::vector<double> point{x, 1.0 - x};
      return std::exp(dirichlet_log_prob(alpha, point)) * 2.0 * s * std::cos(theta);
    };
    double integral = f(0.0) + f(M_PI / 2.0);
    for (int i = 1; i < n; ++i) {
      integral += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    integral *= h / 3.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("log-density gradient matches finite differences") {
  std::vector<double> alpha{1.6, 2.4, 3.7};
  std::vector<double> x{0.2, 0.5, 0.3};
  std::vector<double> grad(3);
  dirichlet_log_prob_grad(alpha, x, grad);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    auto ap = alpha, am = alpha;
    ap[i] += h;
    am[i] -= h;
    double numeric =
        (dirichlet_log_prob(ap, x) - dirichlet_log_prob(am, x)) / (2.0 * h);
    CHECK(grad[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("entropy of the flat two-component distribution is zero") {
  std::vector<double> flat{1.0, 1.0};
  CHECK(dirichlet_entropy(flat) == doctest::Approx(0.0).epsilon(1e-12));
  // Concentration reduces entropy.
  std::vector<double> sharp{50.0, 50.0};
  CHECK(dirichlet_entropy(sharp) < dirichlet_entropy(flat));
}

TEST_CASE("nonpositive concentrations are rejected") {
  Rng rng(4);
  std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(dirichlet_sample(bad, rng), std::domain_error);
  std::vector<double> x{0.5, 0.5};
  CHECK_THROWS_AS(dirichlet_log_prob(bad, x), std::domain_error);
}

}  // TEST_SUITE
