#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "holdermc/empirical.hpp"
#include "holdermc/rng.hpp"

using namespace holdermc;

TEST_CASE("normal cdf values") {
  CHECK(normal_cdf(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(0.0, 7.3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0, 1.0) == doctest::Approx(0.8413447461).epsilon(1e-10));
  const double sigma2 = 0.19;
  const double s = std::sqrt(sigma2);
  CHECK(normal_cdf(s, sigma2) == doctest::Approx(0.8413447461).epsilon(1e-10));
  CHECK(normal_cdf(-s, sigma2) + normal_cdf(s, sigma2) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(normal_cdf(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(normal_cdf(0.0, -1.0), std::domain_error);
}

TEST_CASE("regularized incomplete gamma") {
  // P(1/2, x) = erf(sqrt(x))
  for (double x : {0.01, 0.3, 1.0, 2.5, 10.0}) {
    CHECK(gamma_cdf_regularized(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  }
  // P(1, x) = 1 - e^{-x}
  for (double x : {0.1, 1.0, 5.0}) {
    CHECK(gamma_cdf_regularized(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  }
  CHECK(gamma_cdf_regularized(0.5, 0.0) == 0.0);
  CHECK(gamma_cdf_regularized(0.5, -1.0) == 0.0);
  CHECK(gamma_cdf_regularized(3.0, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
  // monotone in x
  double prev = 0.0;
  for (double x = 0.05; x < 8.0; x += 0.05) {
    const double v = gamma_cdf_regularized(1.0 / 3.0, x);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("empirical distribution basics") {
  EmpiricalDistribution emp({3.0, 1.0, 2.0, 2.0});
  CHECK(emp.jump_points() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(emp.cdf(0.5) == 0.0);
  CHECK(emp.cdf(1.0) == doctest::Approx(0.25));
  CHECK(emp.cdf(1.5) == doctest::Approx(0.25));
  CHECK(emp.cdf(2.0) == doctest::Approx(0.75));  // tie merged into one jump
  CHECK(emp.cdf(3.0) == 1.0);
  CHECK(emp.cdf(99.0) == 1.0);
  CHECK_THROWS_AS(EmpiricalDistribution(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalDistribution({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalDistribution({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("weighted empirical distribution with equal weights matches unweighted") {
  std::vector<double> vals = {0.3, -1.2, 0.3, 2.0, 0.7};
  EmpiricalDistribution a(vals);
  EmpiricalDistribution b(vals, std::vector<double>(vals.size(), 2.5));
  for (double t = -2.0; t < 3.0; t += 0.1) {
    CHECK(a.cdf(t) == doctest::Approx(b.cdf(t)).epsilon(1e-14));
  }
  CHECK(two_sample_ks(a, b) < 1e-14);
}

TEST_CASE("one-point sample against a continuous law") {
  // mass at the median of N(0,1): both one-sided gaps are exactly 1/2
  EmpiricalDistribution emp({0.0});
  CHECK(kolmogorov_distance(emp, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kolmogorov distance checks both sides of each jump") {
  // two points at +-1 vs N(0,1): the sup is attained from the left at -1
  // and from the right at 1, value Phi(1) - 1/2
  EmpiricalDistribution emp({-1.0, 1.0});
  const double expect = normal_cdf(1.0, 1.0) - 0.5;
  CHECK(kolmogorov_distance(emp, 1.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("DKW bound holds for a large normal sample") {
  const int n = 100000;
  CounterRng rng(RngStream{60, 0});
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.next_normal();
  EmpiricalDistribution emp(std::move(z));
  // alpha = 0.01 DKW radius ~ 0.00515; spec-level envelope 0.006
  CHECK(kolmogorov_distance(emp, 1.0) <= 0.006);
}

TEST_CASE("two-sample distance closed cases") {
  EmpiricalDistribution a({1.0, 2.0, 3.0});
  CHECK(two_sample_ks(a, a) == 0.0);
  EmpiricalDistribution zero({0.0}), one({1.0});
  CHECK(two_sample_ks(zero, one) == doctest::Approx(1.0).epsilon(1e-14));
  // half-overlapping supports
  EmpiricalDistribution c({0.0, 1.0}), d({1.0, 2.0});
  CHECK(two_sample_ks(c, d) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("two-sample distance between near-identical laws") {
  const int n = 10000;
  CounterRng rng(RngStream{61, 0});
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) a[i] = rng.next_normal();
  for (int i = 0; i < n; ++i) b[i] = rng.next_normal();
  const double d = two_sample_ks(EmpiricalDistribution(std::move(a)),
                                 EmpiricalDistribution(std::move(b)));
  // two-sample DKW at 99%: sqrt(ln(2/alpha)/n) * sqrt(2) ~ 0.033
  CHECK(d <= 0.033);
  CHECK(d > 0.0);
}

TEST_CASE("weighted distribution normalizes to one despite roundoff") {
  CounterRng rng(RngStream{62, 0});
  std::vector<double> vals(1000), weights(1000);
  for (int i = 0; i < 1000; ++i) {
    vals[i] = rng.next_normal();
    weights[i] = rng.next_open() * 1e-7;
  }
  EmpiricalDistribution emp(vals, weights);
  CHECK(emp.cumulative().back() == 1.0);
  CHECK(emp.cdf(1e300) == 1.0);
}
