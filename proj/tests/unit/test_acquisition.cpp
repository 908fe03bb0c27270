#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "metabo/acquisition.hpp"

using namespace metabo;

namespace {

double mc_ei(double mu, double sigma, double f_star, double par, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> y(mu, sigma);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::max(0.0, f_star - par - y(rng));
  return s / n;
}

}  // namespace

TEST_CASE("expected improvement") {
  CHECK(ei(2.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(ei(0.5, 0.0, 1.0, 0.1) == doctest::Approx(0.4));
  CHECK(ei(0.0, 1.0, 0.0, 0.0) == doctest::Approx(0.398942).epsilon(1e-6));
  CHECK(ei(0.0, 1.0, 1.0, 0.0) == doctest::Approx(1.08332).epsilon(1e-5));
  CHECK(std::abs(ei(0.0, 1.0, 0.0, 0.0) - mc_ei(0.0, 1.0, 0.0, 0.0, 1'000'000, 1)) < 3e-3);
  CHECK(std::abs(ei(0.0, 1.0, 1.0, 0.0) - mc_ei(0.0, 1.0, 1.0, 0.0, 1'000'000, 2)) < 3e-3);
}

TEST_CASE("probability of improvement") {
  CHECK(pi(1.0, 1.0, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(pi(0.0, 0.0, 1.0, 0.5) == 1.0);
  CHECK(pi(0.0, 0.0, 1.0, 1.0) == 0.0);
  CHECK(pi(0.0, 2.0, 2.0, 1.0) == doctest::Approx(0.69146).epsilon(1e-5));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> y(0.0, 2.0);
  int below = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) below += y(rng) < 1.0;
  CHECK(std::abs(below / double(n) - pi(0.0, 2.0, 2.0, 1.0)) < 2e-3);
}

TEST_CASE("lower confidence bound") {
  CHECK(lcb(1.5, 0.0, 3.0) == -1.5);
  CHECK(lcb(1.0, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(lcb(1.0, 0.5, 0.2) > lcb(1.0, 0.5, 0.1));
}

TEST_CASE("acquisition properties") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0), s(0.01, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double mu = u(rng), sigma = s(rng), f = u(rng), c = u(rng);
    CHECK(ei(mu, sigma, f, 0.1) >= 0.0);
    CHECK(pi(mu, sigma, f, 0.1) >= 0.0);
    CHECK(pi(mu, sigma, f, 0.1) <= 1.0);
    CHECK(ei(mu, sigma * 1.5, f, 0.0) >= ei(mu, sigma, f, 0.0) - 1e-12);
    CHECK(ei(mu + c, sigma, f + c, 0.0) == doctest::Approx(ei(mu, sigma, f, 0.0)));
    CHECK(pi(mu + c, sigma, f + c, 0.0) == doctest::Approx(pi(mu, sigma, f, 0.0)));
    CHECK(lcb(mu + c, sigma, 0.5) == doctest::Approx(lcb(mu, sigma, 0.5) - c));
  }
  CHECK(ei(1e6, 1.0, 0.0, 0.0) == 0.0);
  CHECK(pi(1e6, 1.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("averaging over samples") {
  const AcquisitionSpec spec;
  const std::vector<Prediction> one{{0.3, 0.4}};
  CHECK(acquire(spec, one, 0.0) == doctest::Approx(acquisition_value(spec, one[0], 0.0)));
  const std::vector<Prediction> same{{0.3, 0.4}, {0.3, 0.4}};
  CHECK(acquire(spec, same, 0.0) == doctest::Approx(acquisition_value(spec, one[0], 0.0)));
  const std::vector<Prediction> two{{0.0, 1.0}, {1.0, 1.0}};
  const double expected = (mc_ei(0.0, 1.0, 0.0, 0.0, 2'000'000, 4) + mc_ei(1.0, 1.0, 0.0, 0.0, 2'000'000, 5)) / 2;
  CHECK(std::abs(acquire(spec, two, 0.0) - expected) < 2e-3);
}
