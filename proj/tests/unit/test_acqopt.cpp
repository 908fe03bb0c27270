#include <doctest.h>

#include <cmath>

#include "metabo/acqopt.hpp"

using namespace metabo;

namespace {

ConfigurationSpace square() {
  return ConfigurationSpace("sq", {Hyperparameter::continuous("a", 0.0, 1.0, 0.5),
                                   Hyperparameter::continuous("b", 0.0, 1.0, 0.5)});
}

double dist(const Configuration& c, double a, double b) { return std::hypot(c.number("a") - a, c.number("b") - b); }

}  // namespace

TEST_CASE("constant acquisition returns a valid probe") {
  const auto s = square();
  Rng rng(1);
  const auto r = optimize_acquisition([](const Configuration&) { return 1.0; }, s, {}, rng);
  CHECK(validate(s, r.config).empty());
  CHECK(r.value == 1.0);
}

TEST_CASE("finds a known target closer than random search") {
  const auto s = square();
  auto acq = [](const Configuration& c) { return -dist(c, 0.83, 0.21); };
  Rng rng(2);
  const auto r = optimize_acquisition(acq, s, {}, rng);
  CHECK(-r.value < 0.05);

  // Random-search oracle with 10^5 samples.
  Rng o(3);
  double best = 1e9;
  for (int i = 0; i < 100000; ++i) best = std::min(best, dist(sample_configuration(s, o), 0.83, 0.21));
  CHECK(best < 0.05);
  CHECK(-r.value <= best + 0.05);
}

TEST_CASE("no local steps returns the best probe or seed") {
  const auto s = square();
  IlsBudget b;
  b.n_local_steps = 0;
  b.n_random_probes = 200;
  History h;
  h.add(s.default_configuration().with("a", 0.9).with("b", 0.9), 1.0);
  std::vector<double> seen;
  auto acq = [&](const Configuration& c) {
    const double v = c.number("a") + c.number("b");
    seen.push_back(v);
    return v;
  };
  Rng rng(4);
  const auto r = optimize_acquisition(acq, s, h, rng, b);
  CHECK(r.evaluations == 201);
  double best_fresh = -1;
  for (std::size_t i = 0; i < 200; ++i) best_fresh = std::max(best_fresh, seen[i]);
  // the history point is a seed but is never returned
  CHECK(r.value == best_fresh);
  CHECK_FALSE(h.contains(r.config));
}

TEST_CASE("argmax over random probes and evaluation bound") {
  const auto s = bundled_space("svm");
  IlsBudget b;
  b.n_random_probes = 300;
  b.n_restarts = 4;
  b.n_local_steps = 10;
  Rng rng(5);
  History h;
  for (int i = 0; i < 6; ++i) h.add(sample_configuration(s, rng), i);
  std::vector<double> random_values;
  int calls = 0;
  auto acq = [&](const Configuration& c) {
    ++calls;
    const double v = std::sin(3 * std::log(c.number("cost"))) + (c.choice("kernel") == "radial" ? 0.5 : 0.0);
    if (static_cast<int>(random_values.size()) < b.n_random_probes) random_values.push_back(v);
    return v;
  };
  const auto r = optimize_acquisition(acq, s, h, rng, b);
  CHECK(validate(s, r.config).empty());
  for (double v : random_values) CHECK(r.value >= v);
  CHECK(calls <= b.n_random_probes + b.n_restarts * (1 + b.n_local_steps * b.neighbors_per_step));
}

TEST_CASE("collision with history is perturbed") {
  const ConfigurationSpace s("ab", {Hyperparameter::categorical("c", {"a", "b"}, "a")});
  History h;
  h.add(s.default_configuration(), 0.0);
  h.add(s.default_configuration().with_choice("c", "b"), 1.0);
  Rng rng(6);
  IlsBudget b;
  b.n_random_probes = 5;
  const auto r = optimize_acquisition([](const Configuration&) { return 0.0; }, s, h, rng, b);
  CHECK(validate(s, r.config).empty());

  const auto sq = square();
  History h2;
  h2.add(sq.default_configuration(), 0.0);
  Rng rng2(7);
  // an acquisition peaked exactly at the observed point still yields a fresh point
  const auto r2 = optimize_acquisition(
      [](const Configuration& c) { return c.number("a") == 0.5 && c.number("b") == 0.5 ? 1.0 : 0.0; }, sq, h2, rng2);
  CHECK_FALSE(h2.contains(r2.config));
}
