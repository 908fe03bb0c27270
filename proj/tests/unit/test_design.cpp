#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "metabo/design.hpp"
#include "metabo/sobol.hpp"

using namespace metabo;

namespace {

ConfigurationSpace cube(int d) {
  std::vector<Hyperparameter> ps;
  for (int i = 0; i < d; ++i) ps.push_back(Hyperparameter::continuous("x" + std::to_string(i), 0.0, 1.0, 0.5));
  return ConfigurationSpace("cube" + std::to_string(d), std::move(ps));
}

}  // namespace

TEST_CASE("sobol prefix") {
  const auto one = sobol_points(1, 3);
  CHECK(one(0, 0) == 0.5);
  CHECK(one(1, 0) == 0.75);
  CHECK(one(2, 0) == 0.25);

  // Reference direction numbers (new-joe-kuo-6.21201), origin skipped.
  const double expected[8][5] = {
      {0.5, 0.5, 0.5, 0.5, 0.5},           {0.75, 0.25, 0.25, 0.25, 0.75},
      {0.25, 0.75, 0.75, 0.75, 0.25},      {0.375, 0.375, 0.625, 0.875, 0.375},
      {0.875, 0.875, 0.125, 0.375, 0.875}, {0.625, 0.125, 0.875, 0.625, 0.625},
      {0.125, 0.625, 0.375, 0.125, 0.125}, {0.1875, 0.3125, 0.9375, 0.4375, 0.5625},
  };
  const auto pts = sobol_points(5, 8);
  for (int i = 0; i < 8; ++i)
    for (int d = 0; d < 5; ++d) CHECK(pts(i, d) == expected[i][d]);

  const auto s = cube(1);
  Rng rng(0);
  const auto design = initial_design(DesignKind::sobol, s, 3, rng);
  CHECK(design[0].number("x0") == 0.5);
  CHECK(design[1].number("x0") == 0.75);
  CHECK(design[2].number("x0") == 0.25);
}

TEST_CASE("latin hypercube bins") {
  Rng rng(1);
  const auto s = cube(2);
  const auto d4 = initial_design(DesignKind::lhd, s, 4, rng);
  for (const char* name : {"x0", "x1"}) {
    std::vector<double> v;
    for (const auto& c : d4) v.push_back(c.number(name));
    std::sort(v.begin(), v.end());
    for (int i = 0; i < 4; ++i) {
      CHECK(v[i] >= i / 4.0);
      CHECK(v[i] < (i + 1) / 4.0);
    }
  }

  for (int n : {1, 7, 50}) {
    const auto d = initial_design(DesignKind::lhd, cube(3), n, rng);
    for (int k = 0; k < 3; ++k) {
      std::set<int> bins;
      for (const auto& c : d) bins.insert(static_cast<int>(std::floor(c.number("x" + std::to_string(k)) * n)));
      CHECK(static_cast<int>(bins.size()) == n);
    }
  }
}

TEST_CASE("designs are valid on conditional spaces") {
  Rng rng(2);
  for (const auto& name : bundled_space_names()) {
    const auto s = bundled_space(name);
    for (auto kind : {DesignKind::random, DesignKind::sobol, DesignKind::lhd}) {
      const auto d = initial_design(kind, s, 17, rng);
      CHECK(d.size() == 17);
      for (const auto& c : d) CHECK(validate(s, c).empty());
    }
  }
}

TEST_CASE("percentile") {
  CHECK(percentile({0, 1, 2}, 50) == 1.0);
  CHECK(percentile({3, 1, 2, 4}, 50) == 2.5);
  CHECK(percentile({5}, 10) == 5.0);
  CHECK(percentile({0, 10}, 5) == doctest::Approx(0.5));
}

TEST_CASE("target transforms") {
  const std::vector<double> ys{0, 1, 2};
  CHECK(transform_y(ys, YTransform::identity, 5) == ys);
  const auto z = transform_y(ys, YTransform::log_scaled, 50);
  CHECK(z[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(z[1] == doctest::Approx(std::log(2.0)));
  CHECK(z[2] == doctest::Approx(std::log(3.0)));
  const auto w = transform_y(ys, YTransform::inv_scaled, 50);
  CHECK(w[0] == doctest::Approx(-1.0));
  CHECK(w[2] == doctest::Approx(-1.0 / 3));

  Rng rng(3);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> y(20);
    for (auto& v : y) v = n(rng);
    for (auto kind : {YTransform::log_scaled, YTransform::inv_scaled})
      for (int perc : {1, 5, 50}) {
        const auto t = transform_y(y, kind, perc);
        for (std::size_t i = 0; i < y.size(); ++i)
          for (std::size_t j = 0; j < y.size(); ++j)
            if (y[i] < y[j]) CHECK(t[i] < t[j]);
      }
  }
}
