#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "metabo/benchfn.hpp"

using namespace metabo;

namespace {

Configuration point(const ObjectiveFunction& f, const std::vector<double>& x) {
  auto c = f.space().default_configuration();
  for (std::size_t i = 0; i < x.size(); ++i) c = c.with(f.space().parameter(i).name, x[i]);
  return c;
}

// Literal textbook formula, kept separate from the library implementation.
double branin_ref(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double b = 5.1 / (4 * pi * pi), c = 5 / pi, t = 1 / (8 * pi);
  return std::pow(x2 - b * x1 * x1 + c * x1 - 6, 2) + 10 * (1 - t) * std::cos(x1) + 10;
}

std::filesystem::path temp_csv(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("artificial family") {
  const auto& fam = artificial_family();
  CHECK(fam.members.size() == 10);
  for (const auto& f : fam.members) {
    for (const auto& m : f.metadata().minimizers)
      CHECK_MESSAGE(std::abs(f.evaluate(point(f, m)) - f.optimum_value()) < 1e-4, f.id());
    CHECK(f.metadata().value_range > 0.0);
  }
  CHECK(find_artificial("Bra")->id() == "branin");
  CHECK_FALSE(find_artificial("nope"));
  CHECK_THROWS_AS(artificial_function("nope"), EvaluationError);
}

TEST_CASE("published values") {
  const auto bra = artificial_function("branin");
  CHECK(std::abs(bra.evaluate(point(bra, {std::numbers::pi, 2.275})) - 0.397887) < 1e-5);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto c = sample_configuration(bra.space(), rng);
    CHECK(bra.evaluate(c) == doctest::Approx(branin_ref(c.number("x0"), c.number("x1"))).epsilon(1e-12));
  }
  const auto gold = artificial_function("goldstein_price");
  CHECK(gold.evaluate(point(gold, {0.0, -1.0})) == doctest::Approx(3.0).epsilon(1e-12));
  const auto ros = artificial_function("rosenbrock2d");
  CHECK(ros.evaluate(point(ros, {1.0, 1.0})) == 0.0);
  CHECK(ros.optimum_value() == 0.0);
  CHECK(std::abs(artificial_function("hartmann6").optimum_value() - -3.32237) < 1e-4);
}

TEST_CASE("optimum is a lower bound") {
  Rng rng(7);
  for (const auto& f : artificial_family().members)
    for (int i = 0; i < 2000; ++i) CHECK(f.evaluate(sample_configuration(f.space(), rng)) >= f.optimum_value() - 1e-9);
}

TEST_CASE("evaluation rejects foreign configurations") {
  const auto bra = artificial_function("branin");
  const auto cam = artificial_function("camelback");
  CHECK_THROWS_AS(bra.evaluate(cam.space().default_configuration()), EvaluationError);
}

TEST_CASE("optima census on small cases") {
  CHECK(count_local_optima(artificial_function("branin"), 100) == 3);
  CHECK(count_local_optima(artificial_function("rosenbrock2d"), 100) == 1);
  const auto c = count_optima(artificial_function("camelback"), 100);
  CHECK(c.local == 6);
  CHECK(c.global == 2);
  CHECK_THROWS(count_optima(artificial_function("hartmann6"), 10));
}

TEST_CASE("tabular surrogate") {
  const ConfigurationSpace s("t", {Hyperparameter::continuous("x", 0.0, 1.0, 0.0)});
  const auto path = temp_csv("metabo_tab1.csv", "x,y\n0,1.0\n1,0.5\n");
  const auto f = load_tabular_surrogate(path, s, Interpolation::nearest);
  CHECK(f.evaluate(s.default_configuration().with("x", 0.9)) == 0.5);
  CHECK(f.evaluate(s.default_configuration().with("x", 0.0)) == 1.0);
  CHECK(f.optimum_value() == 0.5);

  const auto g = load_tabular_surrogate(path, s, Interpolation::inverse_distance);
  CHECK(g.evaluate(s.default_configuration().with("x", 1.0)) == 0.5);
  // weights 1/0.25^2 and 1/0.75^2
  const double w0 = 1 / 0.0625, w1 = 1 / 0.5625;
  CHECK(g.evaluate(s.default_configuration().with("x", 0.25)) == doctest::Approx((w0 * 1.0 + w1 * 0.5) / (w0 + w1)));

  CHECK_THROWS_AS(load_tabular_surrogate(temp_csv("metabo_tab2.csv", "x,y\n"), s, Interpolation::nearest),
                  TabularError);
  CHECK_THROWS_AS(load_tabular_surrogate(temp_csv("metabo_tab3.csv", "z,y\n0,1\n"), s, Interpolation::nearest),
                  TabularError);
  CHECK_THROWS_AS(load_tabular_surrogate(temp_csv("metabo_tab4.csv", "x,y\n2,1\n"), s, Interpolation::nearest),
                  TabularError);
}

TEST_CASE("tabular svm rows with inactive cells") {
  const auto svm = bundled_space("svm");
  const auto path = temp_csv("metabo_svm.csv",
                             "cost,kernel,degree,gamma,y\n"
                             "1,0,,,0.3\n"
                             "10,2,,0.5,0.1\n"
                             "0.01,1,3,2,0.7\n");
  const auto f = load_tabular_surrogate(path, svm, Interpolation::nearest);
  CHECK(f.optimum_value() == 0.1);
  CHECK(f.evaluate(svm.default_configuration()) == 0.3);
  const auto radial = svm.default_configuration().with_choice("kernel", "radial").with("cost", 10).with("gamma", 0.5);
  CHECK(f.evaluate(radial) == 0.1);
}
