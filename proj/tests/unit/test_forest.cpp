#include <doctest.h>

#include <cmath>

#include "metabo/forest.hpp"

using namespace metabo;

namespace {

EncodedConfig point(std::initializer_list<double> xs) {
  EncodedConfig e{Eigen::VectorXd(static_cast<Eigen::Index>(xs.size())),
                  Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(static_cast<Eigen::Index>(xs.size()), true)};
  Eigen::Index i = 0;
  for (double x : xs) e.x[i++] = x;
  return e;
}

struct Sample {
  std::vector<EncodedConfig> inputs;
  std::vector<double> ys;
};

Sample random_sample(int n, int d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sample s;
  for (int i = 0; i < n; ++i) {
    EncodedConfig e{Eigen::VectorXd(d), Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(d, true)};
    for (int k = 0; k < d; ++k) e.x[k] = u(rng);
    s.ys.push_back(std::sin(5 * e.x[0]) + e.x[d - 1] * e.x[d - 1]);
    s.inputs.push_back(std::move(e));
  }
  return s;
}

RFConfig exact_config() {
  RFConfig cfg;
  cfg.num_trees = 1;
  cfg.do_bootstrapping = false;
  cfg.min_samples_leaf = 1;
  cfg.min_samples_split = 2;
  cfg.ratio_features = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("constant targets give single leaves") {
  Rng rng(1);
  auto s = random_sample(20, 2, rng);
  std::fill(s.ys.begin(), s.ys.end(), 4.2);
  const auto forest = fit_forest(s.inputs, s.ys, {}, RFConfig{}, rng);
  for (const auto& t : forest.trees()) CHECK(t.leaf_count() == 1);
  const auto p = forest.predict(point({0.3, 0.9}));
  CHECK(p.mean == doctest::Approx(4.2));
  CHECK(p.variance == doctest::Approx(0.0));
}

TEST_CASE("fully grown tree memorizes distinct inputs") {
  Rng rng(2);
  std::vector<EncodedConfig> xs;
  std::vector<double> ys;
  for (int i = 0; i < 15; ++i) {
    xs.push_back(point({i / 15.0}));
    ys.push_back(std::cos(i * 1.7));
  }
  const auto forest = fit_forest(xs, ys, {}, exact_config(), rng);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = forest.predict(xs[i]);
    CHECK(p.mean == doctest::Approx(ys[i]).epsilon(1e-12));
    CHECK(p.variance == 0.0);
  }
}

TEST_CASE("log transform round trip") {
  Rng rng(3);
  std::vector<EncodedConfig> xs = {point({0.1}), point({0.5}), point({0.9})};
  std::vector<double> ys = {1.0, 10.0, 100.0};
  auto cfg = exact_config();
  cfg.log_y_in_tree = true;
  const auto forest = fit_forest(xs, ys, {}, cfg, rng);
  CHECK(forest.log_transformed());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(forest.predict(xs[i]).mean - ys[i]) < 1e-9);
}

TEST_CASE("across-tree variance") {
  using Node = RegressionTree::Node;
  auto leaf = [](double v) {
    Node n;
    n.value = v;
    n.count = 1;
    return RegressionTree({n});
  };
  const Forest two({leaf(1.0), leaf(3.0)}, false, 0.0);
  const auto p = two.predict(point({0.5}));
  CHECK(p.mean == doctest::Approx(2.0));
  CHECK(p.variance == doctest::Approx(2.0));
  const Forest one({leaf(1.0)}, false, 0.0);
  CHECK(one.predict(point({0.5})).variance == 0.0);
}

TEST_CASE("deterministic without bootstrap") {
  Rng r1(5), r2(99);
  const auto s = random_sample(40, 3, r1);
  auto cfg = exact_config();
  cfg.num_trees = 5;
  cfg.min_samples_leaf = 2;
  cfg.min_samples_split = 4;
  const auto a = fit_forest(s.inputs, s.ys, {}, cfg, r1);
  const auto b = fit_forest(s.inputs, s.ys, {}, cfg, r2);
  Rng q(7);
  for (const auto& x : random_sample(30, 3, q).inputs) {
    CHECK(a.predict(x).variance == doctest::Approx(0.0));
    CHECK(a.predict(x).mean == b.predict(x).mean);
  }
}

TEST_CASE("predictions lie within the target range") {
  Rng rng(11);
  const auto s = random_sample(60, 3, rng);
  const auto [lo, hi] = std::minmax_element(s.ys.begin(), s.ys.end());
  for (bool log_y : {false, true}) {
    RFConfig cfg;
    cfg.log_y_in_tree = log_y;
    const auto forest = fit_forest(s.inputs, s.ys, {}, cfg, rng);
    for (const auto& x : random_sample(100, 3, rng).inputs) {
      const auto p = forest.predict(x);
      CHECK(p.mean >= *lo - 1e-9);
      CHECK(p.mean <= *hi + 1e-9);
      CHECK(p.variance >= 0.0);
    }
  }
}

TEST_CASE("leaf sizes respect min_samples_leaf") {
  Rng rng(13);
  const auto s = random_sample(80, 2, rng);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (int leaf : {1, 2, 4, 8, 16}) {
    auto cfg = exact_config();
    cfg.min_samples_leaf = leaf;
    const auto forest = fit_forest(s.inputs, s.ys, {}, cfg, rng);
    const auto& tree = forest.trees().front();
    for (const auto& n : tree.nodes())
      if (n.feature < 0) CHECK(n.count >= leaf);
    CHECK(tree.leaf_count() <= prev);
    prev = tree.leaf_count();
  }
  RFConfig boot;
  boot.min_samples_leaf = 5;
  const auto bootstrapped = fit_forest(s.inputs, s.ys, {}, boot, rng);
  for (const auto& t : bootstrapped.trees())
    for (const auto& n : t.nodes())
      if (n.feature < 0) CHECK(n.count >= 5);
}

TEST_CASE("categorical one-vs-rest split") {
  Rng rng(17);
  std::vector<EncodedConfig> xs;
  std::vector<double> ys;
  for (int rep = 0; rep < 4; ++rep)
    for (int c = 0; c < 3; ++c) {
      xs.push_back(point({static_cast<double>(c)}));
      ys.push_back(c == 1 ? 5.0 : 0.0);
    }
  const auto forest = fit_forest(xs, ys, {0}, exact_config(), rng);
  const auto& root = forest.trees().front().nodes().front();
  CHECK(root.categorical);
  CHECK(root.threshold == 1.0);
  CHECK(forest.predict(point({1.0})).mean == 5.0);
  CHECK(forest.predict(point({2.0})).mean == 0.0);
}
