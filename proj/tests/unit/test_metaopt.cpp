#include <doctest.h>

#include <cmath>
#include <set>

#include "metabo/metaopt.hpp"

using namespace metabo;

namespace {

ConfigurationSpace toy_space() {
  return ConfigurationSpace("toy", {Hyperparameter::continuous("x", 0.0, 1.0, 0.9),
                                    Hyperparameter::categorical("mode", {"a", "b"}, "a"),
                                    Hyperparameter::continuous("y", 0.0, 1.0, 0.5).when("mode", {"b"})});
}

double toy_loss(const Configuration& c, std::uint64_t seed) {
  const double x = *c[c.space().index("x")];
  double l = (x - 0.2) * (x - 0.2) + 0.01 * static_cast<double>(seed);
  if (c.choice("mode") == "b") {
    const double y = *c[c.space().index("y")];
    l += (y - 0.5) * (y - 0.5) - 0.1;
  }
  return l;
}

InstanceEvaluator toy_eval(int* calls = nullptr) {
  return [calls](const Configuration& c, const InstanceKey& k) {
    if (calls) ++*calls;
    const double l = toy_loss(c, k.seed);
    return RunRecord{c.id(), k.function, k.seed, l, l - 1.0, 0.0, false};
  };
}

}  // namespace

TEST_CASE("log regret") {
  const std::vector<double> b{1.0, 0.1, 0.01};
  CHECK(time_averaged_log_regret(b, 0.0) == doctest::Approx(-1.0));
  CHECK(time_averaged_log_regret(std::vector<double>{2.0, 2.0}, 2.0) == doctest::Approx(-10.0));
  CHECK(final_log_regret(std::vector<double>{5.0, 1e-3}, 0.0) == doctest::Approx(-3.0));
  CHECK(final_log_regret(std::vector<double>{1.0}, 0.0) == doctest::Approx(0.0));
  CHECK(final_log_regret(std::vector<double>{-1.0}, 0.0) == doctest::Approx(-10.0));
  CHECK_THROWS(time_averaged_log_regret(std::vector<double>{}, 0.0));
}

TEST_CASE("meta loss averages instances") {
  const auto space = toy_space();
  const auto lambda = space.default_configuration();
  const auto inst = make_instances({"f", "g"}, {0, 1, 2});
  REQUIRE(inst.size() == 6);
  const auto r = meta_loss(toy_eval(), lambda, inst, 3);
  REQUIRE(r.records.size() == 6);
  double expected = 0.0;
  for (const auto& k : inst) expected += toy_loss(lambda, k.seed);
  CHECK(r.mean == doctest::Approx(expected / 6));
  CHECK(r.mean_final == doctest::Approx(expected / 6 - 1.0));
  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(r.records[i].function == inst[i].function);
    CHECK(r.records[i].seed == inst[i].seed);
  }
  // duplicated instances do not move an average of identical terms
  const std::vector<InstanceKey> one{{"f", 1}}, twice{{"f", 1}, {"f", 1}};
  CHECK(meta_loss(toy_eval(), lambda, one).mean == meta_loss(toy_eval(), lambda, twice).mean);
}

TEST_CASE("parallel map keeps order") {
  const auto out = parallel_map<int>(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS(parallel_map<int>(10, 3, [](std::size_t i) -> int {
    if (i == 7) throw std::runtime_error("boom");
    return 0;
  }));
}

TEST_CASE("tune with budget equal to the instance count") {
  const auto space = toy_space();
  const auto inst = make_instances({"f"}, {0, 1, 2});
  Rng rng(1);
  const auto r = tune(space, toy_eval(), inst, inst.size(), rng);
  CHECK(r.challengers == 0);
  CHECK(r.runs_used == 3);
  CHECK(r.incumbent == space.default_configuration());
  CHECK(r.incumbent_loss == doctest::Approx(meta_loss(toy_eval(), r.incumbent, inst).mean));
  CHECK_THROWS(tune(space, toy_eval(), inst, 2, rng));
}

TEST_CASE("tune on a single-configuration space stops") {
  const ConfigurationSpace one("one", {Hyperparameter::categorical("c", {"only"}, "only")});
  const auto inst = make_instances({"f"}, {0, 1});
  InstanceEvaluator single_eval = [](const Configuration& c, const InstanceKey& k) {
    return RunRecord{c.id(), k.function, k.seed, 1.0, 1.0, 0.0, false};
  };
  Rng rng(2);
  const auto r = tune(one, single_eval, inst, 1000, rng);
  CHECK(r.challengers == 0);
  CHECK(r.runs_used == 2);
}

TEST_CASE("tune ledger and incumbent") {
  const auto space = toy_space();
  const auto inst = make_instances({"f", "g"}, {0, 1, 2});
  int calls = 0;
  Rng rng(3);
  const auto r = tune(space, toy_eval(&calls), inst, 200, rng);
  CHECK(r.runs_used <= 200);
  CHECK(r.ledger.size() == r.runs_used);
  CHECK(static_cast<std::size_t>(calls) == r.runs_used);
  CHECK(r.challengers > 0);
  const double def = meta_loss(toy_eval(), space.default_configuration(), inst).mean;
  CHECK(r.incumbent_loss <= def);
  CHECK(r.incumbent_loss == doctest::Approx(meta_loss(toy_eval(), r.incumbent, inst).mean));
  std::size_t inc_runs = 0;
  for (const auto& rec : r.ledger) inc_runs += rec.lambda_id == r.incumbent.id();
  CHECK(inc_runs == inst.size());

  // every challenger fully evaluated lost or tied against the incumbent it faced
  std::map<std::string, std::vector<double>> by_id;
  for (const auto& rec : r.ledger) by_id[rec.lambda_id].push_back(rec.loss_avg);
  for (const auto& [id, losses] : by_id) {
    if (losses.size() != inst.size() || id == r.incumbent.id()) continue;
    double m = 0.0;
    for (double l : losses) m += l;
    CHECK(m / static_cast<double>(losses.size()) >= r.incumbent_loss - 1e-12);
  }

  Rng again(3);
  const auto r2 = tune(space, toy_eval(), inst, 200, again);
  CHECK(r2.incumbent == r.incumbent);
  CHECK(r2.runs_used == r.runs_used);
}

TEST_CASE("racing keeps the better arm") {
  const ConfigurationSpace arms("arms", {Hyperparameter::categorical("arm", {"bad", "good"}, "bad")});
  InstanceEvaluator eval = [](const Configuration& c, const InstanceKey& k) {
    const double l = (c.choice("arm") == "good" ? 0.0 : 1.0) + 0.1 * static_cast<double>(k.seed % 3);
    return RunRecord{c.id(), k.function, k.seed, l, l, 0.0, false};
  };
  const auto inst = make_instances({"f"}, {0, 1, 2, 3, 4, 5, 6, 7});
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    const auto r = tune(arms, eval, inst, 16, rng);
    CHECK(r.incumbent.choice("arm") == "good");
    CHECK(r.replacements == 1);
    CHECK(r.runs_used == 16);
  }
}

TEST_CASE("aborted race does not replace") {
  const ConfigurationSpace arms("arms", {Hyperparameter::categorical("arm", {"bad", "good"}, "bad")});
  InstanceEvaluator eval = [](const Configuration& c, const InstanceKey& k) {
    const double l = c.choice("arm") == "good" ? 0.0 : 1.0;
    return RunRecord{c.id(), k.function, k.seed, l, l, 0.0, false};
  };
  const auto inst = make_instances({"f"}, {0, 1, 2, 3});
  Rng rng(0);
  // 4 for the default, then 1 + 1 + 2 for a full race would need 8
  const auto r = tune(arms, eval, inst, 7, rng);
  CHECK(r.incumbent.choice("arm") == "bad");
  CHECK(r.replacements == 0);
  CHECK(r.runs_used == 6);
}

TEST_CASE("flip toward handles conditional children") {
  const auto svm = bundled_space("svm");
  const auto lin = svm.default_configuration();
  REQUIRE(lin.choice("kernel") == "linear");
  const auto rad = lin.with_choice("kernel", "radial").with("gamma", 0.5);
  const auto flipped = flip_toward(lin, rad, "kernel");
  CHECK(flipped.choice("kernel") == "radial");
  CHECK(*flipped[svm.index("gamma")] == 0.5);
  CHECK(validate(svm, flipped).empty());
  const auto back = flip_toward(rad, lin, "kernel");
  CHECK_FALSE(back.is_active("gamma"));
  CHECK(back == lin);

  CHECK(differing_parameters(lin, rad) == std::vector<std::string>{"kernel"});
  CHECK(differing_parameters(lin, lin).empty());
}

TEST_CASE("ablation path") {
  const ConfigurationSpace space("abl", {Hyperparameter::continuous("p1", 0.0, 1.0, 0.0),
                                         Hyperparameter::continuous("p2", 0.0, 1.0, 0.0),
                                         Hyperparameter::continuous("p3", 0.0, 1.0, 0.0)});
  const auto def = space.default_configuration();
  const auto target = def.with("p1", 1.0).with("p2", 1.0).with("p3", 1.0);
  int calls = 0;
  std::set<std::string> seen;
  auto loss = [&](const Configuration& c) {
    ++calls;
    CHECK(seen.insert(c.id()).second);
    return -2.0 * *c[0] - 0.3 * *c[1] - 0.05 * *c[2];
  };
  const auto r = ablation_path(def, target, loss);
  CHECK(r.default_loss == 0.0);
  CHECK(r.incumbent_loss == doctest::Approx(-2.35));
  REQUIRE(r.path.size() == 3);
  CHECK(r.path[0].parameter == "p1");
  CHECK(r.path[1].parameter == "p2");
  CHECK(r.path[2].parameter == "p3");
  CHECK(r.path[0].improvement == doctest::Approx(2.0 / 2.35));
  CHECK(r.path[2].loss == r.incumbent_loss);
  CHECK(r.path[2].improvement == doctest::Approx(1.0));

  CHECK(calls <= 1 + 1 + 3 + 2 + 1);
  seen.clear();
  CHECK(ablation_path(def, def, loss).path.empty());
  seen.clear();
  const auto single = ablation_path(def, def.with("p2", 1.0), loss);
  REQUIRE(single.path.size() == 1);
  CHECK(single.path[0].parameter == "p2");

  const auto csv = ablation_csv(r);
  CHECK(csv.rfind("step,parameter,loss,improvement\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(ablation_csv(AblationResult{}) == "step,parameter,loss,improvement\n");
}

TEST_CASE("run record json round trip") {
  const RunRecord r{"abcd", "branin", 7, -1.25, -3.5, 0.5, true};
  const auto back = record_from_json(record_json(r, true));
  CHECK(back.lambda_id == r.lambda_id);
  CHECK(back.function == r.function);
  CHECK(back.seed == r.seed);
  CHECK(back.loss_avg == r.loss_avg);
  CHECK(back.loss_final == r.loss_final);
  CHECK(back.failed);
  CHECK_FALSE(record_json(r).contains("wall_s"));
}

TEST_CASE("protocol table") {
  ProtocolResult res;
  ProtocolRow row;
  row.function = "branin";
  std::vector<double> def(10), ind(10);
  for (int i = 0; i < 10; ++i) {
    def[static_cast<std::size_t>(i)] = 1.0 + 0.1 * i;
    ind[static_cast<std::size_t>(i)] = 0.5 + 0.1 * i;
  }
  row.validation[Protocol::def] = def;
  row.validation[Protocol::ind] = ind;
  res.rows.push_back(row);
  ProtocolRow only;
  only.function = "camelback";
  only.validation[Protocol::def] = std::vector<double>(4, 2.0);
  res.rows.push_back(only);
  const auto csv = protocol_csv(res);
  CHECK(csv ==
        "function,DEF,LOFO,ALL,IND,significant\n"
        "branin,1.45 ± 0.30,,,0.95 ± 0.30,IND\n"
        "camelback,2.00 ± 0.00,,,,\n");
  CHECK(parse_protocol("lofo") == Protocol::lofo);
  CHECK(parse_protocol("IND") == Protocol::ind);
  CHECK_FALSE(parse_protocol("x"));
}
