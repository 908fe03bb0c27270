#include "metabo/metaopt.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

namespace metabo {

double time_averaged_log_regret(std::span<const double> best, double f_opt, double eps) {
  if (best.empty()) throw std::invalid_argument("time_averaged_log_regret: empty trajectory");
  double sum = 0.0;
  for (double b : best) sum += std::log10(std::max(b - f_opt, eps));
  return sum / static_cast<double>(best.size());
}

double final_log_regret(std::span<const double> best, double f_opt, double eps) {
  if (best.empty()) throw std::invalid_argument("final_log_regret: empty trajectory");
  return std::log10(std::max(best.back() - f_opt, eps));
}

std::vector<InstanceKey> make_instances(const std::vector<std::string>& functions,
                                        const std::vector<std::uint64_t>& seeds) {
  std::vector<InstanceKey> out;
  for (const auto& f : functions)
    for (auto s : seeds) out.push_back({f, s});
  return out;
}

InstanceEvaluator bo_evaluator(std::vector<ObjectiveFunction> functions, std::size_t budget, RunOptions options) {
  auto registry = std::make_shared<const std::vector<ObjectiveFunction>>(std::move(functions));
  return [registry, budget, options](const Configuration& lambda, const InstanceKey& key) {
    const ObjectiveFunction* fn = nullptr;
    for (const auto& f : *registry)
      if (f.id() == key.function) fn = &f;
    if (!fn) throw EvaluationError("unregistered function '" + key.function + "'");

    const auto start = std::chrono::steady_clock::now();
    const Trajectory traj = run_bo(*fn, lambda, budget, key.seed, options);
    RunRecord r;
    r.lambda_id = lambda.id();
    r.function = key.function;
    r.seed = key.seed;
    if (traj.valid && traj.best.size() == budget) {
      r.loss_avg = time_averaged_log_regret(traj.best, fn->optimum_value());
      r.loss_final = final_log_regret(traj.best, fn->optimum_value());
    } else {
      r.failed = true;
      r.loss_avg = r.loss_final = std::log10(std::max(fn->metadata().value_range, kRegretFloor));
    }
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };
}

MetaLossReport meta_loss(const InstanceEvaluator& eval, const Configuration& lambda,
                         const std::vector<InstanceKey>& instances, int jobs) {
  MetaLossReport report;
  report.records = parallel_map<RunRecord>(instances.size(), jobs,
                                           [&](std::size_t i) { return eval(lambda, instances[i]); });
  for (const auto& r : report.records) {
    report.mean += r.loss_avg;
    report.mean_final += r.loss_final;
    report.failures += r.failed ? 1 : 0;
  }
  if (!report.records.empty()) {
    report.mean /= static_cast<double>(report.records.size());
    report.mean_final /= static_cast<double>(report.records.size());
  }
  return report;
}

TuneResult tune(const ConfigurationSpace& bo_space, const InstanceEvaluator& eval,
                const std::vector<InstanceKey>& instances, std::size_t meta_budget, Rng& rng, int jobs,
                std::optional<Configuration> start) {
  constexpr int kMaxDuplicateDraws = 1000;
  const std::size_t n = instances.size();
  if (n == 0) throw std::invalid_argument("tune: no instances");
  if (meta_budget < n) throw std::invalid_argument("tune: meta budget smaller than the instance count");

  TuneResult result{start.value_or(bo_space.default_configuration()), 0.0, {}, 0, 0, 0};
  auto run = [&](const Configuration& lambda, const std::vector<std::size_t>& idx) {
    auto records = parallel_map<RunRecord>(idx.size(), jobs, [&](std::size_t k) { return eval(lambda, instances[idx[k]]); });
    result.runs_used += records.size();
    std::vector<double> losses;
    for (auto& r : records) {
      losses.push_back(r.loss_avg);
      result.ledger.push_back(std::move(r));
    }
    return losses;
  };

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> inc_losses = run(result.incumbent, all);
  std::set<std::string> seen{result.incumbent.id()};

  int duplicates = 0;
  while (result.runs_used < meta_budget) {
    Configuration challenger = sample_configuration(bo_space, rng);
    if (!seen.insert(challenger.id()).second) {
      if (++duplicates > kMaxDuplicateDraws) break;
      continue;
    }
    duplicates = 0;
    ++result.challengers;

    std::vector<std::size_t> order = all;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> ch_losses(n, 0.0);
    std::size_t done = 0;
    bool exhausted = false;
    for (std::size_t k = 1;; k *= 2) {
      const std::size_t target = std::min(k, n);
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(done),
                                     order.begin() + static_cast<std::ptrdiff_t>(target));
      if (result.runs_used + batch.size() > meta_budget) {
        exhausted = true;
        break;
      }
      const auto losses = run(challenger, batch);
      for (std::size_t i = 0; i < batch.size(); ++i) ch_losses[batch[i]] = losses[i];
      done = target;

      double ch_sum = 0.0, inc_sum = 0.0;
      for (std::size_t i = 0; i < done; ++i) {
        ch_sum += ch_losses[order[i]];
        inc_sum += inc_losses[order[i]];
      }
      if (ch_sum > inc_sum) break;
      if (done == n) {
        if (ch_sum < inc_sum) {
          result.incumbent = challenger;
          inc_losses = ch_losses;
          ++result.replacements;
        }
        break;
      }
    }
    if (exhausted) break;
  }
  result.incumbent_loss = std::accumulate(inc_losses.begin(), inc_losses.end(), 0.0) / static_cast<double>(n);
  return result;
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::def: return "DEF";
    case Protocol::lofo: return "LOFO";
    case Protocol::all: return "ALL";
    case Protocol::ind: return "IND";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view s) {
  for (auto p : {Protocol::def, Protocol::lofo, Protocol::all, Protocol::ind}) {
    const auto name = to_string(p);
    if (s.size() == name.size() &&
        std::equal(s.begin(), s.end(), name.begin(), [](char a, char b) { return std::toupper(a) == b; }))
      return p;
  }
  return std::nullopt;
}

namespace {

std::uint64_t stream_tag(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ProtocolResult run_protocol(const std::vector<Protocol>& protocols, const std::vector<ObjectiveFunction>& family,
                            const ConfigurationSpace& bo_space, const ProtocolSettings& settings) {
  if (family.empty()) throw std::invalid_argument("run_protocol: empty family");
  const auto eval = bo_evaluator(family, settings.budget, settings.run_options);
  ProtocolResult result;
  for (const auto& f : family) result.rows.push_back({f.id(), {}, {}});

  std::vector<std::uint64_t> validation_seeds;
  for (int k = 0; k < settings.validation_seeds; ++k)
    validation_seeds.push_back(kValidationSeedOffset + static_cast<std::uint64_t>(k));

  auto validate_on = [&](Protocol p, std::size_t member, const Configuration& lambda) {
    const auto report = meta_loss(eval, lambda, make_instances({family[member].id()}, validation_seeds), settings.jobs);
    auto& row = result.rows[member];
    for (const auto& r : report.records) {
      row.validation[p].push_back(r.loss_avg);
      result.ledger.push_back(r);
    }
    row.incumbents.insert_or_assign(p, lambda);
  };
  auto tune_on = [&](const std::vector<std::string>& functions, std::string_view tag) {
    Rng rng = derive_stream(settings.master_seed, stream_tag(tag), 2);
    auto t = tune(bo_space, eval, make_instances(functions, settings.tuning_seeds), settings.meta_budget, rng,
                  settings.jobs);
    result.ledger.insert(result.ledger.end(), t.ledger.begin(), t.ledger.end());
    return t.incumbent;
  };

  for (Protocol p : protocols) {
    switch (p) {
      case Protocol::def:
        for (std::size_t m = 0; m < family.size(); ++m) validate_on(p, m, bo_space.default_configuration());
        break;
      case Protocol::all: {
        std::vector<std::string> ids;
        for (const auto& f : family) ids.push_back(f.id());
        const auto inc = tune_on(ids, "all");
        for (std::size_t m = 0; m < family.size(); ++m) validate_on(p, m, inc);
        break;
      }
      case Protocol::ind:
        for (std::size_t m = 0; m < family.size(); ++m)
          validate_on(p, m, tune_on({family[m].id()}, "ind/" + family[m].id()));
        break;
      case Protocol::lofo:
        if (family.size() < 2) throw std::invalid_argument("run_protocol: LOFO needs at least two functions");
        for (std::size_t m = 0; m < family.size(); ++m) {
          std::vector<std::string> others;
          for (std::size_t o = 0; o < family.size(); ++o)
            if (o != m) others.push_back(family[o].id());
          validate_on(p, m, tune_on(others, "lofo/" + family[m].id()));
        }
        break;
    }
  }
  return result;
}

namespace {

std::string format_cell(const std::vector<double>& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean(v), stdev(v));
  return buf;
}

}  // namespace

std::string protocol_csv(const ProtocolResult& result) {
  std::string out = "function,DEF,LOFO,ALL,IND,significant\n";
  for (const auto& row : result.rows) {
    out += row.function;
    for (auto p : {Protocol::def, Protocol::lofo, Protocol::all, Protocol::ind}) {
      out += ",";
      if (auto it = row.validation.find(p); it != row.validation.end()) out += format_cell(it->second);
    }
    std::string marks;
    if (auto def = row.validation.find(Protocol::def); def != row.validation.end()) {
      for (auto p : {Protocol::lofo, Protocol::all, Protocol::ind}) {
        auto it = row.validation.find(p);
        if (it == row.validation.end() || it->second.size() != def->second.size()) continue;
        auto w = wilcoxon_signed_rank(it->second, def->second);
        if (w && w->p_value < 0.05) marks += (marks.empty() ? "" : ";") + std::string(to_string(p));
      }
    }
    out += "," + marks + "\n";
  }
  return out;
}

Configuration flip_toward(const Configuration& from, const Configuration& to, std::string_view name) {
  const auto& space = from.space();
  const std::size_t target = space.index(name);
  std::vector<std::optional<double>> values(from.values().begin(), from.values().end());
  values[target] = to[target];
  for (std::size_t i = target + 1; i < space.size(); ++i) {
    const auto parent = space.parent_of(i);
    if (!parent) continue;
    const bool active = values[*parent] && space.activated_by(i, *values[*parent]);
    if (!active) {
      values[i].reset();
    } else if (!values[i]) {
      values[i] = to[i] ? to[i] : std::optional<double>(space.parameter(i).default_value);
    }
  }
  return Configuration(space, std::move(values));
}

std::vector<std::string> differing_parameters(const Configuration& a, const Configuration& b) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    if (a[i] && b[i] && *a[i] != *b[i]) out.push_back(a.space().parameter(i).name);
  return out;
}

AblationResult ablation_path(const Configuration& start, const Configuration& target,
                             const std::function<double(const Configuration&)>& loss, int max_flips) {
  std::map<std::string, double> cache;
  auto cached = [&](const Configuration& c) {
    const auto id = c.id();
    if (auto it = cache.find(id); it != cache.end()) return it->second;
    return cache[id] = loss(c);
  };

  AblationResult result;
  result.default_loss = cached(start);
  result.incumbent_loss = cached(target);
  const double span = result.default_loss - result.incumbent_loss;

  Configuration current = start;
  for (int step = 0; step < max_flips; ++step) {
    const auto candidates = differing_parameters(current, target);
    if (candidates.empty()) break;
    std::optional<Configuration> best;
    std::string best_name;
    double best_loss = 0.0;
    for (const auto& name : candidates) {
      auto next = flip_toward(current, target, name);
      const double l = cached(next);
      if (!best || l < best_loss) {
        best = std::move(next);
        best_name = name;
        best_loss = l;
      }
    }
    current = std::move(*best);
    const double improvement = span != 0.0 ? (result.default_loss - best_loss) / span : 0.0;
    result.path.push_back({best_name, best_loss, improvement});
  }
  return result;
}

std::string ablation_csv(const AblationResult& result) {
  std::string out = "step,parameter,loss,improvement\n";
  for (std::size_t i = 0; i < result.path.size(); ++i) {
    const auto& s = result.path[i];
    out += std::to_string(i + 1) + "," + s.parameter + "," + format_double(s.loss) + "," +
           format_double(s.improvement) + "\n";
  }
  return out;
}

nlohmann::json record_json(const RunRecord& r, bool with_wall) {
  nlohmann::json j = {{"lambda_id", r.lambda_id}, {"function", r.function},     {"seed", r.seed},
                      {"loss_avg", r.loss_avg},   {"loss_final", r.loss_final}, {"failed", r.failed}};
  if (with_wall) j["wall_s"] = r.wall_s;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.lambda_id = j.at("lambda_id").get<std::string>();
  r.function = j.at("function").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.loss_avg = j.at("loss_avg").get<double>();
  r.loss_final = j.at("loss_final").get<double>();
  r.wall_s = j.value("wall_s", 0.0);
  r.failed = j.value("failed", false);
  return r;
}

}  // namespace metabo
