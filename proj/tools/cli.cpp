#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "metabo/bo.hpp"
#include "metabo/metaopt.hpp"

namespace metabo::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_file;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t master_seed = 0;

  std::string function;
  std::vector<std::string> functions;
  std::string family;
  std::vector<std::string> tables;
  std::string table_space = "svm";
  std::string interpolation = "nearest";

  std::string bo_space = "gp_ml";
  std::string lambda_file;
  std::vector<std::string> overrides;
  std::string seeds = "0..4";
  std::size_t budget = 100;
  std::size_t meta_budget = 300;
  std::string protocols = "def";
  std::string default_file;
  std::string incumbent_file;
  std::vector<std::string> inputs;
  std::string name = "report";
};

// Config-file keys bound to command-line options; flags win over the file.
struct Binding {
  std::string key;
  CLI::App* owner;
  CLI::Option* option;
  std::function<void(const json&)> assign;
};

std::string seeds_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::uint64_t>());
  if (j.is_array()) {
    std::string s;
    for (const auto& v : j) s += (s.empty() ? "" : ",") + std::to_string(v.get<std::uint64_t>());
    return s;
  }
  throw UsageError("seeds: expected a string, integer or array");
}

template <typename T>
CLI::Option* bind_opt(CLI::App* app, std::vector<Binding>& bindings, const std::string& flag, const std::string& key,
                      T& var, const std::string& help) {
  auto* opt = app->add_option(flag, var, help);
  bindings.push_back({key, app, opt, [&var](const json& j) { var = j.get<T>(); }});
  return opt;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw UsageError("invalid seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = number(part.substr(0, dots)), hi = number(part.substr(dots + 2));
      if (hi < lo) throw UsageError("empty seed range '" + part + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(number(part));
    }
  }
  if (out.empty()) throw UsageError("no seeds given");
  return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string jsonl(const std::vector<RunRecord>& records, bool with_wall) {
  std::string s;
  for (const auto& r : records) {
    if (with_wall) {
      s += json{{"lambda_id", r.lambda_id}, {"function", r.function}, {"seed", r.seed}, {"wall_s", r.wall_s}}.dump();
    } else {
      s += record_json(r).dump();
    }
    s += "\n";
  }
  return s;
}

fs::path output_root(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "out";
}

ConfigurationSpace resolve_bo_space(const std::string& name) {
  const std::string full = name.rfind("bo_", 0) == 0 ? name : "bo_" + name;
  for (auto f : {ModelFamily::rf, ModelFamily::gp_ml, ModelFamily::gp_map, ModelFamily::gp_mcmc})
    if (bo_space_name(f) == full) return bundled_space(full);
  throw UsageError("unknown BO space '" + name + "'; expected rf, gp_ml, gp_map or gp_mcmc");
}

struct Registry {
  std::vector<ObjectiveFunction> functions;

  const ObjectiveFunction& get(const std::string& name) const {
    for (const auto& f : functions)
      if (f.id() == name || f.metadata().short_name == name) return f;
    std::string known;
    for (const auto& f : functions) known += (known.empty() ? "" : ", ") + f.id();
    throw UsageError("unknown function '" + name + "'; registered: " + known);
  }
};

Registry make_registry(const Options& o) {
  Registry r;
  r.functions = artificial_family().members;
  if (!o.tables.empty()) {
    Interpolation interp = Interpolation::nearest;
    if (o.interpolation == "idw" || o.interpolation == "inverse_distance") interp = Interpolation::inverse_distance;
    else if (o.interpolation != "nearest") throw UsageError("unknown interpolation '" + o.interpolation + "'");
    ConfigurationSpace space = [&] {
      try {
        return bundled_space(o.table_space);
      } catch (const std::exception&) {
        throw UsageError("unknown table space '" + o.table_space + "'");
      }
    }();
    for (const auto& t : split_list(o.tables)) {
      try {
        r.functions.push_back(load_tabular_surrogate(t, space, interp));
      } catch (const TabularError& e) {
        throw UsageError(e.what());
      }
    }
  }
  return r;
}

struct Selection {
  std::vector<ObjectiveFunction> functions;
  std::string label;
};

Selection select_functions(const Options& o, const Registry& reg) {
  Selection s;
  const auto listed = split_list(o.functions);
  if (!o.function.empty()) {
    s.functions.push_back(reg.get(o.function));
    s.label = s.functions.front().id();
  } else if (!listed.empty()) {
    for (const auto& f : listed) s.functions.push_back(reg.get(f));
    s.label = listed.size() == 1 ? s.functions.front().id() : "custom";
  } else if (o.family == "artificial" || o.family.empty()) {
    s.functions = artificial_family().members;
    s.label = "artificial";
  } else if (o.family == "tabular") {
    for (const auto& f : reg.functions)
      if (!find_artificial(f.id())) s.functions.push_back(f);
    if (s.functions.empty()) throw UsageError("family 'tabular' is empty; pass --table");
    s.label = "tabular";
  } else {
    throw UsageError("unknown family '" + o.family + "'; expected artificial or tabular");
  }
  return s;
}

Configuration load_lambda(const ConfigurationSpace& space, const std::string& file,
                          const std::vector<std::string>& overrides) {
  Configuration lambda = space.default_configuration();
  try {
    if (!file.empty()) {
      json j = read_json(file);
      if (j.contains("incumbent")) j = j["incumbent"];
      else if (j.contains("lambda")) j = j["lambda"];
      lambda = Configuration::from_json(space, j);
    }
    for (const auto& item : split_list(overrides)) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("override '" + item + "' is not name=value");
      const auto name = item.substr(0, eq), value = item.substr(eq + 1);
      const auto idx = space.find(name);
      if (!idx) throw UsageError("unknown hyperparameter '" + name + "' in " + space.name());
      if (space.parameter(*idx).kind == ParamKind::categorical) {
        lambda = lambda.with_choice(name, value);
      } else {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(value, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != value.size() || value.empty()) throw UsageError("override '" + item + "' needs a number");
        lambda = lambda.with(name, v);
      }
    }
  } catch (const SpaceError& e) {
    throw UsageError(e.what());
  }
  if (auto v = validate(space, lambda); !v.empty()) throw UsageError("invalid configuration: " + v.front().message);
  return lambda;
}

std::string summary_line(const std::string& what, const std::vector<double>& avg, const std::vector<double>& fin) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: time-averaged log10 regret %.3f ± %.3f, final %.3f ± %.3f (%zu runs)",
                what.c_str(), mean(avg), stdev(avg), mean(fin), stdev(fin), avg.size());
  return buf;
}

std::uint64_t label_tag(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int cmd_run(const Options& o, std::ostream& out) {
  const auto reg = make_registry(o);
  if (o.function.empty()) throw UsageError("run needs --function");
  const auto& fn = reg.get(o.function);
  const auto space = resolve_bo_space(o.bo_space);
  const auto lambda = load_lambda(space, o.lambda_file, o.overrides);
  const auto seeds = parse_seeds(o.seeds);
  const fs::path dir = output_root(o) / "run" / fn.id() / (space.name() + "-" + lambda.id());

  auto trajectories = parallel_map<Trajectory>(seeds.size(), o.jobs, [&](std::size_t i) {
    return run_bo(fn, lambda, o.budget, seeds[i]);
  });

  std::vector<double> avg, fin;
  json per_seed = json::array();
  for (const auto& t : trajectories) {
    const auto stem = "seed_" + std::to_string(t.seed);
    write_file(dir / (stem + ".csv"), trajectory_csv(t));
    write_file(dir / (stem + ".json"), trajectory_json(t, lambda).dump(2) + "\n");
    if (!t.valid) throw std::runtime_error("seed " + std::to_string(t.seed) + ": " + t.error);
    avg.push_back(time_averaged_log_regret(t.best, fn.optimum_value()));
    fin.push_back(final_log_regret(t.best, fn.optimum_value()));
    per_seed.push_back({{"seed", t.seed}, {"loss_avg", avg.back()}, {"loss_final", fin.back()}});
  }
  json summary = {{"function", fn.id()},          {"bo_space", space.name()},     {"lambda_id", lambda.id()},
                  {"lambda", lambda.to_json()},   {"budget", o.budget},           {"runs", per_seed},
                  {"loss_avg_mean", mean(avg)},   {"loss_avg_stdev", stdev(avg)}, {"loss_final_mean", mean(fin)},
                  {"loss_final_stdev", stdev(fin)}};
  write_file(dir / "lambda.json", lambda.to_json().dump(2) + "\n");
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  out << summary_line(fn.id() + " " + space.name(), avg, fin) << "\n";
  out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_tune(const Options& o, std::ostream& out) {
  const auto reg = make_registry(o);
  const auto sel = select_functions(o, reg);
  const auto space = resolve_bo_space(o.bo_space);
  const auto seeds = parse_seeds(o.seeds);
  std::vector<std::string> ids;
  for (const auto& f : sel.functions) ids.push_back(f.id());
  const auto instances = make_instances(ids, seeds);
  if (o.meta_budget < instances.size())
    throw UsageError("--meta-budget must be at least functions x seeds = " + std::to_string(instances.size()));

  Rng rng = derive_stream(o.master_seed, label_tag("tune/" + sel.label), 2);
  const auto result = tune(space, bo_evaluator(sel.functions, o.budget), instances, o.meta_budget, rng, o.jobs);

  const fs::path dir = output_root(o) / "tune" / sel.label / (space.name() + "-m" + std::to_string(o.master_seed));
  json inc = {{"bo_space", space.name()},
              {"incumbent", result.incumbent.to_json()},
              {"incumbent_id", result.incumbent.id()},
              {"incumbent_loss", result.incumbent_loss},
              {"runs_used", result.runs_used},
              {"challengers", result.challengers},
              {"replacements", result.replacements},
              {"functions", ids},
              {"seeds", seeds},
              {"budget", o.budget},
              {"meta_budget", o.meta_budget}};
  write_file(dir / "incumbent.json", inc.dump(2) + "\n");
  write_file(dir / "ledger.jsonl", jsonl(result.ledger, false));
  write_file(dir / "timing.jsonl", jsonl(result.ledger, true));
  out << "incumbent " << result.incumbent.id() << " loss " << format_double(result.incumbent_loss) << " after "
      << result.runs_used << " runs (" << result.challengers << " challengers, " << result.replacements
      << " replacements)\n";
  out << result.incumbent.to_json().dump() << "\n";
  out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_protocol(const Options& o, std::ostream& out) {
  const auto reg = make_registry(o);
  const auto sel = select_functions(o, reg);
  const auto space = resolve_bo_space(o.bo_space);
  std::vector<Protocol> protocols;
  for (const auto& p : split_list({o.protocols})) {
    auto parsed = parse_protocol(p);
    if (!parsed) throw UsageError("unknown protocol '" + p + "'; expected def, lofo, all or ind");
    protocols.push_back(*parsed);
  }
  if (protocols.empty()) throw UsageError("no protocols given");

  ProtocolSettings settings;
  settings.tuning_seeds = parse_seeds(o.seeds);
  settings.budget = o.budget;
  settings.meta_budget = o.meta_budget;
  settings.master_seed = o.master_seed;
  settings.jobs = o.jobs;
  try {
    const auto result = run_protocol(protocols, sel.functions, space, settings);
    const fs::path dir =
        output_root(o) / "protocol" / sel.label / (space.name() + "-m" + std::to_string(o.master_seed));
    json incumbents = json::object();
    json validation = json::object();
    for (const auto& row : result.rows) {
      for (const auto& [p, lambda] : row.incumbents)
        incumbents[row.function][std::string(to_string(p))] = lambda.to_json();
      for (const auto& [p, losses] : row.validation) validation[row.function][std::string(to_string(p))] = losses;
    }
    const auto table = protocol_csv(result);
    write_file(dir / "table.csv", table);
    write_file(dir / "incumbents.json", incumbents.dump(2) + "\n");
    write_file(dir / "validation.json", validation.dump(2) + "\n");
    write_file(dir / "ledger.jsonl", jsonl(result.ledger, false));
    write_file(dir / "timing.jsonl", jsonl(result.ledger, true));
    out << table;
    out << "wrote " << dir.string() << "\n";
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return kExitOk;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const auto reg = make_registry(o);
  const auto sel = select_functions(o, reg);
  const auto space = resolve_bo_space(o.bo_space);
  if (o.incumbent_file.empty()) throw UsageError("ablate needs --incumbent");
  const auto start = load_lambda(space, o.default_file, {});
  const auto target = load_lambda(space, o.incumbent_file, {});
  std::vector<std::string> ids;
  for (const auto& f : sel.functions) ids.push_back(f.id());
  const auto instances = make_instances(ids, parse_seeds(o.seeds));
  const auto eval = bo_evaluator(sel.functions, o.budget);

  const auto result = ablation_path(start, target, [&](const Configuration& lambda) {
    return meta_loss(eval, lambda, instances, o.jobs).mean;
  });

  json path = json::array();
  for (const auto& s : result.path)
    path.push_back({{"parameter", s.parameter}, {"loss", s.loss}, {"improvement", s.improvement}});
  const json doc = {{"bo_space", space.name()},
                    {"default", start.to_json()},
                    {"incumbent", target.to_json()},
                    {"default_loss", result.default_loss},
                    {"incumbent_loss", result.incumbent_loss},
                    {"path", path}};
  const fs::path dir = output_root(o) / "ablate" / sel.label / (space.name() + "-" + target.id());
  write_file(dir / "ablation.csv", ablation_csv(result));
  write_file(dir / "ablation.json", doc.dump(2) + "\n");
  out << ablation_csv(result);
  out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> ledgers, bundles;
  for (const auto& in : split_list(o.inputs)) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (name == "ledger.jsonl") ledgers.push_back(e.path());
        else if (name.rfind("seed_", 0) == 0 && e.path().extension() == ".json") bundles.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      (p.extension() == ".jsonl" ? ledgers : bundles).push_back(p);
    } else {
      throw UsageError("missing input " + in);
    }
  }
  if (ledgers.empty() && bundles.empty()) throw UsageError("report found no ledgers or trajectories");
  std::sort(ledgers.begin(), ledgers.end());
  std::sort(bundles.begin(), bundles.end());

  std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> groups;
  for (const auto& path : ledgers) {
    std::ifstream in(path);
    std::string line;
    int bad = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto r = record_from_json(json::parse(line));
        groups[{r.function, r.lambda_id}].push_back(std::move(r));
      } catch (const std::exception&) {
        ++bad;
      }
    }
    if (bad) err << "warning: skipped " << bad << " malformed line(s) in " << path.string() << "\n";
  }

  std::string csv = "function,lambda_id,n,loss_avg_mean,loss_avg_stdev,loss_final_mean,loss_final_stdev,failed\n";
  for (const auto& [key, records] : groups) {
    std::vector<double> avg, fin;
    int failed = 0;
    for (const auto& r : records) {
      avg.push_back(r.loss_avg);
      fin.push_back(r.loss_final);
      failed += r.failed ? 1 : 0;
    }
    csv += key.first + "," + key.second + "," + std::to_string(records.size()) + "," + format_double(mean(avg)) + "," +
           format_double(stdev(avg)) + "," + format_double(mean(fin)) + "," + format_double(stdev(fin)) + "," +
           std::to_string(failed) + "\n";
  }

  json series = json::array();
  for (const auto& path : bundles) {
    json b;
    try {
      std::ifstream in(path);
      b = json::parse(in);
    } catch (const std::exception&) {
      err << "warning: unreadable trajectory " << path.string() << "\n";
      continue;
    }
    const auto fid = b.value("function", std::string());
    const auto fn = find_artificial(fid);
    if (!fn || !b.contains("raw_best")) {
      err << "warning: no known optimum for '" << fid << "' in " << path.string() << "\n";
      continue;
    }
    std::vector<double> regret;
    for (double v : b["raw_best"].get<std::vector<double>>())
      regret.push_back(std::log10(std::max(v - fn->optimum_value(), kRegretFloor)));
    series.push_back({{"function", fid},
                      {"lambda_id", b.value("lambda_id", std::string())},
                      {"seed", b.value("seed", std::uint64_t{0})},
                      {"log10_regret", regret}});
  }

  const fs::path dir = output_root(o) / "report" / o.name;
  write_file(dir / "aggregate.csv", csv);
  write_file(dir / "plot_data.json", json{{"series", series}}.dump(2) + "\n");
  out << csv;
  out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Bayesian optimization with tunable hyperparameters", "metabo"};
  app.require_subcommand(1);
  app.fallthrough();
  std::vector<Binding> bindings;
  app.add_option("--config", o.config_file, "JSON file with option values (flags take precedence)");
  bind_opt(&app, bindings, "--out", "out", o.out_dir, "output root (default $METABO_OUT or ./out)");
  bind_opt(&app, bindings, "--jobs", "jobs", o.jobs, "parallel target-BO runs")->check(CLI::PositiveNumber);
  bind_opt(&app, bindings, "--master-seed", "master_seed", o.master_seed, "seed of the configurator streams");

  auto common = [&](CLI::App* sub) {
    bind_opt(sub, bindings, "--bo-space", "bo_space", o.bo_space, "rf, gp_ml, gp_map or gp_mcmc");
    bind_opt(sub, bindings, "--seeds", "seeds", o.seeds, "seed list, e.g. 0..4 or 0,3,7");
    bind_opt(sub, bindings, "--budget", "budget", o.budget, "function evaluations per BO run");
    bind_opt(sub, bindings, "--table", "tables", o.tables, "CSV tabular surrogate(s) to register");
    bind_opt(sub, bindings, "--table-space", "table_space", o.table_space, "bundled space of the tables");
    bind_opt(sub, bindings, "--interpolation", "interpolation", o.interpolation, "nearest or idw");
  };
  auto selection = [&](CLI::App* sub) {
    bind_opt(sub, bindings, "--functions", "functions", o.functions, "function ids (comma separated)");
    bind_opt(sub, bindings, "--family", "family", o.family, "artificial or tabular");
  };

  auto* run_cmd = app.add_subcommand("run", "run target BO on one function");
  common(run_cmd);
  bind_opt(run_cmd, bindings, "--function", "function", o.function, "function id");
  bind_opt(run_cmd, bindings, "--lambda", "lambda", o.lambda_file, "JSON configuration of the BO hyperparameters");
  bind_opt(run_cmd, bindings, "--set", "set", o.overrides, "hyperparameter override name=value");

  auto* tune_cmd = app.add_subcommand("tune", "tune BO hyperparameters over function instances");
  common(tune_cmd);
  selection(tune_cmd);
  bind_opt(tune_cmd, bindings, "--meta-budget", "meta_budget", o.meta_budget, "target-BO runs available to the tuner");

  auto* protocol_cmd = app.add_subcommand("protocol", "evaluate DEF/LOFO/ALL/IND protocols");
  common(protocol_cmd);
  selection(protocol_cmd);
  bind_opt(protocol_cmd, bindings, "--meta-budget", "meta_budget", o.meta_budget, "target-BO runs per tuning");
  bind_opt(protocol_cmd, bindings, "--protocols", "protocols", o.protocols, "comma list of def, lofo, all, ind");

  auto* ablate_cmd = app.add_subcommand("ablate", "ablation path from default to incumbent");
  common(ablate_cmd);
  selection(ablate_cmd);
  bind_opt(ablate_cmd, bindings, "--default", "default", o.default_file, "start configuration (default: space default)");
  bind_opt(ablate_cmd, bindings, "--incumbent", "incumbent", o.incumbent_file, "target configuration JSON");

  auto* report_cmd = app.add_subcommand("report", "aggregate ledgers and trajectories");
  bind_opt(report_cmd, bindings, "--input", "inputs", o.inputs, "ledger files, trajectory bundles or directories");
  bind_opt(report_cmd, bindings, "--name", "name", o.name, "report name");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
    if (!o.config_file.empty()) {
      const json cfg = read_json(o.config_file);
      for (auto& b : bindings) {
        if (b.option->count() > 0 || !cfg.contains(b.key)) continue;
        if (b.owner != &app && !b.owner->parsed()) continue;
        try {
          if (b.key == "seeds") b.assign(json(seeds_from_json(cfg[b.key])));
          else if ((b.key == "functions" || b.key == "tables" || b.key == "set" || b.key == "inputs") &&
                   cfg[b.key].is_string())
            b.assign(json::array({cfg[b.key]}));
          else b.assign(cfg[b.key]);
        } catch (const json::exception& e) {
          throw UsageError("config key '" + b.key + "': " + e.what());
        }
      }
    }
    if (o.jobs < 1) throw UsageError("--jobs must be positive");

    if (run_cmd->parsed()) return cmd_run(o, out);
    if (tune_cmd->parsed()) return cmd_tune(o, out);
    if (protocol_cmd->parsed()) return cmd_protocol(o, out);
    if (ablate_cmd->parsed()) return cmd_ablate(o, out);
    return cmd_report(o, out, err);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace metabo::cli
