#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "metabo/benchfn.hpp"
#include "metabo/bo.hpp"
#include "metabo/stats.hpp"

namespace metabo {

inline constexpr double kRegretFloor = 1e-10;
inline constexpr std::uint64_t kValidationSeedOffset = 1'000'000;
inline constexpr int kValidationSeeds = 20;
inline constexpr int kMaxAblationFlips = 10;

/// (1/T) sum_t log10(max(best_t - f_opt, eps)).
double time_averaged_log_regret(std::span<const double> best, double f_opt, double eps = kRegretFloor);
double final_log_regret(std::span<const double> best, double f_opt, double eps = kRegretFloor);

struct InstanceKey {
  std::string function;
  std::uint64_t seed = 0;

  bool operator==(const InstanceKey&) const = default;
};

std::vector<InstanceKey> make_instances(const std::vector<std::string>& functions,
                                        const std::vector<std::uint64_t>& seeds);

/// One target-BO run. Failed runs carry the penalty loss.
struct RunRecord {
  std::string lambda_id;
  std::string function;
  std::uint64_t seed = 0;
  double loss_avg = 0.0;
  double loss_final = 0.0;
  double wall_s = 0.0;
  bool failed = false;
};

using InstanceEvaluator = std::function<RunRecord(const Configuration& lambda, const InstanceKey& instance)>;

/// Runs run_bo on registered functions. Invalid trajectories score
/// log10(value range) for both losses and are marked failed.
InstanceEvaluator bo_evaluator(std::vector<ObjectiveFunction> functions, std::size_t budget, RunOptions options = {});

/// Applies `fn` to 0..n-1 on up to `jobs` threads; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn);

struct MetaLossReport {
  std::vector<RunRecord> records;
  double mean = 0.0;        // time-averaged log-regret over instances
  double mean_final = 0.0;  // final log-regret over instances
  int failures = 0;
};

MetaLossReport meta_loss(const InstanceEvaluator& eval, const Configuration& lambda,
                         const std::vector<InstanceKey>& instances, int jobs = 1);

struct TuneResult {
  Configuration incumbent;
  double incumbent_loss = 0.0;  // mean over all tuning instances
  std::vector<RunRecord> ledger;
  std::size_t runs_used = 0;
  int challengers = 0;
  int replacements = 0;
};

/// Random search with racing. The default configuration is evaluated on every
/// instance first; each sampled challenger then runs on subsets of size
/// 1, 2, 4, ... of a shuffled instance order and is dropped as soon as its
/// mean exceeds the incumbent's on the same subset. A challenger replaces the
/// incumbent only with a strictly lower mean on the full set. `meta_budget`
/// counts target-BO runs; a race cut short by the budget is discarded.
TuneResult tune(const ConfigurationSpace& bo_space, const InstanceEvaluator& eval,
                const std::vector<InstanceKey>& instances, std::size_t meta_budget, Rng& rng, int jobs = 1,
                std::optional<Configuration> start = std::nullopt);

enum class Protocol { def, lofo, all, ind };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view s);

struct ProtocolSettings {
  std::vector<std::uint64_t> tuning_seeds{0, 1, 2};
  std::size_t budget = 100;  // evaluations per target-BO run
  std::size_t meta_budget = 300;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  int validation_seeds = kValidationSeeds;
  RunOptions run_options;
};

struct ProtocolRow {
  std::string function;
  std::map<Protocol, std::vector<double>> validation;  // time-averaged losses per validation seed
  std::map<Protocol, Configuration> incumbents;
};

struct ProtocolResult {
  std::vector<ProtocolRow> rows;
  std::vector<RunRecord> ledger;  // tuning and validation runs, in execution order
};

/// Validation always uses seeds kValidationSeedOffset + k, k < validation_seeds.
ProtocolResult run_protocol(const std::vector<Protocol>& protocols, const std::vector<ObjectiveFunction>& family,
                            const ConfigurationSpace& bo_space, const ProtocolSettings& settings);

/// CSV `function,DEF,LOFO,ALL,IND,significant` with "mean ± stdev" cells;
/// `significant` lists protocols better than DEF at p < 0.05 (one-sided
/// paired Wilcoxon over validation seeds).
std::string protocol_csv(const ProtocolResult& result);

struct AblationStep {
  std::string parameter;
  double loss = 0.0;        // loss after this flip
  double improvement = 0.0;  // 0 at the default loss, 1 at the incumbent loss
};

struct AblationResult {
  double default_loss = 0.0;
  double incumbent_loss = 0.0;
  std::vector<AblationStep> path;
};

/// `from` with parameter `name` set to `to`'s value; children that become
/// active take `to`'s values, children that become inactive are dropped.
Configuration flip_toward(const Configuration& from, const Configuration& to, std::string_view name);

/// Parameters active in both with different values.
std::vector<std::string> differing_parameters(const Configuration& a, const Configuration& b);

/// Greedy ablation from `start` toward `target`; each step commits the flip
/// with the lowest loss. Losses are cached per configuration.
AblationResult ablation_path(const Configuration& start, const Configuration& target,
                             const std::function<double(const Configuration&)>& loss,
                             int max_flips = kMaxAblationFlips);

std::string ablation_csv(const AblationResult& result);

nlohmann::json record_json(const RunRecord& r, bool with_wall = false);
RunRecord record_from_json(const nlohmann::json& j);

template <typename T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i] = fn(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            slots[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace metabo
