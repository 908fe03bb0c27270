#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metabo/configspace.hpp"

namespace metabo {

class EvaluationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FunctionMetadata {
  std::string short_name;
  int local_optima = 0;      // as reported for the benchmark; 0 when unknown
  bool local_at_least = false;  // reported as "> N"
  int global_optima = 0;
  std::vector<std::vector<double>> minimizers;  // in native coordinates
  double value_range = 0.0;  // max - optimum over the domain (estimated)
};

/// A deterministic objective with a known optimum value.
class ObjectiveFunction {
 public:
  using Evaluator = std::function<double(const Configuration&)>;
  using RawEvaluator = std::function<double(std::span<const double>)>;

  ObjectiveFunction(std::string id, ConfigurationSpace space, double optimum_value, Evaluator eval,
                    FunctionMetadata metadata = {}, RawEvaluator raw = {});

  const std::string& id() const { return id_; }
  const ConfigurationSpace& space() const { return space_; }
  double optimum_value() const { return optimum_; }
  const FunctionMetadata& metadata() const { return metadata_; }
  std::size_t dimensionality() const { return space_.size(); }

  /// Throws EvaluationError for configurations outside the space.
  double evaluate(const Configuration& x) const;

  /// Direct evaluation on native coordinates; only set for box-constrained
  /// continuous functions.
  bool has_raw() const { return static_cast<bool>(raw_); }
  double raw(std::span<const double> x) const { return raw_(x); }

 private:
  std::string id_;
  ConfigurationSpace space_;
  double optimum_;
  Evaluator eval_;
  FunctionMetadata metadata_;
  RawEvaluator raw_;
};

inline double evaluate(const ObjectiveFunction& fn, const Configuration& x) { return fn.evaluate(x); }
inline double optimum(const ObjectiveFunction& fn) { return fn.optimum_value(); }

struct FunctionFamily {
  std::string name;
  std::vector<ObjectiveFunction> members;

  const ObjectiveFunction& member(std::string_view id) const;
};

/// Branin, Camelback, GoldsteinPrice, Hartmann3, Hartmann6, Levy2D,
/// Rosenbrock2D, Rosenbrock5D, SinOne, SinTwo.
const FunctionFamily& artificial_family();
std::vector<std::string> artificial_ids();

/// Looks up an artificial function by id ("branin") or short name ("Bra").
std::optional<ObjectiveFunction> find_artificial(std::string_view name);
ObjectiveFunction artificial_function(std::string_view name);

struct OptimaCounts {
  int local = 0;
  int global = 0;
};

/// Grid-based census of local minima for functions of dimension <= 3.
///
/// Every grid-cell centre that is <= all of its 3^d - 1 neighbours seeds a
/// bounded Nelder-Mead polish (initial simplex one cell wide); polished points
/// closer than 1e-3 in the unit cube are merged. A minimum is global when its
/// polished value lies within 1e-6 of the known optimum.
OptimaCounts count_optima(const ObjectiveFunction& fn, int grid_resolution);
int count_local_optima(const ObjectiveFunction& fn, int grid_resolution);

enum class Interpolation { nearest, inverse_distance };

inline constexpr int kIdwNeighbors = 5;
inline constexpr double kIdwPower = 2.0;

class TabularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Table-backed stand-in for a surrogate benchmark. Rows are configurations
/// of `space`; eval interpolates in the encoded unit cube.
ObjectiveFunction tabular_surrogate(std::string id, const ConfigurationSpace& space, std::vector<Configuration> rows,
                                    std::vector<double> ys, Interpolation interpolation);

/// CSV with a header naming every parameter of `space` plus a final `y`
/// column. Categorical cells hold the choice index; inactive cells are empty.
ObjectiveFunction load_tabular_surrogate(const std::filesystem::path& path, const ConfigurationSpace& space,
                                         Interpolation interpolation);

}  // namespace metabo
