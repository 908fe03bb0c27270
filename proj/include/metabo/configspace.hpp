#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace metabo {

using Rng = std::mt19937_64;

class SpaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ParamKind { continuous, integer, categorical };

std::string_view to_string(ParamKind kind);

/// Single-parent activation clause: the owning parameter is active iff the
/// parent is active and takes one of `values`.
struct Condition {
  std::string parent;
  std::vector<std::string> values;
};

/// Numeric parameters store their value directly; categorical parameters
/// store the index into `choices`. `default_value` follows the same rule.
struct Hyperparameter {
  std::string name;
  ParamKind kind = ParamKind::continuous;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> choices;
  double default_value = 0.0;
  bool log_scale = false;
  std::optional<Condition> condition;

  bool is_numeric() const { return kind != ParamKind::categorical; }
  bool contains(double value) const;

  static Hyperparameter continuous(std::string name, double lower, double upper, double default_value,
                                   bool log_scale = false);
  static Hyperparameter integer(std::string name, double lower, double upper, double default_value);
  static Hyperparameter categorical(std::string name, std::vector<std::string> choices,
                                    std::string_view default_choice);
  Hyperparameter&& when(std::string parent, std::vector<std::string> values) &&;
};

class Configuration;

/// Immutable, cheaply copyable handle to a validated hyperparameter space.
class ConfigurationSpace {
 public:
  ConfigurationSpace(std::string name, std::vector<Hyperparameter> parameters);

  const std::string& name() const { return impl_->name; }
  std::span<const Hyperparameter> parameters() const { return impl_->parameters; }
  const Hyperparameter& parameter(std::size_t i) const { return impl_->parameters[i]; }
  std::size_t size() const { return impl_->parameters.size(); }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;

  /// Parent index of a conditional parameter.
  std::optional<std::size_t> parent_of(std::size_t i) const { return impl_->parent[i]; }
  std::span<const std::size_t> children_of(std::size_t i) const { return impl_->children[i]; }
  bool activated_by(std::size_t i, double parent_choice) const;

  /// Recomputes activity in declaration order (parents precede children).
  /// Entries of inactive parameters are reset; newly active ones take defaults.
  void normalize(std::vector<std::optional<double>>& values) const;

  Configuration default_configuration() const;

  static ConfigurationSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  bool operator==(const ConfigurationSpace& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    std::string name;
    std::vector<Hyperparameter> parameters;
    std::vector<std::optional<std::size_t>> parent;
    std::vector<std::vector<std::size_t>> children;
    std::vector<std::vector<bool>> activating;  // per child, indexed by parent choice
  };
  std::shared_ptr<const Impl> impl_;
};

/// A point in a ConfigurationSpace: one optional value per parameter, present
/// iff the parameter is active.
class Configuration {
 public:
  Configuration(ConfigurationSpace space, std::vector<std::optional<double>> values);

  const ConfigurationSpace& space() const { return space_; }
  std::span<const std::optional<double>> values() const { return values_; }
  const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }

  bool is_active(std::string_view name) const;
  double number(std::string_view name) const;
  int integer(std::string_view name) const;
  const std::string& choice(std::string_view name) const;
  bool flag(std::string_view name) const;  // categorical {"True","False"}

  /// Copy with `name` set to `value` and activity recomputed.
  Configuration with(std::string_view name, double value) const;
  Configuration with_choice(std::string_view name, std::string_view choice) const;

  nlohmann::json to_json() const;
  static Configuration from_json(const ConfigurationSpace& space, const nlohmann::json& j);

  /// Stable 16-hex-digit identifier derived from the canonical JSON form.
  std::string id() const;

  bool operator==(const Configuration& other) const;

 private:
  ConfigurationSpace space_;
  std::vector<std::optional<double>> values_;
};

enum class ViolationKind { out_of_domain, missing_active, inactive_present };

struct Violation {
  ViolationKind kind;
  std::string parameter;
  std::string message;
};

Configuration sample_configuration(const ConfigurationSpace& space, Rng& rng);

/// Empty when `config` satisfies every Configuration invariant.
std::vector<Violation> validate(const ConfigurationSpace& space, const Configuration& config);

/// Unit-cube encoding. Numeric parameters map affinely (or affinely in log
/// space) to [0,1]; integers use bin centres so decoding is exact; categoricals
/// hold their choice index. Inactive parameters carry the encoding of their
/// default and a cleared mask bit.
struct EncodedConfig {
  Eigen::VectorXd x;
  Eigen::Array<bool, Eigen::Dynamic, 1> active;
};

double encode_value(const Hyperparameter& hp, double value);
double decode_value(const Hyperparameter& hp, double unit);

EncodedConfig encode(const ConfigurationSpace& space, const Configuration& config);
Configuration decode(const ConfigurationSpace& space, const Eigen::Ref<const Eigen::VectorXd>& encoded);

/// Maps a point of [0,1]^d to a configuration; categorical coordinates are
/// binned uniformly over the choices. Used by space-filling designs.
Configuration from_unit_cube(const ConfigurationSpace& space, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Index set of categorical dimensions, in parameter order.
std::vector<std::size_t> categorical_dims(const ConfigurationSpace& space);

inline constexpr double kNeighborStepScale = 0.2;

/// One-exchange neighbourhood: every neighbour changes exactly one active
/// parameter (children of a changed parent are re-derived).
std::vector<Configuration> neighbors(const ConfigurationSpace& space, const Configuration& config, Rng& rng,
                                     std::size_t count);

/// Spaces shipped with the library: bo_rf, bo_gp_ml, bo_gp_map, bo_gp_mcmc,
/// svm, paramnet and one space per artificial function.
ConfigurationSpace bundled_space(std::string_view name);
std::vector<std::string> bundled_space_names();

}  // namespace metabo
