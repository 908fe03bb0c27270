#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "metabo/acqopt.hpp"
#include "metabo/acquisition.hpp"
#include "metabo/benchfn.hpp"
#include "metabo/design.hpp"
#include "metabo/forest.hpp"
#include "metabo/gp.hpp"
#include "metabo/history.hpp"

namespace metabo {

enum class ModelFamily { rf, gp_ml, gp_map, gp_mcmc };

std::string_view to_string(ModelFamily family);

/// Decoded view of a target-BO configuration lambda. Parameters absent from
/// the space keep the defaults below.
struct BOSettings {
  ModelFamily family = ModelFamily::gp_ml;
  AcquisitionSpec acquisition;
  DesignKind design = DesignKind::random;
  int n_configs_x_params = 1;
  YTransform y_trans = YTransform::identity;
  int y_perc = 5;
  double rand_prob = 0.0;
  RFConfig rf;
  GPFitOptions gp;
};

/// Family from the space name (bo_rf, bo_gp_ml, bo_gp_map, bo_gp_mcmc), else
/// from the parameters present.
ModelFamily model_family(const ConfigurationSpace& bo_space);
BOSettings bo_settings(const Configuration& lambda);

/// Bundled space id for a family, e.g. "bo_gp_ml".
std::string bo_space_name(ModelFamily family);

struct RunOptions {
  IlsBudget ils;
};

struct Trajectory {
  std::string function_id;
  std::string lambda_id;
  std::uint64_t seed = 0;
  std::vector<double> best;  // running minimum of raw y after each evaluation
  History history;
  std::size_t initial_design_size = 0;
  int model_failures = 0;
  bool valid = true;
  std::string error;
};

/// Derived random stream for (seed, iteration, tag).
Rng derive_stream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t tag);

/// One BO run with `budget` objective evaluations including the initial
/// design. The main stream (iteration 0, tag 0) drives the design, the
/// per-iteration interleave draw and every random proposal; model fitting and
/// acquisition search use derive_stream(seed, iteration, 1).
Trajectory run_bo(const ObjectiveFunction& objective, const Configuration& lambda, std::size_t budget,
                  std::uint64_t seed, const RunOptions& options = {});

/// CSV `step,raw_best,query_json` with one row per evaluation.
std::string trajectory_csv(const Trajectory& traj);
nlohmann::json trajectory_json(const Trajectory& traj, const Configuration& lambda);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace metabo
