#pragma once

#include <cstddef>
#include <functional>

#include "metabo/configspace.hpp"
#include "metabo/history.hpp"

namespace metabo {

struct IlsBudget {
  int n_restarts = 10;
  int n_local_steps = 50;
  int n_random_probes = 1000;
  int neighbors_per_step = 4;
};

struct AcqOptResult {
  Configuration config;
  double value;
  std::size_t evaluations;
};

using AcquisitionFn = std::function<double(const Configuration&)>;

/// Iterated local search maximizing `acq`. Restart seeds are the best observed
/// configurations, topped up with the best random probes; each chain makes
/// first-improvement moves in the one-exchange neighbourhood. The result is
/// never a configuration already in `history` unless every probe was.
AcqOptResult optimize_acquisition(const AcquisitionFn& acq, const ConfigurationSpace& space, const History& history,
                                  Rng& rng, const IlsBudget& budget = {});

}  // namespace metabo
