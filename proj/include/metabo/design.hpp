#pragma once

#include <vector>

#include "metabo/configspace.hpp"

namespace metabo {

enum class DesignKind { random, sobol, lhd };

/// n valid configurations. Sobol and LHD points are mapped through
/// from_unit_cube; LHD places one sample per equal-width bin in every
/// numeric dimension and samples categoricals uniformly.
std::vector<Configuration> initial_design(DesignKind kind, const ConfigurationSpace& space, std::size_t n, Rng& rng);

enum class YTransform { identity, log_scaled, inv_scaled };

/// Linear-interpolation percentile (perc in [0,100]) of `values`.
double percentile(std::vector<double> values, double perc);

/// Strictly increasing transforms of the raw targets:
///   log_scaled  z = log(y - y_min + s)
///   inv_scaled  z = -1 / (y - y_min + s)
/// with s = percentile_perc(y - y_min) + 1e-12.
std::vector<double> transform_y(const std::vector<double>& ys, YTransform kind, int perc);

}  // namespace metabo
