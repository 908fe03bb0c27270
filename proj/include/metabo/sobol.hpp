#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace metabo {

inline constexpr std::size_t kSobolMaxDims = 40;

/// Unscrambled base-2 Sobol points with Joe-Kuo direction numbers.
/// Row i is point i + skip of the sequence; the default skips the origin.
Eigen::MatrixXd sobol_points(std::size_t dims, std::size_t n, std::size_t skip = 1);

}  // namespace metabo
