#include "metabo/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "metabo/sobol.hpp"

namespace metabo {

std::vector<Configuration> initial_design(DesignKind kind, const ConfigurationSpace& space, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("initial_design: n must be positive");
  std::vector<Configuration> out;
  out.reserve(n);
  const auto dims = static_cast<Eigen::Index>(space.size());

  switch (kind) {
    case DesignKind::random:
      for (std::size_t i = 0; i < n; ++i) out.push_back(sample_configuration(space, rng));
      break;

    case DesignKind::sobol: {
      if (space.size() > kSobolMaxDims) throw std::invalid_argument("initial_design: too many dimensions for Sobol");
      const Eigen::MatrixXd u = sobol_points(space.size(), n);
      for (std::size_t i = 0; i < n; ++i) out.push_back(from_unit_cube(space, u.row(static_cast<Eigen::Index>(i)).transpose()));
      break;
    }

    case DesignKind::lhd: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Eigen::MatrixXd u(static_cast<Eigen::Index>(n), dims);
      std::vector<std::size_t> perm(n);
      for (Eigen::Index d = 0; d < dims; ++d) {
        const bool categorical = space.parameter(static_cast<std::size_t>(d)).kind == ParamKind::categorical;
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
          const double r = unif(rng);
          u(static_cast<Eigen::Index>(i), d) =
              categorical ? r : (static_cast<double>(perm[i]) + r) / static_cast<double>(n);
        }
      }
      for (std::size_t i = 0; i < n; ++i) out.push_back(from_unit_cube(space, u.row(static_cast<Eigen::Index>(i)).transpose()));
      break;
    }
  }
  return out;
}

double percentile(std::vector<double> values, double perc) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(perc, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> transform_y(const std::vector<double>& ys, YTransform kind, int perc) {
  if (ys.empty()) throw std::invalid_argument("transform_y: empty input");
  if (kind == YTransform::identity) return ys;

  const double y_min = *std::min_element(ys.begin(), ys.end());
  std::vector<double> shifted(ys.size());
  std::transform(ys.begin(), ys.end(), shifted.begin(), [&](double y) { return y - y_min; });
  const double s = percentile(shifted, perc) + 1e-12;

  std::vector<double> z(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i)
    z[i] = kind == YTransform::log_scaled ? std::log(shifted[i] + s) : -1.0 / (shifted[i] + s);
  return z;
}

}  // namespace metabo
