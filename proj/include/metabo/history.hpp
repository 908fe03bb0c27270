#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "metabo/configspace.hpp"

namespace metabo {

/// Ordered observations <x_i, y_i> with raw objective values.
struct History {
  std::vector<Configuration> configs;
  std::vector<double> ys;

  std::size_t size() const { return ys.size(); }
  bool empty() const { return ys.empty(); }

  void add(Configuration x, double y) {
    configs.push_back(std::move(x));
    ys.push_back(y);
  }

  /// Index of the first minimum of ys.
  std::size_t incumbent() const {
    return static_cast<std::size_t>(std::min_element(ys.begin(), ys.end()) - ys.begin());
  }

  bool contains(const Configuration& x) const {
    return std::any_of(configs.begin(), configs.end(), [&](const Configuration& c) { return c == x; });
  }
};

}  // namespace metabo
