#pragma once

namespace metabo {

/// Posterior mean and variance of a surrogate at one input.
struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

}  // namespace metabo
