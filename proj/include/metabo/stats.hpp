#pragma once

#include <optional>
#include <span>
#include <vector>

namespace metabo {

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;  // rank sum of positive differences a - b
  int n = 0;            // nonzero differences
  bool exact = false;
};

inline constexpr int kWilcoxonMinPairs = 5;
inline constexpr int kWilcoxonExactMax = 25;

/// One-sided paired signed-rank test of H1: a tends to be smaller than b.
/// Zero differences are dropped and tied magnitudes get average ranks. Exact
/// null distribution for n <= 25, normal approximation with tie and
/// continuity correction above. nullopt with fewer than 5 nonzero pairs.
std::optional<WilcoxonResult> wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Exact lower-tail probability P(W+ <= w_plus) for the given |d| ranks.
double wilcoxon_exact_lower_tail(std::span<const double> ranks, double w_plus);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stdev(std::span<const double> v);

}  // namespace metabo
