#include "metabo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace metabo {

double wilcoxon_exact_lower_tail(std::span<const double> ranks, double w_plus) {
  // Doubled ranks are integral even with average ranks for ties.
  std::vector<int> doubled(ranks.size());
  int total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total += doubled[i];
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  int reach = 0;
  for (int r : doubled) {
    for (int s = reach; s >= 0; --s)
      if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    reach += r;
  }
  const int limit = static_cast<int>(std::lround(2.0 * w_plus));
  double below = 0.0;
  for (int s = 0; s <= std::min(limit, total); ++s) below += count[static_cast<std::size_t>(s)];
  return below / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

std::optional<WilcoxonResult> wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon_signed_rank: unequal sample sizes");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const int n = static_cast<int>(d.size());
  if (n < kWilcoxonMinPairs) return std::nullopt;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
  std::vector<double> ranks(d.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  WilcoxonResult r;
  r.n = n;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0) r.w_plus += ranks[i];

  if (n <= kWilcoxonExactMax) {
    r.exact = true;
    r.p_value = wilcoxon_exact_lower_tail(ranks, r.w_plus);
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (r.w_plus - mu + 0.5) / std::sqrt(var);
    r.p_value = std::erfc(-z / std::sqrt(2.0)) / 2.0;
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stdev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double sq = 0.0;
  for (double x : v) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

}  // namespace metabo
