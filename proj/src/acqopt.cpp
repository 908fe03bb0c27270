#include "metabo/acqopt.hpp"

#include <algorithm>
#include <numeric>

namespace metabo {

AcqOptResult optimize_acquisition(const AcquisitionFn& acq, const ConfigurationSpace& space, const History& history,
                                  Rng& rng, const IlsBudget& budget) {
  std::vector<Configuration> probed;
  std::vector<double> values;
  auto probe = [&](Configuration c) {
    values.push_back(acq(c));
    probed.push_back(std::move(c));
    return values.back();
  };

  for (int i = 0; i < budget.n_random_probes; ++i) probe(sample_configuration(space, rng));
  const std::size_t n_random = probed.size();

  // Restart seeds: best observed points first, then the best random probes.
  std::vector<std::size_t> seeds;
  std::vector<std::size_t> by_y(history.size());
  std::iota(by_y.begin(), by_y.end(), 0);
  std::stable_sort(by_y.begin(), by_y.end(), [&](std::size_t a, std::size_t b) { return history.ys[a] < history.ys[b]; });
  for (std::size_t i : by_y) {
    if (static_cast<int>(seeds.size()) >= budget.n_restarts) break;
    probe(history.configs[i]);
    seeds.push_back(probed.size() - 1);
  }
  if (static_cast<int>(seeds.size()) < budget.n_restarts) {
    std::vector<std::size_t> by_value(n_random);
    std::iota(by_value.begin(), by_value.end(), 0);
    std::stable_sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    for (std::size_t i : by_value) {
      if (static_cast<int>(seeds.size()) >= budget.n_restarts) break;
      seeds.push_back(i);
    }
  }

  for (std::size_t seed : seeds) {
    Configuration current = probed[seed];
    double current_value = values[seed];
    for (int step = 0; step < budget.n_local_steps; ++step) {
      bool moved = false;
      for (auto& nb : neighbors(space, current, rng, static_cast<std::size_t>(budget.neighbors_per_step))) {
        const double v = probe(nb);
        if (v > current_value) {
          current = probed.back();
          current_value = v;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }

  // Argmax over every probe, preferring points not yet observed; ties go to
  // the earliest probe.
  std::vector<std::size_t> order(probed.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  for (std::size_t i : order)
    if (!history.contains(probed[i])) return {probed[i], values[i], probed.size()};

  // Every probe collides with the history: perturb the best once.
  const std::size_t best = order.front();
  auto fresh = neighbors(space, probed[best], rng, 1);
  Configuration out = fresh.empty() ? probed[best] : fresh.front();
  const double v = acq(out);
  return {out, v, probed.size() + 1};
}

}  // namespace metabo
