#include "metabo/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace metabo {

double RegressionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    const double v = x[n.feature];
    const bool go_left = n.categorical ? v == n.threshold : v <= n.threshold;
    i = go_left ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].value;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

Forest::Forest(std::vector<RegressionTree> trees, bool log_transformed, double y_min)
    : trees_(std::move(trees)), log_(log_transformed), y_min_(y_min) {}

Prediction Forest::predict(const EncodedConfig& x) const {
  const double n = static_cast<double>(trees_.size());
  double sum = 0.0, sq = 0.0;
  std::vector<double> values(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    values[t] = trees_[t].predict(x.x);
    sum += values[t];
  }
  const double mean = sum / n;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double var = trees_.size() > 1 ? sq / (n - 1.0) : 0.0;
  if (!log_) return {mean, var};
  // z = log(y - y_min + 1), so y = exp(z) + y_min - 1 and dy/dz = exp(z).
  const double e = std::exp(mean);
  return {e + y_min_ - 1.0, e * e * var};
}

namespace {

struct Sample {
  const Eigen::VectorXd* x;
  double y;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  bool categorical = false;
  double score = 0.0;  // weighted SSE after the split
};

class Grower {
 public:
  Grower(const RFConfig& cfg, const std::vector<bool>& categorical, Rng& rng)
      : cfg_(cfg), categorical_(categorical), rng_(rng) {}

  std::vector<RegressionTree::Node> grow(std::vector<Sample> samples) {
    nodes_.clear();
    build(samples);
    return std::move(nodes_);
  }

 private:
  int build(std::vector<Sample>& samples) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double mean = 0.0;
    for (const auto& s : samples) mean += s.y;
    mean /= static_cast<double>(samples.size());
    nodes_[static_cast<std::size_t>(id)].value = mean;
    nodes_[static_cast<std::size_t>(id)].count = static_cast<int>(samples.size());

    const bool spread = std::any_of(samples.begin(), samples.end(), [&](const Sample& s) { return s.y != samples[0].y; });
    if (static_cast<int>(samples.size()) < std::max(cfg_.min_samples_split, 2) ||
        static_cast<int>(samples.size()) < 2 * cfg_.min_samples_leaf || !spread)
      return id;

    const auto split = best_split(samples);
    if (split.feature < 0) return id;

    std::vector<Sample> left, right;
    for (const auto& s : samples) {
      const double v = (*s.x)[split.feature];
      (split.categorical ? v == split.threshold : v <= split.threshold) ? left.push_back(s) : right.push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = build(left);
    const int r = build(right);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.categorical = split.categorical;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<Sample>& samples) {
    const int dims = static_cast<int>(categorical_.size());
    const int k = std::clamp(static_cast<int>(std::ceil(cfg_.ratio_features * dims - 1e-9)), 1, dims);
    std::vector<int> features(static_cast<std::size_t>(dims));
    std::iota(features.begin(), features.end(), 0);
    if (k < dims) {
      // Partial Fisher-Yates: first k entries are a uniform subset.
      for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, dims - 1);
        std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(pick(rng_))]);
      }
      features.resize(static_cast<std::size_t>(k));
      std::sort(features.begin(), features.end());
    }

    const std::size_t n = samples.size();
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(cfg_.min_samples_leaf, 1));
    double total = 0.0, total_sq = 0.0;
    for (const auto& s : samples) {
      total += s.y;
      total_sq += s.y * s.y;
    }
    const double parent_sse = total_sq - total * total / static_cast<double>(n);
    Split best;
    best.score = parent_sse - 1e-12 * std::max(1.0, std::abs(parent_sse));

    std::vector<std::pair<double, double>> column(n);
    for (int f : features) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {(*samples[i].x)[f], samples[i].y};
      std::sort(column.begin(), column.end());
      if (categorical_[static_cast<std::size_t>(f)]) {
        for (std::size_t i = 0; i < n;) {
          std::size_t j = i;
          double s = 0.0, sq = 0.0;
          while (j < n && column[j].first == column[i].first) {
            s += column[j].second;
            sq += column[j].second * column[j].second;
            ++j;
          }
          const std::size_t nl = j - i, nr = n - nl;
          if (nl >= min_leaf && nr >= min_leaf) {
            const double score = (sq - s * s / static_cast<double>(nl)) +
                                 (total_sq - sq - (total - s) * (total - s) / static_cast<double>(nr));
            if (score < best.score) best = {f, column[i].first, true, score};
          }
          i = j;
        }
        continue;
      }
      double s = 0.0, sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        s += column[i].second;
        sq += column[i].second * column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double score = (sq - s * s / static_cast<double>(nl)) +
                             (total_sq - sq - (total - s) * (total - s) / static_cast<double>(nr));
        if (score < best.score) {
          double mid = 0.5 * (column[i].first + column[i + 1].first);
          if (mid >= column[i + 1].first) mid = column[i].first;  // adjacent doubles
          best = {f, mid, false, score};
        }
      }
    }
    return best;
  }

  const RFConfig& cfg_;
  const std::vector<bool>& categorical_;
  Rng& rng_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

Forest fit_forest(const std::vector<EncodedConfig>& inputs, const std::vector<double>& ys,
                  const std::vector<std::size_t>& categorical, const RFConfig& cfg, Rng& rng) {
  if (inputs.empty() || inputs.size() != ys.size()) throw std::invalid_argument("fit_forest: bad training data");
  if (cfg.num_trees < 1) throw std::invalid_argument("fit_forest: num_trees must be positive");
  const auto dims = static_cast<std::size_t>(inputs.front().x.size());
  std::vector<bool> is_cat(dims, false);
  for (auto c : categorical) is_cat.at(c) = true;

  const double y_min = *std::min_element(ys.begin(), ys.end());
  std::vector<double> targets(ys);
  if (cfg.log_y_in_tree)
    for (auto& y : targets) y = std::log(y - y_min + 1.0);

  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(cfg.num_trees));
  Grower grower(cfg, is_cat, rng);
  const std::size_t n = inputs.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int t = 0; t < cfg.num_trees; ++t) {
    std::vector<Sample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = cfg.do_bootstrapping ? pick(rng) : i;
      samples[i] = {&inputs[j].x, targets[j]};
    }
    trees.emplace_back(grower.grow(std::move(samples)));
  }
  return Forest(std::move(trees), cfg.log_y_in_tree, y_min);
}

}  // namespace metabo
