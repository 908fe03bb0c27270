#pragma once

#include <vector>

#include <Eigen/Core>

#include "metabo/configspace.hpp"
#include "metabo/prediction.hpp"

namespace metabo {

struct RFConfig {
  int num_trees = 10;
  bool do_bootstrapping = true;
  int min_samples_leaf = 3;
  int min_samples_split = 3;
  double ratio_features = 0.8333333333;
  bool log_y_in_tree = false;
};

/// Array-backed regression tree over encoded inputs. Categorical features
/// split one-vs-rest: `threshold` then holds the choice sent left.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    bool categorical = false;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int count = 0;  // training points incl. bootstrap multiplicity
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
};

class Forest {
 public:
  Forest(std::vector<RegressionTree> trees, bool log_transformed, double y_min);

  /// Mean over trees and unbiased across-tree variance. Under the log
  /// transform both are mapped back with the delta method.
  Prediction predict(const EncodedConfig& x) const;

  const std::vector<RegressionTree>& trees() const { return trees_; }
  bool log_transformed() const { return log_; }

 private:
  std::vector<RegressionTree> trees_;
  bool log_;
  double y_min_;
};

/// Trees are grown on the encoded inputs; `categorical` flags one-vs-rest
/// dimensions. Inactive entries keep their default encoding.
Forest fit_forest(const std::vector<EncodedConfig>& inputs, const std::vector<double>& ys,
                  const std::vector<std::size_t>& categorical, const RFConfig& cfg, Rng& rng);

}  // namespace metabo
