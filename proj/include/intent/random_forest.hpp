#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace intent {

struct RfParams {
  int n_trees = 100;
  int max_depth = 8;  // <= 0: unlimited
  int min_leaf = 1;

  friend bool operator==(const RfParams&, const RfParams&) = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double positive_fraction(const double* row) const;
  int predict(const double* row) const { return positive_fraction(row) > 0.5 ? 1 : 0; }
};

struct RfModel {
  RfParams params;
  int n_features = 0;
  std::vector<DecisionTree> trees;
  // Per tree, rows not drawn into its bootstrap sample (not serialized).
  std::vector<std::vector<std::uint8_t>> out_of_bag;
};

// Bagged CART trees, Gini impurity, floor(sqrt(d)) candidate features per split.
// Trees are grown with per-tree seeds derived from seed.
RfModel train_rf(const Eigen::MatrixXd& x, std::span<const int> labels, const RfParams& params,
                 std::uint64_t seed);

// Fraction of trees voting positive, minus 0.5.
Eigen::VectorXd rf_decision(const RfModel& model, const Eigen::MatrixXd& x);

// Per-tree hard votes [n x trees].
Eigen::MatrixXi rf_tree_votes(const RfModel& model, const Eigen::MatrixXd& x);

// Accuracy of out-of-bag majority votes on the training data; rows that were in
// every bootstrap sample are skipped.
double rf_oob_accuracy(const RfModel& model, const Eigen::MatrixXd& x, std::span<const int> labels);

}  // namespace intent
