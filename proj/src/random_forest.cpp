#include "intent/random_forest.hpp"

#include "intent/parallel.hpp"
#include "intent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace intent {

namespace {

struct Builder {
  const Eigen::MatrixXd& x;
  std::span<const int> y;
  const RfParams& params;
  int mtry;
  Rng& rng;
  DecisionTree tree;
  std::vector<std::pair<double, int>> scratch;

  static double gini(double pos, double n) {
    if (n <= 0.0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity
  };

  // Best split on one feature, or feature -1 if none respects min_leaf.
  Split best_on(int f, const std::vector<int>& rows, double total_pos) {
    scratch.clear();
    for (int r : rows) scratch.emplace_back(x(r, f), y[static_cast<std::size_t>(r)]);
    std::sort(scratch.begin(), scratch.end());
    Split s;
    const auto n = static_cast<double>(rows.size());
    double left_pos = 0.0;
    for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
      left_pos += scratch[i].second;
      if (scratch[i].first == scratch[i + 1].first) continue;
      const auto nl = static_cast<double>(i + 1);
      const double nr = n - nl;
      if (nl < params.min_leaf || nr < params.min_leaf) continue;
      const double score = nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr);
      if (s.feature < 0 || score < s.score) {
        s.feature = f;
        s.score = score;
        s.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
        if (s.threshold >= scratch[i + 1].first) s.threshold = scratch[i].first;
      }
    }
    return s;
  }

  int grow(std::vector<int>& rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double pos = 0.0;
    for (int r : rows) pos += y[static_cast<std::size_t>(r)];
    const auto n = static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].positive_fraction = pos / n;
    const bool pure = pos == 0.0 || pos == n;
    const bool depth_done = params.max_depth > 0 && depth >= params.max_depth;
    if (pure || depth_done || rows.size() < 2 * static_cast<std::size_t>(params.min_leaf)) return id;

    std::vector<int> features(static_cast<std::size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    rng.shuffle(features);
    Split best;
    // Keep drawing features past mtry until at least one valid split exists.
    for (std::size_t k = 0; k < features.size(); ++k) {
      if (static_cast<int>(k) >= mtry && best.feature >= 0) break;
      const Split s = best_on(features[k], rows, pos);
      if (s.feature >= 0 && (best.feature < 0 || s.score < best.score)) best = s;
    }
    if (best.feature < 0) return id;

    std::vector<int> left;
    std::vector<int> right;
    for (int r : rows) (x(r, best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int rgt = grow(right, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }
};

}  // namespace

double DecisionTree::positive_fraction(const double* row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                                              : nodes[i].right);
  }
  return nodes[i].positive_fraction;
}

RfModel train_rf(const Eigen::MatrixXd& x, std::span<const int> labels, const RfParams& params,
                 std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n != labels.size() || n == 0) throw std::invalid_argument("train_rf: rows and labels differ");
  if (params.n_trees < 1) throw std::invalid_argument("train_rf: n_trees must be >= 1");
  if (params.min_leaf < 1) throw std::invalid_argument("train_rf: min_leaf must be >= 1");
  if (x.cols() < 1) throw std::invalid_argument("train_rf: need at least one feature");
  for (int v : labels) {
    if (v != 0 && v != 1) throw std::invalid_argument("train_rf: labels must be 0 or 1");
  }
  RfModel m;
  m.params = params;
  m.n_features = static_cast<int>(x.cols());
  m.trees.resize(static_cast<std::size_t>(params.n_trees));
  m.out_of_bag.resize(m.trees.size());
  const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
  parallel_for(m.trees.size(), [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<int> rows(n);
    std::vector<std::uint8_t> oob(n, 1);
    for (auto& r : rows) {
      r = static_cast<int>(rng.index(n));
      oob[static_cast<std::size_t>(r)] = 0;
    }
    std::sort(rows.begin(), rows.end());
    Builder b{x, labels, params, mtry, rng, {}, {}};
    b.grow(rows, 0);
    m.trees[t] = std::move(b.tree);
    m.out_of_bag[t] = std::move(oob);
  });
  return m;
}

Eigen::MatrixXi rf_tree_votes(const RfModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.n_features) throw std::invalid_argument("random forest: dimension mismatch");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  Eigen::MatrixXi votes(x.rows(), static_cast<Eigen::Index>(model.trees.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      votes(i, static_cast<Eigen::Index>(t)) = model.trees[t].predict(xr.row(i).data());
    }
  }
  return votes;
}

Eigen::VectorXd rf_decision(const RfModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXi votes = rf_tree_votes(model, x);
  const auto trees = static_cast<double>(model.trees.size());
  return votes.cast<double>().rowwise().sum().array() / trees - 0.5;
}

double rf_oob_accuracy(const RfModel& model, const Eigen::MatrixXd& x, std::span<const int> labels) {
  const Eigen::MatrixXi votes = rf_tree_votes(model, x);
  std::size_t correct = 0;
  std::size_t counted = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int pos = 0;
    int total = 0;
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      if (model.out_of_bag[t].at(static_cast<std::size_t>(i)) == 0) continue;
      pos += votes(i, static_cast<Eigen::Index>(t));
      ++total;
    }
    if (total == 0) continue;
    const int pred = 2 * pos > total ? 1 : 0;
    correct += pred == labels[static_cast<std::size_t>(i)] ? 1 : 0;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("rf_oob_accuracy: no out-of-bag rows");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

}  // namespace intent
