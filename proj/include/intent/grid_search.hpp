#pragma once

#include "intent/classifier.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace intent {

std::vector<HyperParams> svm_grid(std::span<const Kernel> kernels, std::span<const double> cs,
                                  std::span<const double> gammas);
std::vector<HyperParams> rf_grid(std::span<const int> n_trees, std::span<const int> max_depths,
                                 std::span<const int> min_leafs);

// svm: {linear, rbf} x C {0.1, 1, 10, 100} x gamma {0.01, 0.1, 1}, gamma only for rbf;
// rf: 100 trees x depth {4, 8, 16}; nb: a single point.
std::vector<HyperParams> default_grid(ClassifierKind kind);

// Fold index per row; each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

struct GridSearchResult {
  HyperParams best;
  double best_score = 0.0;
  std::vector<double> mean_scores;  // per grid point, grid order
  std::vector<std::string> warnings;
};

// Stratified k-fold CV on (x, labels) only; highest mean fold accuracy wins, earliest
// grid point on ties. Folds whose training part holds a single class are skipped.
GridSearchResult grid_search(const Eigen::MatrixXd& x, std::span<const int> labels,
                             std::span<const HyperParams> grid, int k_folds, std::uint64_t seed);

}  // namespace intent
