#include "intent/grid_search.hpp"

#include "intent/parallel.hpp"
#include "intent/rng.hpp"

#include <map>
#include <stdexcept>

namespace intent {

namespace {

struct Fold {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  std::vector<int> train_labels;
};

Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                     const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

double accuracy(const Eigen::VectorXd& scores, std::span<const int> labels,
                const std::vector<Eigen::Index>& rows) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int pred = scores(static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0;
    hit += pred == labels[static_cast<std::size_t>(rows[i])] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

}  // namespace

std::vector<HyperParams> svm_grid(std::span<const Kernel> kernels, std::span<const double> cs,
                                  std::span<const double> gammas) {
  std::vector<HyperParams> grid;
  for (Kernel k : kernels) {
    if (k == Kernel::Linear) {
      for (double c : cs) grid.emplace_back(SvmParams{k, c, gammas.empty() ? 0.1 : gammas.front()});
    } else {
      for (double c : cs) {
        for (double g : gammas) grid.emplace_back(SvmParams{k, c, g});
      }
    }
  }
  return grid;
}

std::vector<HyperParams> rf_grid(std::span<const int> n_trees, std::span<const int> max_depths,
                                 std::span<const int> min_leafs) {
  std::vector<HyperParams> grid;
  for (int t : n_trees) {
    for (int d : max_depths) {
      for (int l : min_leafs) grid.emplace_back(RfParams{t, d, l});
    }
  }
  return grid;
}

std::vector<HyperParams> default_grid(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Svm: {
      const Kernel kernels[] = {Kernel::Linear, Kernel::Rbf};
      const double cs[] = {0.1, 1.0, 10.0, 100.0};
      const double gammas[] = {0.01, 0.1, 1.0};
      return svm_grid(kernels, cs, gammas);
    }
    case ClassifierKind::RandomForest: {
      const int trees[] = {100};
      const int depths[] = {4, 8, 16};
      const int leafs[] = {1};
      return rf_grid(trees, depths, leafs);
    }
    case ClassifierKind::NaiveBayes:
      return {NbParams{}};
  }
  return {};
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (std::size_t r = 0; r < idx.size(); ++r) fold[idx[r]] = static_cast<int>(r % static_cast<std::size_t>(k));
  }
  return fold;
}

GridSearchResult grid_search(const Eigen::MatrixXd& x, std::span<const int> labels,
                             std::span<const HyperParams> grid, int k_folds, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  if (k_folds < 2) throw std::invalid_argument("grid_search: k_folds must be >= 2");
  if (x.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("grid_search: rows and labels differ");
  }
  GridSearchResult result;
  if (grid.size() == 1) {
    result.best = grid.front();
    result.mean_scores = {0.0};
    return result;
  }

  const auto assignment = stratified_folds(labels, k_folds, seed);
  std::vector<Fold> folds;
  for (int f = 0; f < k_folds; ++f) {
    Fold fold;
    int classes[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (assignment[i] == f) {
        fold.test.push_back(static_cast<Eigen::Index>(i));
      } else {
        fold.train.push_back(static_cast<Eigen::Index>(i));
        fold.train_labels.push_back(labels[i]);
        ++classes[labels[i] == 1 ? 1 : 0];
      }
    }
    if (fold.test.empty()) continue;
    if (classes[0] == 0 || classes[1] == 0) {
      result.warnings.push_back("grid search: fold " + std::to_string(f) +
                                " skipped (single-class training part)");
      continue;
    }
    folds.push_back(std::move(fold));
  }
  if (folds.empty()) throw std::invalid_argument("grid_search: every fold was skipped");

  // scores[point][fold]
  std::vector<std::vector<double>> scores(grid.size(), std::vector<double>(folds.size(), 0.0));

  // SVM points sharing a kernel reuse one precomputed Gram matrix.
  std::map<std::pair<int, double>, std::vector<std::size_t>> svm_groups;
  std::vector<std::size_t> others;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (const auto* s = std::get_if<SvmParams>(&grid[p])) {
      const double g = s->kernel == Kernel::Rbf ? s->gamma : 0.0;
      svm_groups[{static_cast<int>(s->kernel), g}].push_back(p);
    } else {
      others.push_back(p);
    }
  }
  if (!svm_groups.empty()) {
    const Eigen::MatrixXd dot = x * x.transpose();
    Eigen::MatrixXd sq;
    for (const auto& [key, points] : svm_groups) {
      Eigen::MatrixXd kernel;
      if (static_cast<Kernel>(key.first) == Kernel::Linear) {
        kernel = dot;
      } else {
        if (sq.size() == 0) {
          const Eigen::VectorXd diag = dot.diagonal();
          sq = (-2.0 * dot).colwise() + diag;
          sq.rowwise() += diag.transpose();
          sq = sq.cwiseMax(0.0);
        }
        kernel = (-key.second * sq.array()).exp().matrix();
      }
      parallel_for(folds.size(), [&](std::size_t f) {
        const Fold& fold = folds[f];
        const Eigen::MatrixXd k_train = take(kernel, fold.train, fold.train);
        const Eigen::MatrixXd k_test = take(kernel, fold.test, fold.train);
        const auto y = to_signed_labels(fold.train_labels);
        for (std::size_t p : points) {
          const auto& params = std::get<SvmParams>(grid[p]);
          const SmoResult sol = smo_solve(k_train, y, params.c);
          Eigen::VectorXd coef(sol.alpha.size());
          for (Eigen::Index i = 0; i < coef.size(); ++i) {
            coef(i) = sol.alpha(i) * y[static_cast<std::size_t>(i)];
          }
          const Eigen::VectorXd s = (k_test * coef).array() + sol.bias;
          scores[p][f] = accuracy(s, labels, fold.test);
        }
      });
    }
  }
  for (std::size_t p : others) {
    parallel_for(folds.size(), [&](std::size_t f) {
      const Fold& fold = folds[f];
      const Classifier c = Classifier::train(take_rows(x, fold.train), fold.train_labels, grid[p],
                                             derive_seed(seed, p * 1000 + f));
      scores[p][f] = accuracy(c.decision_score(take_rows(x, fold.test)), labels, fold.test);
    });
  }

  result.mean_scores.resize(grid.size());
  std::size_t best = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double s = 0.0;
    for (double v : scores[p]) s += v;
    result.mean_scores[p] = s / static_cast<double>(folds.size());
    if (result.mean_scores[p] > result.mean_scores[best]) best = p;
  }
  result.best = grid[best];
  result.best_score = result.mean_scores[best];
  return result;
}

}  // namespace intent
