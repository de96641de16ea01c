#pragma once

#include <Eigen/Dense>

#include <span>

namespace intent {

struct NbParams {
  double var_smoothing = 1e-9;  // fraction of the largest feature variance

  friend bool operator==(const NbParams&, const NbParams&) = default;
};

struct NbModel {
  NbParams params;
  Eigen::Vector2d log_prior;
  Eigen::MatrixXd mean;      // [2 x d]
  Eigen::MatrixXd variance;  // [2 x d], smoothed
};

// Gaussian naive Bayes with empirical class priors. Labels are 0/1, both required.
NbModel train_nb(const Eigen::MatrixXd& x, std::span<const int> labels, const NbParams& params = {});

// log P(1 | x) - log P(0 | x) per row.
Eigen::VectorXd nb_decision(const NbModel& model, const Eigen::MatrixXd& x);

// Posterior class probabilities per row, [n x 2].
Eigen::MatrixXd nb_posterior(const NbModel& model, const Eigen::MatrixXd& x);

}  // namespace intent
