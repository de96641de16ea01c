#include "intent/naive_bayes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace intent {

namespace {

Eigen::MatrixXd joint_log_likelihood(const NbModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.mean.cols()) throw std::invalid_argument("naive Bayes: dimension mismatch");
  Eigen::MatrixXd jll(x.rows(), 2);
  for (int c = 0; c < 2; ++c) {
    const Eigen::ArrayXd var = m.variance.row(c).transpose().array();
    const double norm = -0.5 * (2.0 * std::numbers::pi * var).log().sum();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Eigen::ArrayXd d = x.row(i).transpose().array() - m.mean.row(c).transpose().array();
      jll(i, c) = m.log_prior(c) + norm - 0.5 * (d * d / var).sum();
    }
  }
  return jll;
}

}  // namespace

NbModel train_nb(const Eigen::MatrixXd& x, std::span<const int> labels, const NbParams& params) {
  if (x.rows() != static_cast<Eigen::Index>(labels.size()) || x.rows() == 0) {
    throw std::invalid_argument("train_nb: rows and labels differ");
  }
  const Eigen::Index d = x.cols();
  NbModel m;
  m.params = params;
  m.mean = Eigen::MatrixXd::Zero(2, d);
  m.variance = Eigen::MatrixXd::Zero(2, d);
  double count[2] = {0.0, 0.0};
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y != 0 && y != 1) throw std::invalid_argument("train_nb: labels must be 0 or 1");
    m.mean.row(y) += x.row(i);
    count[y] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) {
    throw std::invalid_argument("train_nb: training set must contain both classes");
  }
  for (int c = 0; c < 2; ++c) m.mean.row(c) /= count[c];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    m.variance.row(y) += (x.row(i) - m.mean.row(y)).array().square().matrix();
  }
  for (int c = 0; c < 2; ++c) m.variance.row(c) /= count[c];

  const Eigen::RowVectorXd mu = x.colwise().mean();
  const double max_var = d > 0 ? ((x.rowwise() - mu).array().square().colwise().mean()).maxCoeff() : 0.0;
  // All-constant inputs: fall back to an absolute floor to keep densities proper.
  const double eps = max_var > 0.0 ? params.var_smoothing * max_var : params.var_smoothing;
  m.variance.array() += eps;
  const double n = count[0] + count[1];
  m.log_prior << std::log(count[0] / n), std::log(count[1] / n);
  return m;
}

Eigen::VectorXd nb_decision(const NbModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd jll = joint_log_likelihood(model, x);
  return jll.col(1) - jll.col(0);
}

Eigen::MatrixXd nb_posterior(const NbModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd jll = joint_log_likelihood(model, x);
  Eigen::MatrixXd p(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mx = jll.row(i).maxCoeff();
    const double e0 = std::exp(jll(i, 0) - mx);
    const double e1 = std::exp(jll(i, 1) - mx);
    p(i, 0) = e0 / (e0 + e1);
    p(i, 1) = e1 / (e0 + e1);
  }
  return p;
}

}  // namespace intent
