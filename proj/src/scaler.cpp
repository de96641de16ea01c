#include "intent/scaler.hpp"

#include <stdexcept>

namespace intent {

ScalerModel fit_scaler(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw std::invalid_argument("fit_scaler: need at least one row");
  return {x.colwise().minCoeff().transpose(), x.colwise().maxCoeff().transpose()};
}

Eigen::MatrixXd apply_scaler(const ScalerModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.mins.size()) throw std::invalid_argument("apply_scaler: dimension mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = model.maxs(j) - model.mins(j);
    if (range > 0.0) {
      out.col(j) = (x.col(j).array() - model.mins(j)) / range;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

}  // namespace intent
