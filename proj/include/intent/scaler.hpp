#pragma once

#include <Eigen/Dense>

namespace intent {

struct ScalerModel {
  Eigen::VectorXd mins;
  Eigen::VectorXd maxs;
};

ScalerModel fit_scaler(const Eigen::MatrixXd& x);

// (x - min) / (max - min) per column; constant columns map to 0. No clamping.
Eigen::MatrixXd apply_scaler(const ScalerModel& model, const Eigen::MatrixXd& x);

}  // namespace intent
