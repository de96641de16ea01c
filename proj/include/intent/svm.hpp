#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

enum class Kernel { Linear, Rbf };

std::string_view to_string(Kernel kernel);
std::optional<Kernel> parse_kernel(std::string_view name);

struct SvmParams {
  Kernel kernel = Kernel::Rbf;
  double c = 1.0;
  double gamma = 0.1;  // unused by the linear kernel

  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct SmoOptions {
  double tolerance = 1e-3;
  long max_iterations = 0;  // 0: 10 * n
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
};

// Soft-margin dual on a precomputed kernel matrix; y holds +1/-1. The working pair
// is the maximal KKT violating pair.
SmoResult smo_solve(const Eigen::MatrixXd& kernel, std::span<const int> y, double c,
                    const SmoOptions& options = {});

// Pairwise squared Euclidean distances between the rows of a and b.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const SvmParams& params);

struct SvmModel {
  SvmParams params;
  Eigen::MatrixXd support_vectors;
  Eigen::VectorXd dual_coef;  // alpha_i * y_i of each support vector
  double bias = 0.0;
  bool converged = true;
  long iterations = 0;
};

// Labels are 0/1; label 1 is the positive side of the margin. Throws
// std::invalid_argument unless both classes are present.
SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const int> labels, const SvmParams& params,
                   std::vector<std::string>* warnings = nullptr);

// Same, reusing a precomputed training kernel matrix.
SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const int> labels, const SvmParams& params,
                   const Eigen::MatrixXd& kernel, std::vector<std::string>* warnings = nullptr);

// sum_i alpha_i y_i K(x_i, x) + b for every row of x.
Eigen::VectorXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x);

std::vector<int> to_signed_labels(std::span<const int> labels);

}  // namespace intent
