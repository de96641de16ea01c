#include "intent/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace intent {

namespace {

constexpr double kTau = 1e-12;

}  // namespace

std::string_view to_string(Kernel kernel) { return kernel == Kernel::Linear ? "linear" : "rbf"; }

std::optional<Kernel> parse_kernel(std::string_view name) {
  if (name == "linear") return Kernel::Linear;
  if (name == "rbf") return Kernel::Rbf;
  return std::nullopt;
}

std::vector<int> to_signed_labels(std::span<const int> labels) {
  std::vector<int> y(labels.size());
  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    y[i] = labels[i] == 1 ? 1 : -1;
    (labels[i] == 1 ? pos : neg) = true;
  }
  if (!pos || !neg) throw std::invalid_argument("training set must contain both classes");
  return y;
}

SmoResult smo_solve(const Eigen::MatrixXd& kernel, std::span<const int> y, double c,
                    const SmoOptions& options) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (kernel.rows() != n || kernel.cols() != n) throw std::invalid_argument("smo_solve: kernel size");
  if (!(c > 0.0)) throw std::invalid_argument("smo_solve: C must be > 0");
  const long max_iter = options.max_iterations > 0 ? options.max_iterations : 10 * static_cast<long>(n);

  SmoResult r;
  r.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto& a = r.alpha;
  const auto yd = [&](Eigen::Index t) { return static_cast<double>(y[static_cast<std::size_t>(t)]); };
  const auto in_up = [&](Eigen::Index t) { return yd(t) > 0 ? a(t) < c : a(t) > 0.0; };
  const auto in_low = [&](Eigen::Index t) { return yd(t) > 0 ? a(t) > 0.0 : a(t) < c; };

  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -yd(t) * grad(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < options.tolerance) {
      r.converged = true;
      break;
    }

    const double yi = yd(i);
    const double yj = yd(j);
    const double kii = kernel(i, i);
    const double kjj = kernel(j, j);
    const double kij = kernel(i, j);
    const double ai_old = a(i);
    const double aj_old = a(j);
    if (yi != yj) {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0.0) {
        if (a(j) < 0.0) {
          a(j) = 0.0;
          a(i) = diff;
        }
      } else if (a(i) < 0.0) {
        a(i) = 0.0;
        a(j) = -diff;
      }
      if (diff > 0.0) {
        if (a(i) > c) {
          a(i) = c;
          a(j) = c - diff;
        }
      } else if (a(j) > c) {
        a(j) = c;
        a(i) = c + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > c) {
        if (a(i) > c) {
          a(i) = c;
          a(j) = sum - c;
        }
      } else if (a(j) < 0.0) {
        a(j) = 0.0;
        a(i) = sum;
      }
      if (sum > c) {
        if (a(j) > c) {
          a(j) = c;
          a(i) = sum - c;
        }
      } else if (a(i) < 0.0) {
        a(i) = 0.0;
        a(j) = sum;
      }
    }
    const double di = (a(i) - ai_old) * yi;
    const double dj = (a(j) - aj_old) * yj;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += yd(t) * (kernel(t, i) * di + kernel(t, j) * dj);
    }
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  long n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yd(t) * grad(t);
    if (a(t) >= c) {
      if (yd(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a(t) <= 0.0) {
      if (yd(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  r.bias = -rho;
  return r;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * a * b.transpose();
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const SvmParams& params) {
  if (a.cols() != b.cols()) throw std::invalid_argument("kernel_matrix: dimension mismatch");
  if (params.kernel == Kernel::Linear) return a * b.transpose();
  return (-params.gamma * squared_distances(a, b).array()).exp().matrix();
}

SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const int> labels, const SvmParams& params,
                   const Eigen::MatrixXd& kernel, std::vector<std::string>* warnings) {
  if (x.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("train_svm: rows and labels differ");
  }
  if (params.kernel == Kernel::Rbf && !(params.gamma > 0.0)) {
    throw std::invalid_argument("train_svm: gamma must be > 0");
  }
  const auto y = to_signed_labels(labels);
  const SmoResult sol = smo_solve(kernel, y, params.c);
  if (!sol.converged && warnings) {
    warnings->push_back("SVM solver stopped after " + std::to_string(sol.iterations) +
                        " iterations without reaching tolerance");
  }
  SvmModel m;
  m.params = params;
  m.bias = sol.bias;
  m.converged = sol.converged;
  m.iterations = sol.iterations;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (sol.alpha(i) > 0.0) sv.push_back(i);
  }
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    m.support_vectors.row(kk) = x.row(sv[k]);
    m.dual_coef(kk) = sol.alpha(sv[k]) * y[static_cast<std::size_t>(sv[k])];
  }
  return m;
}

SvmModel train_svm(const Eigen::MatrixXd& x, std::span<const int> labels, const SvmParams& params,
                   std::vector<std::string>* warnings) {
  return train_svm(x, labels, params, kernel_matrix(x, x, params), warnings);
}

Eigen::VectorXd svm_decision(const SvmModel& model, const Eigen::MatrixXd& x) {
  if (model.support_vectors.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), model.bias);
  if (x.cols() != model.support_vectors.cols()) {
    throw std::invalid_argument("svm_decision: dimension mismatch");
  }
  const Eigen::MatrixXd k = kernel_matrix(x, model.support_vectors, model.params);
  return (k * model.dual_coef).array() + model.bias;
}

}  // namespace intent
