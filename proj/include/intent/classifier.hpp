#pragma once

#include "intent/naive_bayes.hpp"
#include "intent/random_forest.hpp"
#include "intent/svm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace intent {

enum class ClassifierKind { Svm, NaiveBayes, RandomForest };

std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view name);

using HyperParams = std::variant<SvmParams, NbParams, RfParams>;

ClassifierKind kind_of(const HyperParams& params);
std::map<std::string, std::string> hyperparameter_map(const HyperParams& params);

class Classifier {
 public:
  using Model = std::variant<SvmModel, NbModel, RfModel>;

  // Labels are 0/1. seed only affects stochastic learners.
  static Classifier train(const Eigen::MatrixXd& x, std::span<const int> labels,
                          const HyperParams& params, std::uint64_t seed,
                          std::vector<std::string>* warnings = nullptr);

  explicit Classifier(Model model) : model_(std::move(model)) {}

  ClassifierKind kind() const;
  HyperParams hyperparameters() const;
  const Model& model() const { return model_; }
  int n_features() const;

  // SVM: signed margin; NB: log posterior odds; RF: positive vote fraction - 0.5.
  Eigen::VectorXd decision_score(const Eigen::MatrixXd& x) const;
  // 1 where decision_score > 0.
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  // Versioned JSON document with kind, hyperparameters and fitted parameters.
  std::string to_json() const;
  static Classifier from_json(std::string_view text);

 private:
  Model model_;
};

}  // namespace intent
