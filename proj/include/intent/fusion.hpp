#pragma once

#include "intent/classifier.hpp"
#include "intent/feature_vector.hpp"
#include "intent/scaler.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

// EegOnly and GazeOnly are the uni-modal baselines ("none-eeg", "none-gaze").
enum class FusionStrategy { Early, Late, Hybrid, EegOnly, GazeOnly };

std::string_view to_string(FusionStrategy strategy);
std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name);

// Concatenation with the EEG block first; names gain "eeg." / "gaze." prefixes.
// Throws std::invalid_argument when the epoch ids differ.
FeatureVector early_fuse(const FeatureVector& eeg, const FeatureVector& gaze);

struct ModelSpec {
  std::vector<HyperParams> grid;       // branch and early classifiers
  std::vector<HyperParams> meta_grid;  // stacking classifier
  int cv_folds = 5;                    // grid-search folds
  int stacking_folds = 5;              // out-of-fold scores for meta training
};

struct FusionModel {
  FusionStrategy strategy = FusionStrategy::Early;
  Eigen::Index eeg_dim = 0;
  Eigen::Index gaze_dim = 0;
  std::optional<Classifier> eeg_classifier;
  std::optional<Classifier> gaze_classifier;
  std::optional<Classifier> early_classifier;
  std::optional<Classifier> meta_classifier;
  ScalerModel meta_scaler;
  // Stacking fold that produced each meta training row; that fold's rows were
  // excluded when fitting the branch models that scored them.
  std::vector<int> meta_provenance;
  Eigen::MatrixXd meta_training_inputs;  // raw out-of-fold scores
  std::vector<std::string> warnings;

  std::size_t classifier_count() const;
  // Columns fed to the meta classifier: eeg score, gaze score[, early score].
  Eigen::Index meta_input_dim() const;
};

// Inputs are row-aligned and already scaled on the training split. Branch
// hyperparameters are tuned on the full training data, then used unchanged for the
// out-of-fold stacking models and the final refit.
FusionModel train_fusion(const Eigen::MatrixXd& eeg, const Eigen::MatrixXd& gaze,
                         std::span<const int> labels, FusionStrategy strategy,
                         const ModelSpec& spec, std::uint64_t seed);

struct FusionPrediction {
  std::vector<int> labels;
  Eigen::VectorXd scores;
};

// Unscaled branch scores that feed the meta classifier (Late and Hybrid only).
Eigen::MatrixXd fusion_meta_inputs(const FusionModel& model, const Eigen::MatrixXd& eeg,
                                   const Eigen::MatrixXd& gaze);

// Meta classifier applied to raw branch scores, e.g. after ablating a column.
FusionPrediction predict_meta(const FusionModel& model, const Eigen::MatrixXd& meta_inputs);

FusionPrediction predict_fusion(const FusionModel& model, const Eigen::MatrixXd& eeg,
                                const Eigen::MatrixXd& gaze);

}  // namespace intent
