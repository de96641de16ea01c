#pragma once

#include "intent/classifier.hpp"
#include "intent/eeg_features.hpp"
#include "intent/eeg_preproc.hpp"
#include "intent/epoching.hpp"
#include "intent/fusion.hpp"
#include "intent/gaze_features.hpp"
#include "intent/gaze_preproc.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

enum class Protocol { Louo, WithinUser, Windowed };

std::string_view to_string(Protocol protocol);
std::optional<Protocol> parse_protocol(std::string_view name);

// Which EEG representation feeds the EEG branch.
enum class EegMethod { Pyeeg, Csp };

std::string_view to_string(EegMethod method);
std::optional<EegMethod> parse_eeg_method(std::string_view name);

struct ModelConfig {
  ClassifierKind classifier = ClassifierKind::Svm;
  ClassifierKind meta_classifier = ClassifierKind::Svm;
  int cv_folds = 5;
  int stacking_folds = 5;
  std::vector<Kernel> svm_kernels = {Kernel::Linear, Kernel::Rbf};
  std::vector<double> svm_c = {0.1, 1.0, 10.0, 100.0};
  std::vector<double> svm_gamma = {0.01, 0.1, 1.0};
  std::vector<int> rf_n_trees = {100};
  std::vector<int> rf_max_depth = {4, 8, 16};
  std::vector<int> rf_min_leaf = {1};
  double nb_var_smoothing = 1e-9;

  std::vector<HyperParams> grid_for(ClassifierKind kind) const;
  ModelSpec spec() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct EvalConfig {
  Protocol protocol = Protocol::Louo;
  int repeats = 10;
  double test_fraction = 0.2;
  std::vector<double> windows = {0.5, 1.0, 1.5, 2.0};
  Protocol window_protocol = Protocol::Louo;
  std::uint64_t seed = 42;
  // Test hook: adds one evaluation epoch to the first fitted transform of every fold.
  bool inject_leakage = false;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct PipelineConfig {
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "results";
  IvtConfig ivt;
  EegPreprocConfig eeg_preproc;
  SliceOptions epoching;
  EegMethod eeg_method = EegMethod::Pyeeg;
  EegFeatureConfig eeg_features;
  GazeFeatureConfig gaze_features;
  ModelConfig model;
  FusionStrategy strategy = FusionStrategy::Early;
  std::vector<FusionStrategy> compare;  // extra strategies evaluated on the same fits
  EvalConfig eval;

  // Throws ConfigError naming the offending key.
  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// YAML, or JSON for *.json files. Unknown keys and type errors throw ConfigError.
PipelineConfig load_config(const std::filesystem::path& file);
PipelineConfig parse_config_yaml(std::string_view text);
PipelineConfig parse_config_json(std::string_view text);

// Every setting as canonical JSON; parse_config_json(config_to_json(c)) == c.
std::string config_to_json(const PipelineConfig& config);

// Dotted names of every accepted key, e.g. "eval.seed".
std::vector<std::string> config_keys();

}  // namespace intent
