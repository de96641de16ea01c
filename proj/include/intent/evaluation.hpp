#pragma once

#include "intent/config.hpp"
#include "intent/feature_table.hpp"
#include "intent/fusion.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace intent {

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  void add(const Confusion& o);
};

struct FoldRecord {
  std::string unit;
  int repeat = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  Confusion confusion;
  Eigen::Index eeg_dim = 0;
  std::vector<std::string> gaze_selected;
};

struct UnitResult {
  std::string unit;
  double accuracy = 0.0;
  std::vector<double> repeat_accuracies;  // within-user protocol only
};

struct Comparison {
  std::string a;
  std::string b;
  double mean_b = 0.0;
  double t = 0.0;
  double p = 1.0;
  int df = 0;
  double alpha_adjusted = 0.05;
  bool significant = false;
  bool degenerate = false;
};

struct EvalReport {
  Protocol protocol = Protocol::Louo;
  std::optional<double> window_s;
  FusionStrategy strategy = FusionStrategy::Early;
  std::vector<UnitResult> units;
  double mean_accuracy = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  Confusion confusion;
  std::vector<FoldRecord> folds;
  std::vector<Comparison> comparisons;
  std::size_t n_epochs = 0;
  std::vector<std::string> warnings;
};

// Every fitted transform records the epochs it saw.
struct FitRecord {
  std::string transform;
  std::set<std::string> epoch_ids;
};

// Throws LeakageError if any transform saw one of the test epochs.
void assert_no_leakage(std::span<const FitRecord> fits, std::span<const std::string> test_ids);

struct FoldOutcome {
  std::vector<FoldRecord> per_strategy;  // same order as the requested strategies
  std::vector<FitRecord> fits;
  std::vector<std::string> warnings;
};

// Fits all transforms once on train_rows, then trains and tests every strategy.
FoldOutcome run_fold(const FeatureTable& table, std::span<const std::size_t> train_rows,
                     std::span<const std::size_t> test_rows, const PipelineConfig& config,
                     std::span<const FusionStrategy> strategies, std::uint64_t seed);

// One report per strategy; strategies[0] carries the paired comparisons against the rest.
std::vector<EvalReport> louo_evaluate(const FeatureTable& table, const PipelineConfig& config,
                                      std::span<const FusionStrategy> strategies, std::uint64_t seed);
std::vector<EvalReport> within_user_evaluate(const FeatureTable& table, const PipelineConfig& config,
                                             std::span<const FusionStrategy> strategies,
                                             int n_repeats, double test_fraction, std::uint64_t seed);

// Reports for every table (window) under the chosen protocol. The tables must cover
// the identical epoch set.
std::vector<std::vector<EvalReport>> windowed_evaluate(std::span<const FeatureTable> tables,
                                                       const PipelineConfig& config,
                                                       std::span<const FusionStrategy> strategies,
                                                       Protocol protocol, std::uint64_t seed);

// Stratified train/test split; nullopt if a class cannot contribute to both sides.
std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_split(
    std::span<const std::size_t> rows, std::span<const int> labels, double test_fraction,
    std::uint64_t seed);

FeatureOptions feature_options(const PipelineConfig& config);

struct EvalRun {
  std::string config_echo;  // config_to_json of the effective configuration
  std::vector<EvalReport> reports;  // primary strategy, one per window for the windowed protocol
  std::vector<UserLoadReport> load_reports;
  std::vector<std::string> excluded_users;
  std::vector<std::string> warnings;
};

EvalRun run_evaluation(const PipelineConfig& config, const Manifest& manifest,
                       const UserSource& source);
// Streams users from config.dataset.
EvalRun run_evaluation(const PipelineConfig& config);

}  // namespace intent
