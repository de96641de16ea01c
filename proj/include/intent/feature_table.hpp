#pragma once

#include "intent/dataset.hpp"
#include "intent/eeg_features.hpp"
#include "intent/eeg_preproc.hpp"
#include "intent/epoching.hpp"
#include "intent/gaze_preproc.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace intent {

struct EpochInfo {
  std::string id;
  std::string user_id;
  int trial_id = 0;
  Intent intent = Intent::Navigational;
  Tool tool = Tool::Hammer;
  int label = 0;
  double duration_s = 0.0;
  double search_duration_s = 0.0;
};

// Per-epoch features cached once so that every fold refits only the learned
// transforms. Rows are ordered by user (manifest order), trial, then nav/info.
struct FeatureTable {
  std::optional<double> window_s;  // prefix window, or full epochs
  std::vector<std::string> channels;
  std::vector<EpochInfo> epochs;
  Eigen::MatrixXd pyeeg;                     // [n x 15*channels] or empty
  std::vector<Eigen::MatrixXd> covariances;  // per-epoch channel covariance or empty
  Eigen::MatrixXd gaze;                      // [n x 17]
  std::vector<std::string> warnings;

  std::size_t rows() const { return epochs.size(); }
  std::vector<int> labels() const;
  std::vector<std::string> users() const;  // order of first appearance
  std::vector<std::size_t> rows_of(const std::string& user_id) const;
};

struct FeatureOptions {
  IvtConfig ivt;
  EegPreprocConfig eeg_preproc;
  SliceOptions slice;
  EegFeatureConfig eeg;
  bool pyeeg = true;
  bool covariance = false;
  std::vector<double> windows;  // empty: full epochs, one table
  // Trials whose search phase is shorter than this are left out of every table.
  double min_search_s = 0.0;
};

using UserSource =
    std::function<std::optional<UserRecording>(const std::string& user_id, UserLoadReport& report)>;

UserSource reader_source(const DatasetReader& reader);

struct FeatureBuild {
  std::vector<FeatureTable> tables;  // one per window (or a single full-epoch table)
  std::vector<UserLoadReport> load_reports;
  std::vector<std::string> excluded_users;
  std::vector<std::string> warnings;
};

// Preprocesses, epochs and featurizes one user at a time; raw recordings are
// released as soon as the user's rows are cached.
FeatureBuild build_feature_tables(const Manifest& manifest, const UserSource& source,
                                  const FeatureOptions& options);

struct UserEpochs {
  SliceResult slices;
  std::vector<std::size_t> bad_channels;
};

// Fixation detection, EEG preprocessing and equal-duration epoching for one user.
UserEpochs prepare_user_epochs(const UserRecording& user, const Manifest& manifest,
                               const FeatureOptions& options);

// Rows of a table, in the given order.
FeatureTable select_rows(const FeatureTable& table, std::span<const std::size_t> rows);

}  // namespace intent
