#pragma once

#include "intent/gaze_preproc.hpp"
#include "intent/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace intent {

struct SliceOptions {
  // Below this no valid fixation can survive the I-VT pipeline.
  double min_duration_s = 0.2;
  // Filter transients: epochs may not touch the first/last edge_guard_s of a recording.
  double edge_guard_s = 1.0;

  friend bool operator==(const SliceOptions&, const SliceOptions&) = default;
};

struct EpochPair {
  Epoch navigational;
  Epoch informational;
};

struct SliceResult {
  std::vector<EpochPair> pairs;
  std::vector<std::string> excluded;  // "trial <id>: <reason>"
};

// Both epochs of a trial share d = min(navigation length, search length) and
// start at their phase onsets (nav_start, search_start).
SliceResult slice_user(const UserRecording& user, const EegRecording& eeg,
                       std::span<const Fixation> fixations, const SliceOptions& options = {});

// Convenience: detects fixations on the user's gaze stream and slices the raw EEG.
SliceResult slice_trials(const Dataset& dataset, const std::string& user_id,
                         const IvtConfig& ivt = {}, const SliceOptions& options = {});

// Prefix window of an epoch. Throws std::invalid_argument unless 0 < window_s <= duration.
Epoch window_epoch(const Epoch& epoch, double window_s);

// Fixations intersecting [t_begin, t_end), clipped to that interval.
std::vector<Fixation> clip_fixations(std::span<const Fixation> fixations, double t_begin,
                                     double t_end);

}  // namespace intent
