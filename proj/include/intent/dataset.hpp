#pragma once

#include "intent/types.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace intent {

// Canonical on-disk layout:
//   manifest.json
//   user_<id>/eeg.csv     t,<ch1>,...,<chN>
//   user_<id>/gaze.csv    t,lx,ly,rx,ry,lvalid,rvalid,eye_dist_mm
//   user_<id>/events.csv  trial_id,target_tool,nav_start,nav_end,cue_start,cue_end,search_start,search_found

std::filesystem::path user_dir(const std::filesystem::path& root, const std::string& user_id);

Manifest read_manifest(const std::filesystem::path& root);
void write_manifest(const std::filesystem::path& root, const Manifest& manifest);

// Reads users one at a time so callers can bound memory on large recordings.
class DatasetReader {
 public:
  // Throws DataError when manifest.json is missing or invalid.
  explicit DatasetReader(std::filesystem::path root);

  const Manifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }

  // Loads and validates one user. Returns nullopt (report.failed set) when the
  // user's files are unusable; invalid trials are dropped and counted.
  std::optional<UserRecording> read_user(const std::string& user_id, UserLoadReport& report) const;

 private:
  std::filesystem::path root_;
  Manifest manifest_;
};

Dataset load_dataset(const std::filesystem::path& root);

// Drops trials violating TrialEvents invariants or lying outside the EEG/gaze
// time ranges.
void validate_trials(UserRecording& user, UserLoadReport& report);

void write_user(const std::filesystem::path& root, const UserRecording& user);
void write_eeg_csv(const std::filesystem::path& file, const EegRecording& eeg);
void write_gaze_csv(const std::filesystem::path& file, const std::vector<GazeSample>& gaze);
void write_events_csv(const std::filesystem::path& file, const std::vector<TrialEvents>& trials);

struct AdapterOptions {
  // Published gaze files may use a mirrored calibration frame; these flags map
  // x -> 1 - x and/or y -> 1 - y while converting.
  bool flip_x = false;
  bool flip_y = false;
};

// Single conversion boundary from an externally published recording export to
// the canonical layout above.
void adapt_published_layout(const std::filesystem::path& source,
                            const std::filesystem::path& destination,
                            const AdapterOptions& options);

}  // namespace intent
