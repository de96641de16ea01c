#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

// Fatal problems with input data (missing manifest, unreadable files, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid pipeline configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fitted transform saw an epoch that is also in the evaluation set.
class LeakageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Channels are rows so that each channel's time series is contiguous.
using SignalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Normalized screen coordinates: origin top-left, x to the right, y down.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct ScreenGeometry {
  int width_px = 1920;
  int height_px = 1080;
  double width_mm = 531.0;
  double height_mm = 299.0;
  double viewer_distance_mm = 600.0;

  void validate() const;

  // Visual angle in degrees subtended by two normalized screen points,
  // 2 * atan(d_mm / (2 * viewer_distance_mm)).
  double visual_angle_deg(Point2 a, Point2 b) const;

  friend bool operator==(const ScreenGeometry&, const ScreenGeometry&) = default;
};

struct GazeSample {
  double t = 0.0;
  Point2 left;
  Point2 right;
  bool left_valid = false;
  bool right_valid = false;
  double eye_distance_mm = 0.0;
};

struct EegRecording {
  std::vector<std::string> channel_names;
  double fs_hz = 0.0;
  SignalMatrix samples;  // [channels x time], microvolts
  double t0 = 0.0;

  std::size_t n_channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(samples.cols()); }
  double t_end() const;
  // Nearest sample index for time t (may be out of range).
  long index_of(double t) const;
};

enum class Tool { Hammer, Pliers, Saw, Screwdriver, Wrench };

std::string_view to_string(Tool tool);
std::optional<Tool> parse_tool(std::string_view name);
inline constexpr Tool kAllTools[] = {Tool::Hammer, Tool::Pliers, Tool::Saw, Tool::Screwdriver,
                                     Tool::Wrench};

struct TrialEvents {
  int trial_id = 0;
  std::string user_id;
  Tool target_tool = Tool::Hammer;
  double nav_start = 0.0;
  double nav_end = 0.0;
  double cue_start = 0.0;
  double cue_end = 0.0;
  double search_start = 0.0;
  double search_found = 0.0;

  double search_duration() const { return search_found - search_start; }
  double nav_duration() const { return nav_end - nav_start; }

  // Description of the first violated ordering/duration invariant, if any.
  std::optional<std::string> violation() const;
};

// Navigational is the negative class (label 0), Informational the positive one.
enum class Intent { Navigational = 0, Informational = 1 };

std::string_view to_string(Intent intent);
inline int label_of(Intent intent) { return intent == Intent::Informational ? 1 : 0; }

struct Fixation {
  double start_t = 0.0;
  double end_t = 0.0;
  Point2 centroid;
  double duration_s = 0.0;

  friend bool operator==(const Fixation&, const Fixation&) = default;
};

struct Epoch {
  std::string user_id;
  int trial_id = 0;
  Intent intent = Intent::Navigational;
  Tool target_tool = Tool::Hammer;
  SignalMatrix eeg;  // [channels x n]
  double fs_hz = 0.0;
  double onset_t = 0.0;
  std::vector<Fixation> fixations;
  double duration_s = 0.0;
  double search_duration_s = 0.0;

  // Stable identity "<user>/<trial>/<nav|info>" used for provenance checks.
  std::string id() const;
};

std::string epoch_id(std::string_view user_id, int trial_id, Intent intent);

struct Manifest {
  std::vector<std::string> users;
  double eeg_fs_hz = 500.0;
  double gaze_fs_hz = 250.0;
  std::vector<std::string> channel_names;
  ScreenGeometry screen;
};

struct UserRecording {
  std::string user_id;
  std::vector<GazeSample> gaze;
  EegRecording eeg;
  std::vector<TrialEvents> trials;
};

struct UserLoadReport {
  std::string user_id;
  std::size_t trials_read = 0;
  std::size_t dropped_trials = 0;
  std::vector<std::string> drop_reasons;
  std::size_t skipped_rows = 0;
  std::vector<std::string> warnings;
  bool failed = false;
  std::string failure;
};

struct Dataset {
  Manifest manifest;
  std::vector<UserRecording> users;
  std::vector<UserLoadReport> load_report;

  const ScreenGeometry& geometry() const { return manifest.screen; }
  const UserRecording& user(std::string_view user_id) const;
};

}  // namespace intent
