#pragma once

#include "intent/types.hpp"

#include <span>
#include <vector>

namespace intent {

// Velocity-threshold fixation identification. Defaults follow the Tobii I-VT
// fixation filter.
struct IvtConfig {
  double max_gap_s = 0.075;
  int median_window = 3;
  double velocity_window_s = 0.020;
  double threshold_deg_s = 30.0;
  double merge_max_gap_s = 0.075;
  double merge_max_angle_deg = 0.5;
  double min_fixation_s = 0.060;

  void validate() const;
  friend bool operator==(const IvtConfig&, const IvtConfig&) = default;
};

struct GazePoint {
  double t = 0.0;
  Point2 xy;
  bool valid = false;
};

struct VelocitySample {
  double t = 0.0;
  Point2 xy;
  double speed_deg_s = 0.0;
  bool valid = false;
};

// Linearly interpolates each eye across invalid runs no longer than max_gap_s.
std::vector<GazeSample> fill_gaps(std::span<const GazeSample> samples, double max_gap_s);

// Mean of both eyes when both are valid, otherwise the valid eye.
std::vector<GazePoint> select_eye(std::span<const GazeSample> samples);

// Centered moving median per coordinate over valid samples. The window shrinks
// symmetrically at the stream edges. Throws std::invalid_argument for even windows.
std::vector<GazePoint> smooth_median(std::span<const GazePoint> points, int window);

// Angular speed from the first and last valid samples inside a centered window.
std::vector<VelocitySample> compute_velocity(std::span<const GazePoint> points,
                                             const ScreenGeometry& geometry,
                                             double velocity_window_s);

std::vector<Fixation> ivt_classify(std::span<const VelocitySample> velocities,
                                   double threshold_deg_s);

// Merges neighbours closer than max_gap_s in time and max_angle_deg in space,
// repeating until no pair qualifies.
std::vector<Fixation> merge_fixations(std::span<const Fixation> fixations, double max_gap_s,
                                      double max_angle_deg, const ScreenGeometry& geometry);

std::vector<Fixation> discard_short(std::span<const Fixation> fixations, double min_duration_s);

std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const ScreenGeometry& geometry, const IvtConfig& config);

}  // namespace intent
