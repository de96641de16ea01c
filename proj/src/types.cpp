#include "intent/types.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace intent {

void ScreenGeometry::validate() const {
  if (width_px <= 0 || height_px <= 0 || !(width_mm > 0.0) || !(height_mm > 0.0) ||
      !(viewer_distance_mm > 0.0)) {
    throw DataError("screen geometry fields must be strictly positive");
  }
}

double ScreenGeometry::visual_angle_deg(Point2 a, Point2 b) const {
  const double dx = (b.x - a.x) * width_mm;
  const double dy = (b.y - a.y) * height_mm;
  const double d = std::hypot(dx, dy);
  return 2.0 * std::atan(d / (2.0 * viewer_distance_mm)) * 180.0 / std::numbers::pi;
}

double EegRecording::t_end() const {
  if (samples.cols() == 0) return t0;
  return t0 + static_cast<double>(samples.cols() - 1) / fs_hz;
}

long EegRecording::index_of(double t) const {
  return std::lround((t - t0) * fs_hz);
}

namespace {
constexpr std::array<std::string_view, 5> kToolNames = {"Hammer", "Pliers", "Saw", "Screwdriver",
                                                        "Wrench"};
}

std::string_view to_string(Tool tool) { return kToolNames[static_cast<std::size_t>(tool)]; }

std::optional<Tool> parse_tool(std::string_view name) {
  for (std::size_t i = 0; i < kToolNames.size(); ++i) {
    if (kToolNames[i] == name) return static_cast<Tool>(i);
  }
  return std::nullopt;
}

std::optional<std::string> TrialEvents::violation() const {
  const std::array<double, 6> times = {nav_start, nav_end, cue_start,
                                       cue_end,   search_start, search_found};
  for (double t : times) {
    if (!std::isfinite(t)) return "non-finite event time";
  }
  if (!(nav_start < nav_end)) return "nav_start >= nav_end";
  if (!(nav_end <= cue_start)) return "nav_end > cue_start";
  if (!(cue_start < cue_end)) return "cue_start >= cue_end";
  if (!(cue_end <= search_start)) return "cue_end > search_start";
  if (!(search_start < search_found)) return "search_found <= search_start";
  if (std::abs(nav_duration() - 5.0) > 0.05) return "navigation phase is not 5.0 +/- 0.05 s";
  return std::nullopt;
}

std::string_view to_string(Intent intent) {
  return intent == Intent::Informational ? "info" : "nav";
}

std::string epoch_id(std::string_view user_id, int trial_id, Intent intent) {
  std::string id(user_id);
  id += '/';
  id += std::to_string(trial_id);
  id += '/';
  id += to_string(intent);
  return id;
}

std::string Epoch::id() const { return epoch_id(user_id, trial_id, intent); }

const UserRecording& Dataset::user(std::string_view user_id) const {
  for (const auto& u : users) {
    if (u.user_id == user_id) return u;
  }
  throw DataError("unknown user: " + std::string(user_id));
}

}  // namespace intent
