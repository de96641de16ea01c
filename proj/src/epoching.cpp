#include "intent/epoching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intent {

namespace {

constexpr double kEps = 1e-9;

Epoch make_epoch(const TrialEvents& ev, Intent intent, const EegRecording& eeg, long first,
                 long count, double onset, double duration,
                 std::span<const Fixation> fixations) {
  Epoch e;
  e.user_id = ev.user_id;
  e.trial_id = ev.trial_id;
  e.intent = intent;
  e.target_tool = ev.target_tool;
  e.eeg = eeg.samples.middleCols(first, count);
  e.fs_hz = eeg.fs_hz;
  e.onset_t = onset;
  e.duration_s = duration;
  e.search_duration_s = ev.search_duration();
  e.fixations = clip_fixations(fixations, onset, onset + duration);
  return e;
}

}  // namespace

std::vector<Fixation> clip_fixations(std::span<const Fixation> fixations, double t_begin,
                                     double t_end) {
  std::vector<Fixation> out;
  for (const auto& f : fixations) {
    if (f.end_t <= t_begin || f.start_t >= t_end) continue;
    Fixation c = f;
    c.start_t = std::max(f.start_t, t_begin);
    c.end_t = std::min(f.end_t, t_end);
    c.duration_s = c.end_t - c.start_t;
    if (c.duration_s > 0.0) out.push_back(c);
  }
  return out;
}

SliceResult slice_user(const UserRecording& user, const EegRecording& eeg,
                       std::span<const Fixation> fixations, const SliceOptions& options) {
  SliceResult result;
  const double lo = eeg.t0 + options.edge_guard_s;
  const double hi = eeg.t_end() - options.edge_guard_s;
  const auto total = static_cast<long>(eeg.n_samples());
  for (const auto& ev : user.trials) {
    const std::string tag = "trial " + std::to_string(ev.trial_id) + ": ";
    const double d = std::min(ev.nav_duration(), ev.search_duration());
    if (d < options.min_duration_s) {
      result.excluded.push_back(tag + "epoch shorter than " +
                                std::to_string(options.min_duration_s) + " s");
      continue;
    }
    if (ev.nav_start < lo - kEps || ev.search_start + d > hi + kEps ||
        ev.nav_start + d > hi + kEps || ev.search_start < lo - kEps) {
      result.excluded.push_back(tag + "inside recording edge guard");
      continue;
    }
    const long n = std::lround(d * eeg.fs_hz);
    const long a = eeg.index_of(ev.nav_start);
    const long b = eeg.index_of(ev.search_start);
    if (n <= 0 || a < 0 || b < 0 || a + n > total || b + n > total) {
      result.excluded.push_back(tag + "epoch outside EEG samples");
      continue;
    }
    result.pairs.push_back({make_epoch(ev, Intent::Navigational, eeg, a, n, ev.nav_start, d,
                                       fixations),
                            make_epoch(ev, Intent::Informational, eeg, b, n, ev.search_start, d,
                                       fixations)});
  }
  return result;
}

SliceResult slice_trials(const Dataset& dataset, const std::string& user_id, const IvtConfig& ivt,
                         const SliceOptions& options) {
  const UserRecording& user = dataset.user(user_id);
  const auto fixations = detect_fixations(user.gaze, dataset.geometry(), ivt);
  return slice_user(user, user.eeg, fixations, options);
}

Epoch window_epoch(const Epoch& epoch, double window_s) {
  if (!(window_s > 0.0)) throw std::invalid_argument("window_epoch: window must be > 0");
  if (window_s > epoch.duration_s + kEps) {
    throw std::invalid_argument("window_epoch: window exceeds epoch duration");
  }
  if (std::abs(window_s - epoch.duration_s) <= kEps) return epoch;
  Epoch out = epoch;
  const long n = std::min<long>(std::lround(window_s * epoch.fs_hz), epoch.eeg.cols());
  out.eeg = epoch.eeg.leftCols(n);
  out.duration_s = window_s;
  out.fixations = clip_fixations(epoch.fixations, epoch.onset_t, epoch.onset_t + window_s);
  return out;
}

}  // namespace intent
