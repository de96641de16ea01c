#include "intent/gaze_preproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intent {

namespace {

constexpr double kTimeEps = 1e-9;

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class Valid, class Get, class Set>
void fill_eye(std::vector<GazeSample>& s, double max_gap_s, Valid valid, Get get, Set set) {
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n && !valid(s[i])) ++i;  // leading gap has no left anchor
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && !valid(s[j])) ++j;
    if (j >= n) break;  // trailing gap has no right anchor
    if (j > i + 1) {
      const double span = s[j].t - s[i].t;
      const double dt = span / static_cast<double>(j - i);
      const double gap = dt * static_cast<double>(j - i - 1);
      if (gap <= max_gap_s + kTimeEps) {
        const Point2 a = get(s[i]);
        const Point2 b = get(s[j]);
        for (std::size_t k = i + 1; k < j; ++k) {
          const double f = (s[k].t - s[i].t) / span;
          const bool had_distance = s[k].left_valid || s[k].right_valid;
          set(s[k], Point2{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
          if (!had_distance) {
            s[k].eye_distance_mm =
                s[i].eye_distance_mm + f * (s[j].eye_distance_mm - s[i].eye_distance_mm);
          }
        }
      }
    }
    i = j;
  }
}

}  // namespace

void IvtConfig::validate() const {
  if (max_gap_s < 0.0 || merge_max_gap_s < 0.0 || merge_max_angle_deg < 0.0 ||
      min_fixation_s < 0.0) {
    throw std::invalid_argument("ivt: gap, angle and duration limits must be non-negative");
  }
  if (median_window < 1 || median_window % 2 == 0) {
    throw std::invalid_argument("ivt: median_window must be odd and >= 1");
  }
  if (!(velocity_window_s > 0.0)) throw std::invalid_argument("ivt: velocity_window_s must be > 0");
  if (!(threshold_deg_s > 0.0)) throw std::invalid_argument("ivt: threshold_deg_s must be > 0");
}

std::vector<GazeSample> fill_gaps(std::span<const GazeSample> samples, double max_gap_s) {
  std::vector<GazeSample> out(samples.begin(), samples.end());
  fill_eye(
      out, max_gap_s, [](const GazeSample& g) { return g.left_valid; },
      [](const GazeSample& g) { return g.left; },
      [](GazeSample& g, Point2 p) {
        g.left = p;
        g.left_valid = true;
      });
  fill_eye(
      out, max_gap_s, [](const GazeSample& g) { return g.right_valid; },
      [](const GazeSample& g) { return g.right; },
      [](GazeSample& g, Point2 p) {
        g.right = p;
        g.right_valid = true;
      });
  return out;
}

std::vector<GazePoint> select_eye(std::span<const GazeSample> samples) {
  std::vector<GazePoint> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    GazePoint p{s.t, {}, true};
    if (s.left_valid && s.right_valid) {
      p.xy = {0.5 * (s.left.x + s.right.x), 0.5 * (s.left.y + s.right.y)};
    } else if (s.left_valid) {
      p.xy = s.left;
    } else if (s.right_valid) {
      p.xy = s.right;
    } else {
      p.valid = false;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<GazePoint> smooth_median(std::span<const GazePoint> points, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("smooth_median: window must be odd and >= 1");
  }
  const auto n = static_cast<long>(points.size());
  const long half = window / 2;
  std::vector<GazePoint> out(points.begin(), points.end());
  std::vector<double> xs;
  std::vector<double> ys;
  for (long i = 0; i < n; ++i) {
    if (!points[static_cast<std::size_t>(i)].valid) continue;
    const long h = std::min({half, i, n - 1 - i});
    xs.clear();
    ys.clear();
    for (long k = i - h; k <= i + h; ++k) {
      const auto& p = points[static_cast<std::size_t>(k)];
      if (!p.valid) continue;
      xs.push_back(p.xy.x);
      ys.push_back(p.xy.y);
    }
    out[static_cast<std::size_t>(i)].xy = {median_of(xs), median_of(ys)};
  }
  return out;
}

std::vector<VelocitySample> compute_velocity(std::span<const GazePoint> points,
                                             const ScreenGeometry& geometry,
                                             double velocity_window_s) {
  geometry.validate();
  if (!(velocity_window_s > 0.0)) {
    throw std::invalid_argument("compute_velocity: window must be > 0");
  }
  const double half = 0.5 * velocity_window_s;
  const std::size_t n = points.size();
  std::vector<VelocitySample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points[i];
    out[i] = {p.t, p.xy, 0.0, false};
    if (!p.valid) continue;
    std::size_t first = i;
    for (std::size_t k = i; k-- > 0;) {
      if (points[k].t < p.t - half - kTimeEps) break;
      if (points[k].valid) first = k;
    }
    std::size_t last = i;
    for (std::size_t k = i + 1; k < n; ++k) {
      if (points[k].t > p.t + half + kTimeEps) break;
      if (points[k].valid) last = k;
    }
    if (first == last) continue;
    const double dt = points[last].t - points[first].t;
    if (!(dt > 0.0)) continue;
    out[i].speed_deg_s = geometry.visual_angle_deg(points[first].xy, points[last].xy) / dt;
    out[i].valid = true;
  }
  return out;
}

std::vector<Fixation> ivt_classify(std::span<const VelocitySample> velocities,
                                   double threshold_deg_s) {
  if (!(threshold_deg_s > 0.0)) throw std::invalid_argument("ivt_classify: threshold must be > 0");
  std::vector<Fixation> out;
  const std::size_t n = velocities.size();
  std::size_t i = 0;
  while (i < n) {
    if (!velocities[i].valid || velocities[i].speed_deg_s >= threshold_deg_s) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double sx = 0.0;
    double sy = 0.0;
    while (j < n && velocities[j].valid && velocities[j].speed_deg_s < threshold_deg_s) {
      sx += velocities[j].xy.x;
      sy += velocities[j].xy.y;
      ++j;
    }
    const double start = velocities[i].t;
    const double end = velocities[j - 1].t;
    if (end > start) {
      const auto count = static_cast<double>(j - i);
      out.push_back({start, end, {sx / count, sy / count}, end - start});
    }
    i = j;
  }
  return out;
}

std::vector<Fixation> merge_fixations(std::span<const Fixation> fixations, double max_gap_s,
                                      double max_angle_deg, const ScreenGeometry& geometry) {
  std::vector<Fixation> cur(fixations.begin(), fixations.end());
  bool changed = true;
  while (changed && cur.size() > 1) {
    changed = false;
    std::vector<Fixation> next;
    next.reserve(cur.size());
    next.push_back(cur.front());
    for (std::size_t k = 1; k < cur.size(); ++k) {
      Fixation& a = next.back();
      const Fixation& b = cur[k];
      const double gap = b.start_t - a.end_t;
      if (gap <= max_gap_s + kTimeEps &&
          geometry.visual_angle_deg(a.centroid, b.centroid) <= max_angle_deg) {
        double wa = a.duration_s;
        double wb = b.duration_s;
        if (wa + wb <= 0.0) wa = wb = 1.0;
        const double w = wa + wb;
        a.centroid = {(wa * a.centroid.x + wb * b.centroid.x) / w,
                      (wa * a.centroid.y + wb * b.centroid.y) / w};
        a.end_t = std::max(a.end_t, b.end_t);
        a.duration_s = a.end_t - a.start_t;
        changed = true;
      } else {
        next.push_back(b);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<Fixation> discard_short(std::span<const Fixation> fixations, double min_duration_s) {
  std::vector<Fixation> out;
  out.reserve(fixations.size());
  for (const auto& f : fixations) {
    if (f.duration_s >= min_duration_s) out.push_back(f);
  }
  return out;
}

std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const ScreenGeometry& geometry, const IvtConfig& config) {
  config.validate();
  const auto filled = fill_gaps(samples, config.max_gap_s);
  const auto points = select_eye(filled);
  const auto smoothed = smooth_median(points, config.median_window);
  const auto velocities = compute_velocity(smoothed, geometry, config.velocity_window_s);
  const auto raw = ivt_classify(velocities, config.threshold_deg_s);
  const auto merged =
      merge_fixations(raw, config.merge_max_gap_s, config.merge_max_angle_deg, geometry);
  return discard_short(merged, config.min_fixation_s);
}

}  // namespace intent
