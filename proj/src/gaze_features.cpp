#include "intent/gaze_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace intent {

namespace {

double guarded_ratio(double num, double den) {
  return std::min(num / std::max(den, kRatioEpsilon), kRatioCap);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

const std::array<std::string_view, kGazeFeatureCount>& gaze_feature_names() {
  static const std::array<std::string_view, kGazeFeatureCount> names = {
      "fix_n",           "fixn_dur_sum",     "fixn_dur_avg",
      "fixn_dur_sd",     "scan_dist_h",      "scan_dist_v",
      "scan_dist_euclid", "scan_hv_ratio",   "avg_sacc_length",
      "scan_speed_h",    "scan_speed_v",     "scan_speed",
      "box_area",        "box_area_per_time", "fixns_per_box_area",
      "hull_area_per_time", "fixns_per_hull_area"};
  return names;
}

std::vector<std::string> published_gaze_selection() {
  return {"fixn_dur_avg",  "fixn_dur_sd",        "scan_hv_ratio",   "fixn_dur_sum",
          "scan_speed_h", "fixns_per_box_area", "avg_sacc_length", "scan_speed_v"};
}

void GazeFeatureConfig::validate() const {
  if (!(clustering_threshold >= 0.0 && clustering_threshold <= 1.0)) {
    throw ConfigError("gaze_features.clustering_threshold: must lie in [0, 1]");
  }
  if (pinned_selection) {
    if (pinned_selection->empty()) {
      throw ConfigError("gaze_features.pinned_selection: must not be empty");
    }
    gaze_feature_indices(*pinned_selection);
  }
}

std::vector<std::size_t> gaze_feature_indices(std::span<const std::string> names) {
  const auto& all = gaze_feature_names();
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    const auto it = std::find(all.begin(), all.end(), n);
    if (it == all.end()) throw ConfigError("gaze_features.pinned_selection: unknown feature '" + n + "'");
    const auto i = static_cast<std::size_t>(it - all.begin());
    if (std::find(idx.begin(), idx.end(), i) != idx.end()) {
      throw ConfigError("gaze_features.pinned_selection: duplicate feature '" + n + "'");
    }
    idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

double convex_hull_area(std::span<const Point2> points) {
  if (points.size() < 3) return 0.0;
  std::vector<Point2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  const auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2> hull(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0.0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  if (hull.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

FeatureVector gaze_features(std::span<const Fixation> fixations, double scan_time_s) {
  if (!(scan_time_s > 0.0)) throw std::invalid_argument("gaze_features: scan_time_s must be > 0");
  FeatureVector fv;
  fv.modality = Modality::Gaze;
  for (auto n : gaze_feature_names()) fv.names.emplace_back(n);
  fv.values.assign(kGazeFeatureCount, 0.0);
  if (fixations.empty()) {
    fv.warnings.emplace_back("no fixations in epoch; gaze features set to 0");
    return fv;
  }
  auto& v = fv.values;
  const auto n = static_cast<double>(fixations.size());
  double dur_sum = 0.0;
  for (const auto& f : fixations) dur_sum += f.duration_s;
  const double dur_avg = dur_sum / n;
  double ss = 0.0;
  for (const auto& f : fixations) ss += (f.duration_s - dur_avg) * (f.duration_s - dur_avg);
  v[0] = n;
  v[1] = dur_sum;
  v[2] = dur_avg;
  v[3] = std::sqrt(ss / n);
  if (fixations.size() < 2) return fv;

  double h = 0.0;
  double vert = 0.0;
  double euclid = 0.0;
  for (std::size_t i = 1; i < fixations.size(); ++i) {
    const double dx = fixations[i].centroid.x - fixations[i - 1].centroid.x;
    const double dy = fixations[i].centroid.y - fixations[i - 1].centroid.y;
    h += std::abs(dx);
    vert += std::abs(dy);
    euclid += std::hypot(dx, dy);
  }
  const double box = h * vert;
  std::vector<Point2> centroids;
  centroids.reserve(fixations.size());
  for (const auto& f : fixations) centroids.push_back(f.centroid);
  const double hull = convex_hull_area(centroids);

  v[4] = h;
  v[5] = vert;
  v[6] = euclid;
  v[7] = guarded_ratio(h, vert);
  v[8] = euclid / (n - 1.0);
  v[9] = h / scan_time_s;
  v[10] = vert / scan_time_s;
  v[11] = euclid / scan_time_s;
  v[12] = box;
  v[13] = box / scan_time_s;
  v[14] = guarded_ratio(n, box);
  v[15] = hull / scan_time_s;
  v[16] = guarded_ratio(n, hull);
  return fv;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman_rho: need two equal-length samples of size >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

std::vector<std::size_t> spearman_cluster_select(const Eigen::MatrixXd& x, double threshold) {
  if (x.rows() < 10) throw std::invalid_argument("spearman_cluster_select: need at least 10 rows");
  const auto d = static_cast<std::size_t>(x.cols());
  if (d == 0) return {};

  std::vector<std::vector<double>> ranks(d);
  std::vector<bool> constant(d);
  for (std::size_t j = 0; j < d; ++j) {
    const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(j));
    ranks[j] = average_ranks(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    constant[j] = col.maxCoeff() == col.minCoeff();
  }
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      double dij = 1.0;
      if (!constant[i] && !constant[j]) dij = 1.0 - std::abs(pearson(ranks[i], ranks[j]));
      dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dij;
      dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = dij;
    }
  }

  std::vector<std::vector<std::size_t>> clusters(d);
  for (std::size_t j = 0; j < d; ++j) clusters[j] = {j};
  const auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double s = 0.0;
    for (auto i : a) {
      for (auto j : b) s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return s / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double l = linkage(clusters[i], clusters[j]);
        if (l < best) {
          best = l;
          bi = i;
          bj = j;
        }
      }
    }
    if (best > threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }

  std::vector<std::size_t> kept;
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    std::size_t medoid = c.front();
    double best = std::numeric_limits<double>::infinity();
    for (auto i : c) {
      double s = 0.0;
      for (auto j : c) s += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (s < best) {
        best = s;
        medoid = i;
      }
    }
    kept.push_back(medoid);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace intent
