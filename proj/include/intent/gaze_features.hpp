#pragma once

#include "intent/feature_vector.hpp"
#include "intent/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intent {

inline constexpr std::size_t kGazeFeatureCount = 17;

// Fixation-, saccade- and area-based features in canonical order.
const std::array<std::string_view, kGazeFeatureCount>& gaze_feature_names();

// The eight-feature subset used for exact-replication runs.
std::vector<std::string> published_gaze_selection();

// Denominators smaller than this are clamped; affected ratios are capped at kRatioCap.
inline constexpr double kRatioEpsilon = 1e-9;
inline constexpr double kRatioCap = 1e9;

struct GazeFeatureConfig {
  double clustering_threshold = 0.2;
  // When set, these features are used instead of the data-driven selection.
  std::optional<std::vector<std::string>> pinned_selection;

  void validate() const;
  friend bool operator==(const GazeFeatureConfig&, const GazeFeatureConfig&) = default;
};

// Saccades are centroid-to-centroid transitions between consecutive fixations.
// Throws std::invalid_argument unless scan_time_s > 0.
FeatureVector gaze_features(std::span<const Fixation> fixations, double scan_time_s);

// Area of the convex hull of the points (0 for fewer than three non-collinear points).
double convex_hull_area(std::span<const Point2> points);

// Spearman rank correlation with average ranks for ties. NaN if a column is constant.
double spearman_rho(std::span<const double> a, std::span<const double> b);

// Average-linkage clustering of the columns on 1 - |rho|, cut at threshold; one medoid
// per cluster. Returns retained column indices in ascending order.
std::vector<std::size_t> spearman_cluster_select(const Eigen::MatrixXd& x, double threshold);

// Indices of the named features within gaze_feature_names(). Throws ConfigError
// for unknown names.
std::vector<std::size_t> gaze_feature_indices(std::span<const std::string> names);

}  // namespace intent
