#pragma once

#include "intent/feature_vector.hpp"
#include "intent/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace intent {

struct Band {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  bool closed_hi = false;  // include bins at exactly hi_hz

  friend bool operator==(const Band&, const Band&) = default;
};

// delta [1,4), theta [4,8), alpha [8,13), beta [13,30), gamma [30,40]
std::vector<Band> default_bands();

// Power spectral intensity: sum of |FFT|^2 over bins in each band, computed on
// the mean-removed signal with a rectangular window.
std::vector<double> band_powers(std::span<const double> signal, double fs_hz,
                                std::span<const Band> bands);

double petrosian_fd(std::span<const double> signal);

struct HjorthParams {
  double mobility = 0.0;
  double complexity = 0.0;
};

// Throws std::invalid_argument for zero-variance signals.
HjorthParams hjorth(std::span<const double> signal);

double higuchi_fd(std::span<const double> signal, int kmax);

// Ten log-spaced integer box sizes in [4, n/4] (duplicates removed).
std::vector<int> default_dfa_boxes(std::size_t n);

// Scaling exponent of linearly detrended fluctuation vs box size. Throws
// std::invalid_argument when fewer than two box sizes are usable.
double dfa(std::span<const double> signal, std::span<const int> box_sizes);

struct Moments {
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess kurtosis
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
};

Moments moments(std::span<const double> signal);

struct EegFeatureConfig {
  std::vector<Band> bands = default_bands();
  int higuchi_kmax = 8;
  std::vector<int> dfa_boxes;  // empty: default_dfa_boxes(epoch length)
  double variance_target = 0.90;
  int csp_components = 4;

  friend bool operator==(const EegFeatureConfig&, const EegFeatureConfig&) = default;
};

inline constexpr int kFeaturesPerChannel = 15;

std::vector<std::string> pyeeg_feature_names(std::span<const std::string> channels);

// Per channel: band powers, PFD, Hjorth mobility and complexity, HFD, DFA,
// skewness, kurtosis, min, max, std.
FeatureVector pyeeg_vector(const Epoch& epoch, std::span<const std::string> channels,
                           const EegFeatureConfig& config);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // [k x d], orthonormal rows
  Eigen::VectorXd explained_variance_ratio;
  Eigen::VectorXd all_explained_variance_ratio;  // every component, descending
};

// Keeps the smallest prefix of components whose cumulative explained variance
// reaches variance_target.
PcaModel fit_pca(const Eigen::MatrixXd& x, double variance_target);
Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& x);

struct CspModel {
  Eigen::MatrixXd filters;       // [components x channels]
  Eigen::VectorXd eigenvalues;   // of the retained filters
  Eigen::VectorXd all_eigenvalues;  // ascending
  Eigen::MatrixXd composite;     // class-mean covariance sum used for normalization
  bool regularized = false;
};

// Channel covariance of an epoch (per-channel mean removed, divided by n - 1).
Eigen::MatrixXd channel_covariance(const SignalMatrix& eeg);

// Fits from per-epoch channel covariances; each is trace-normalized before
// averaging within its class. Labels are 0/1 and both must be present.
CspModel fit_csp(std::span<const Eigen::MatrixXd> covariances, std::span<const int> labels,
                 int n_components = 4);
CspModel fit_csp(std::span<const SignalMatrix> epochs, std::span<const int> labels,
                 int n_components = 4);

// log variance of each spatially filtered signal.
std::vector<double> apply_csp(const CspModel& model, const Eigen::MatrixXd& covariance);
FeatureVector apply_csp(const CspModel& model, const Epoch& epoch);

}  // namespace intent
