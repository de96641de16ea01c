#include "intent/eeg_features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace intent {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  // Squared magnitudes of bins 0..n/2 of the mean-removed signal.
  void power(std::span<const double> x, std::vector<double>& out) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) in_[i] = x[i] - mean;
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_{};
};

RealFft& fft_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) {
    if (cache.size() > 64) {  // epoch lengths vary; keep the cache bounded
      cache.clear();
      auto& fresh = cache[n];
      fresh = std::make_unique<RealFft>(n);
      return *fresh;
    }
    slot = std::make_unique<RealFft>(n);
  }
  return *slot;
}

double population_variance(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / n;
}

std::vector<double> first_difference(std::span<const double> x) {
  std::vector<double> d;
  if (x.size() < 2) return d;
  d.reserve(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
  return d;
}

// Least-squares slope of y on x.
double slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void band_powers_into(std::span<const double> signal, double fs_hz, std::span<const Band> bands,
                      std::vector<double>& spectrum, double* out) {
  const std::size_t n = signal.size();
  fft_for(n).power(signal, spectrum);
  const double df = fs_hz / static_cast<double>(n);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    double p = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double f = static_cast<double>(k) * df;
      const bool in = f >= bands[b].lo_hz &&
                      (f < bands[b].hi_hz || (bands[b].closed_hi && f == bands[b].hi_hz));
      if (in) p += spectrum[k];
    }
    out[b] = p;
  }
}

}  // namespace

std::vector<Band> default_bands() {
  return {{"delta", 1.0, 4.0, false},
          {"theta", 4.0, 8.0, false},
          {"alpha", 8.0, 13.0, false},
          {"beta", 13.0, 30.0, false},
          {"gamma", 30.0, 40.0, true}};
}

std::vector<double> band_powers(std::span<const double> signal, double fs_hz,
                                std::span<const Band> bands) {
  if (signal.empty()) throw std::invalid_argument("band_powers: empty signal");
  if (!(fs_hz > 0.0)) throw std::invalid_argument("band_powers: fs must be > 0");
  std::vector<double> spectrum;
  std::vector<double> out(bands.size());
  band_powers_into(signal, fs_hz, bands, spectrum, out.data());
  return out;
}

double petrosian_fd(std::span<const double> signal) {
  if (signal.size() < 3) throw std::invalid_argument("petrosian_fd: need at least 3 samples");
  const auto d = first_difference(signal);
  std::size_t changes = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] * d[i - 1] < 0.0) ++changes;
  }
  const auto n = static_cast<double>(signal.size());
  const double l = std::log10(n);
  return l / (l + std::log10(n / (n + 0.4 * static_cast<double>(changes))));
}

HjorthParams hjorth(std::span<const double> signal) {
  if (signal.size() < 3) throw std::invalid_argument("hjorth: need at least 3 samples");
  const double v0 = population_variance(signal);
  if (!(v0 > 0.0)) throw std::invalid_argument("hjorth: zero-variance signal");
  const auto d1 = first_difference(signal);
  const double v1 = population_variance(d1);
  HjorthParams h;
  h.mobility = std::sqrt(v1 / v0);
  if (v1 > 0.0) {
    const auto d2 = first_difference(d1);
    h.complexity = std::sqrt(population_variance(d2) / v1) / h.mobility;
  }
  return h;
}

double higuchi_fd(std::span<const double> signal, int kmax) {
  if (kmax < 2) throw std::invalid_argument("higuchi_fd: kmax must be >= 2");
  const std::size_t n = signal.size();
  if (n < 2 * static_cast<std::size_t>(kmax) + 2) {
    throw std::invalid_argument("higuchi_fd: signal too short for kmax");
  }
  std::vector<double> log_inv_k;
  std::vector<double> log_l;
  for (int k = 1; k <= kmax; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    double total = 0.0;
    int used = 0;
    for (std::size_t m = 0; m < ks; ++m) {
      const std::size_t count = (n - 1 - m) / ks;
      if (count < 1) continue;
      double len = 0.0;
      for (std::size_t i = 1; i <= count; ++i) {
        len += std::abs(signal[m + i * ks] - signal[m + (i - 1) * ks]);
      }
      total += len * static_cast<double>(n - 1) / (static_cast<double>(count) * k) / k;
      ++used;
    }
    const double l = total / used;
    if (!(l > 0.0)) return 0.0;  // constant signal
    log_inv_k.push_back(std::log(1.0 / k));
    log_l.push_back(std::log(l));
  }
  return slope(log_inv_k, log_l);
}

std::vector<int> default_dfa_boxes(std::size_t n) {
  const double lo = 4.0;
  const double hi = std::floor(static_cast<double>(n) / 4.0);
  std::vector<int> boxes;
  if (hi < lo) return boxes;
  for (int i = 0; i < 10; ++i) {
    const double v = std::exp(std::log(lo) + i * (std::log(hi) - std::log(lo)) / 9.0);
    const int b = static_cast<int>(std::lround(v));
    if (boxes.empty() || boxes.back() != b) boxes.push_back(b);
  }
  return boxes;
}

double dfa(std::span<const double> signal, std::span<const int> box_sizes) {
  const std::size_t n = signal.size();
  std::vector<int> usable;
  for (int b : box_sizes) {
    if (b >= 4 && static_cast<std::size_t>(b) * 4 <= n) usable.push_back(b);
  }
  std::sort(usable.begin(), usable.end());
  usable.erase(std::unique(usable.begin(), usable.end()), usable.end());
  if (usable.size() < 2) throw std::invalid_argument("dfa: fewer than two usable box sizes");

  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
  std::vector<double> profile(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += signal[i] - mean;
    profile[i] = acc;
  }

  std::vector<double> log_n;
  std::vector<double> log_f;
  for (int b : usable) {
    const auto bs = static_cast<std::size_t>(b);
    const std::size_t boxes = n / bs;
    const double tm = 0.5 * static_cast<double>(bs - 1);
    double stt = 0.0;
    for (std::size_t t = 0; t < bs; ++t) stt += (t - tm) * (t - tm);
    double rss = 0.0;
    for (std::size_t box = 0; box < boxes; ++box) {
      const double* y = profile.data() + box * bs;
      double ym = 0.0;
      for (std::size_t t = 0; t < bs; ++t) ym += y[t];
      ym /= static_cast<double>(bs);
      double sty = 0.0;
      for (std::size_t t = 0; t < bs; ++t) sty += (t - tm) * (y[t] - ym);
      const double beta = sty / stt;
      for (std::size_t t = 0; t < bs; ++t) {
        const double r = y[t] - ym - beta * (t - tm);
        rss += r * r;
      }
    }
    const double f = std::sqrt(rss / static_cast<double>(boxes * bs));
    if (!(f > 0.0)) return 0.0;  // no fluctuation at all
    log_n.push_back(std::log(static_cast<double>(b)));
    log_f.push_back(std::log(f));
  }
  return slope(log_n, log_f);
}

Moments moments(std::span<const double> signal) {
  if (signal.size() < 2) throw std::invalid_argument("moments: need at least 2 samples");
  const auto n = static_cast<double>(signal.size());
  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : signal) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments m;
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  m.min = *lo;
  m.max = *hi;
  m.std = std::sqrt(m2);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

std::vector<std::string> pyeeg_feature_names(std::span<const std::string> channels) {
  static const char* const kNames[kFeaturesPerChannel] = {
      "delta_power", "theta_power",     "alpha_power",       "beta_power", "gamma_power",
      "pfd",         "hjorth_mobility", "hjorth_complexity", "hfd",        "dfa",
      "skewness",    "kurtosis",        "min",               "max",        "std"};
  std::vector<std::string> names;
  names.reserve(channels.size() * kFeaturesPerChannel);
  for (const auto& ch : channels) {
    for (const char* f : kNames) names.push_back(ch + "." + f);
  }
  return names;
}

FeatureVector pyeeg_vector(const Epoch& epoch, std::span<const std::string> channels,
                           const EegFeatureConfig& config) {
  if (config.bands.size() != 5) throw std::invalid_argument("pyeeg_vector: expects five bands");
  const auto n_ch = static_cast<std::size_t>(epoch.eeg.rows());
  if (channels.size() != n_ch) throw std::invalid_argument("pyeeg_vector: channel name count");
  const auto n = static_cast<std::size_t>(epoch.eeg.cols());
  FeatureVector fv;
  fv.modality = Modality::Eeg;
  fv.epoch_id = epoch.id();
  fv.names = pyeeg_feature_names(channels);
  fv.values.assign(n_ch * kFeaturesPerChannel, 0.0);
  const std::vector<int> boxes =
      config.dfa_boxes.empty() ? default_dfa_boxes(n) : config.dfa_boxes;
  std::vector<double> spectrum;
  for (std::size_t c = 0; c < n_ch; ++c) {
    const std::span<const double> x(epoch.eeg.row(static_cast<Eigen::Index>(c)).data(), n);
    double* out = fv.values.data() + c * kFeaturesPerChannel;
    band_powers_into(x, epoch.fs_hz, config.bands, spectrum, out);
    out[5] = petrosian_fd(x);
    try {
      const auto h = hjorth(x);
      out[6] = h.mobility;
      out[7] = h.complexity;
    } catch (const std::invalid_argument&) {
      fv.warnings.push_back(channels[c] + ": zero variance, Hjorth parameters set to 0");
    }
    out[8] = higuchi_fd(x, config.higuchi_kmax);
    out[9] = dfa(x, boxes);
    const auto m = moments(x);
    out[10] = m.skewness;
    out[11] = m.kurtosis;
    out[12] = m.min;
    out[13] = m.max;
    out[14] = m.std;
  }
  return fv;
}

PcaModel fit_pca(const Eigen::MatrixXd& x, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw std::invalid_argument("fit_pca: variance_target must lie in (0, 1]");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");
  if (d < 1) throw std::invalid_argument("fit_pca: need at least 1 column");

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd xc = x.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns are unit directions in feature space
  if (n >= d) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / denom);
    cov = cov.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    values = es.eigenvalues().reverse();
    vectors = es.eigenvectors().rowwise().reverse();
  } else {
    const Eigen::MatrixXd gram = xc * xc.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    values = es.eigenvalues().reverse();
    const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    vectors = Eigen::MatrixXd::Zero(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (values(i) <= 0.0) continue;
      vectors.col(i) = xc.transpose() * u.col(i) / std::sqrt(values(i) * denom);
    }
  }
  values = values.cwiseMax(0.0);
  const double total = values.sum();

  Eigen::Index k = 1;
  if (total > 0.0) {
    model.all_explained_variance_ratio = values / total;
    double cum = 0.0;
    for (k = 0; k < values.size();) {
      cum += model.all_explained_variance_ratio(k);
      ++k;
      if (cum >= variance_target - 1e-12) break;
    }
  } else {
    model.all_explained_variance_ratio = Eigen::VectorXd::Zero(values.size());
    model.all_explained_variance_ratio(0) = 1.0;
    vectors.col(0) = Eigen::VectorXd::Unit(d, 0);
  }

  model.components = vectors.leftCols(k).transpose();
  // Re-orthonormalize (modified Gram-Schmidt); matters for the Gram-matrix path.
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      model.components.row(i) -= model.components.row(i).dot(model.components.row(j)) *
                                 model.components.row(j);
    }
    model.components.row(i).normalize();
  }
  model.explained_variance_ratio = model.all_explained_variance_ratio.head(k);
  return model;
}

Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.mean.size()) throw std::invalid_argument("apply_pca: dimension mismatch");
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd channel_covariance(const SignalMatrix& eeg) {
  if (eeg.cols() < 2) throw std::invalid_argument("channel_covariance: need at least 2 samples");
  const SignalMatrix xc = eeg.colwise() - eeg.rowwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(eeg.rows(), eeg.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(xc, 1.0 / static_cast<double>(eeg.cols() - 1));
  return cov.selfadjointView<Eigen::Lower>();
}

CspModel fit_csp(std::span<const Eigen::MatrixXd> covariances, std::span<const int> labels,
                 int n_components) {
  if (covariances.size() != labels.size() || covariances.empty()) {
    throw std::invalid_argument("fit_csp: covariances and labels must align");
  }
  const Eigen::Index ch = covariances.front().rows();
  if (n_components < 2 || n_components % 2 != 0 || n_components > ch) {
    throw std::invalid_argument("fit_csp: n_components must be even and <= channel count");
  }
  Eigen::MatrixXd mean[2] = {Eigen::MatrixXd::Zero(ch, ch), Eigen::MatrixXd::Zero(ch, ch)};
  int count[2] = {0, 0};
  for (std::size_t i = 0; i < covariances.size(); ++i) {
    const auto& c = covariances[i];
    if (c.rows() != ch || c.cols() != ch) throw std::invalid_argument("fit_csp: channel mismatch");
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("fit_csp: labels must be 0/1");
    const double tr = c.trace();
    if (tr > 0.0) mean[labels[i]] += c / tr;
    ++count[labels[i]];
  }
  if (count[0] == 0 || count[1] == 0) throw std::invalid_argument("fit_csp: both classes required");
  mean[0] /= count[0];
  mean[1] /= count[1];

  CspModel model;
  model.composite = mean[0] + mean[1];
  const double eps = 1e-9 * model.composite.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(model.composite, Eigen::EigenvaluesOnly);
  if (check.eigenvalues()(0) < eps) {
    model.composite.diagonal().array() += std::max(eps, std::numeric_limits<double>::min());
    model.regularized = true;
  }
  // Positive class first: large eigenvalues mean high variance for label 1.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(mean[1], model.composite,
                                                                Eigen::ComputeEigenvectors |
                                                                    Eigen::Ax_lBx);
  model.all_eigenvalues = ges.eigenvalues();
  const Eigen::MatrixXd& v = ges.eigenvectors();
  const int half = n_components / 2;
  model.filters.resize(n_components, ch);
  model.eigenvalues.resize(n_components);
  for (int i = 0; i < half; ++i) {
    const Eigen::Index top = ch - 1 - i;
    model.filters.row(i) = v.col(top).transpose();
    model.eigenvalues(i) = model.all_eigenvalues(top);
    model.filters.row(half + i) = v.col(i).transpose();
    model.eigenvalues(half + i) = model.all_eigenvalues(i);
  }
  return model;
}

CspModel fit_csp(std::span<const SignalMatrix> epochs, std::span<const int> labels,
                 int n_components) {
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(epochs.size());
  for (const auto& e : epochs) covs.push_back(channel_covariance(e));
  return fit_csp(covs, labels, n_components);
}

std::vector<double> apply_csp(const CspModel& model, const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != model.filters.cols()) {
    throw std::invalid_argument("apply_csp: channel mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(model.filters.rows()));
  for (Eigen::Index i = 0; i < model.filters.rows(); ++i) {
    const Eigen::VectorXd w = model.filters.row(i).transpose();
    const double var = w.dot(covariance * w);
    out[static_cast<std::size_t>(i)] = std::log(std::max(var, std::numeric_limits<double>::min()));
  }
  return out;
}

FeatureVector apply_csp(const CspModel& model, const Epoch& epoch) {
  FeatureVector fv;
  fv.modality = Modality::Eeg;
  fv.epoch_id = epoch.id();
  fv.values = apply_csp(model, channel_covariance(epoch.eeg));
  for (std::size_t i = 0; i < fv.values.size(); ++i) fv.names.push_back("csp" + std::to_string(i));
  return fv;
}

}  // namespace intent
