#include "intent/eeg_features.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <random>

using namespace intent;

namespace {

std::vector<double> totals_share(const std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  std::vector<double> s;
  for (double v : p) s.push_back(v / total);
  return s;
}

std::vector<double> random_signal(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> len(200, 700);
  std::uniform_real_distribution<double> amp(0.2, 5.0);
  std::uniform_real_distribution<double> freq(1.0, 40.0);
  const auto n = static_cast<std::size_t>(len(gen));
  auto x = oracle::white_noise(n, gen(), amp(gen));
  const auto s = oracle::sine(n, freq(gen), 128.0, amp(gen), 0.3);
  for (std::size_t i = 0; i < n; ++i) x[i] += s[i] + 2.0;
  return x;
}

Epoch make_epoch(int channels, int n, std::uint64_t seed) {
  Epoch e;
  e.user_id = "u01";
  e.fs_hz = 128.0;
  e.eeg.resize(channels, n);
  for (int c = 0; c < channels; ++c) {
    const auto x = oracle::white_noise(static_cast<std::size_t>(n), seed + static_cast<std::uint64_t>(c));
    for (int i = 0; i < n; ++i) e.eeg(c, i) = x[static_cast<std::size_t>(i)];
  }
  return e;
}

std::vector<std::string> channel_names(int n) {
  std::vector<std::string> names;
  for (int c = 0; c < n; ++c) names.push_back("ch" + std::to_string(c));
  return names;
}

}  // namespace

TEST_CASE("band powers match a brute-force DFT on random signals") {
  std::mt19937_64 gen(11);
  const auto bands = default_bands();
  for (int trial = 0; trial < 24; ++trial) {
    const auto x = random_signal(gen);
    const auto p = band_powers(x, 128.0, bands);
    REQUIRE(p.size() == bands.size());
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const double ref = oracle::band_power(x, 128.0, bands[b].lo_hz, bands[b].hi_hz, bands[b].closed_hi);
      CHECK(oracle::rel_close(p[b], ref, 1e-6, 1e-9));
    }
  }
}

TEST_CASE("band power examples") {
  const auto bands = default_bands();
  SUBCASE("10 Hz sine sits in alpha") {
    const auto share = totals_share(band_powers(oracle::sine(2500, 10.0, 500.0), 500.0, bands));
    CHECK(share[2] > 0.99);
  }
  SUBCASE("zero signal") {
    const std::vector<double> z(500, 0.0);
    for (double v : band_powers(z, 500.0, bands)) CHECK(v == 0.0);
  }
  SUBCASE("2 Hz plus 35 Hz") {
    auto x = oracle::sine(2500, 2.0, 500.0);
    const auto g = oracle::sine(2500, 35.0, 500.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += g[i];
    const auto share = totals_share(band_powers(x, 500.0, bands));
    CHECK(std::abs(share[0] - share[4]) <= 0.05 * std::max(share[0], share[4]));
    CHECK(share[1] < 0.02);
    CHECK(share[2] < 0.02);
    CHECK(share[3] < 0.02);
  }
  SUBCASE("band without bins is zero") {
    const std::vector<Band> narrow = {{"tiny", 10.01, 10.02, false}};
    CHECK(band_powers(oracle::sine(500, 10.0, 500.0), 500.0, narrow)[0] == 0.0);
  }
}

TEST_CASE("petrosian FD") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 24; ++trial) {
    const auto x = random_signal(gen);
    CHECK(oracle::rel_close(petrosian_fd(x), oracle::pfd(x), 1e-6));
  }
  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  CHECK(petrosian_fd(ramp) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> alt(100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  CHECK(petrosian_fd(alt) == doctest::Approx(2.0 / (2.0 + std::log10(100.0 / 139.2))).epsilon(1e-9));
  CHECK(petrosian_fd(alt) == doctest::Approx(1.0774).epsilon(1e-4));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double v = petrosian_fd(oracle::white_noise(4096, 100 + s));
    CHECK(v > 1.0);
    CHECK(v < 1.1);
  }
}

TEST_CASE("hjorth parameters") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 24; ++trial) {
    const auto x = random_signal(gen);
    const auto h = hjorth(x);
    const auto [mob, comp] = oracle::hjorth(x);
    CHECK(oracle::rel_close(h.mobility, mob, 1e-6));
    CHECK(oracle::rel_close(h.complexity, comp, 1e-6));
  }
  const auto s = hjorth(oracle::sine(2500, 10.0, 500.0));
  CHECK(std::abs(s.mobility - 2.0 * std::sin(std::numbers::pi * 10.0 / 500.0)) < 1e-3);
  for (double f : {3.0, 10.0, 22.0, 37.0}) {
    CHECK(std::abs(hjorth(oracle::sine(2500, f, 500.0)).complexity - 1.0) < 1e-2);
  }
  const std::vector<double> flat(100, 3.0);
  CHECK_THROWS_AS(hjorth(flat), std::invalid_argument);
}

TEST_CASE("higuchi FD limits") {
  std::vector<double> ramp(1000);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  CHECK(std::abs(higuchi_fd(ramp, 8) - 1.0) < 0.05);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) sum += higuchi_fd(oracle::white_noise(4096, 200 + s), 8);
  CHECK(std::abs(sum / 20.0 - 2.0) < 0.15);
  const double sine_fd = higuchi_fd(oracle::sine(1000, 10.0, 500.0), 8);
  CHECK(sine_fd > 1.0);
  CHECK(sine_fd < 1.3);
}

TEST_CASE("DFA exponents") {
  const auto boxes = default_dfa_boxes(4096);
  CHECK(boxes.size() == 10);
  CHECK(boxes.front() == 4);
  CHECK(boxes.back() == 1024);
  CHECK(std::is_sorted(boxes.begin(), boxes.end()));
  double white = 0.0;
  double walk = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    white += dfa(oracle::white_noise(4096, 300 + s), boxes);
    walk += dfa(oracle::random_walk(4096, 400 + s), boxes);
  }
  CHECK(std::abs(white / 20.0 - 0.5) < 0.1);
  CHECK(std::abs(walk / 20.0 - 1.5) < 0.15);
  CHECK(std::isfinite(dfa(oracle::sine(4096, 10.0, 500.0), boxes)));
  const std::vector<int> one_box = {8};
  CHECK_THROWS_AS(dfa(oracle::white_noise(256, 1), one_box), std::invalid_argument);
}

TEST_CASE("moments") {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 24; ++trial) {
    const auto x = random_signal(gen);
    const auto m = moments(x);
    const auto r = oracle::moments(x);
    CHECK(oracle::rel_close(m.skewness, r.skew, 1e-6, 1e-9));
    CHECK(oracle::rel_close(m.kurtosis, r.kurt, 1e-6, 1e-9));
    CHECK(m.min == r.min);
    CHECK(m.max == r.max);
    CHECK(oracle::rel_close(m.std, r.sd, 1e-6));
  }
  const auto normal = moments(oracle::white_noise(100000, 15));
  CHECK(std::abs(normal.skewness) < 0.05);
  CHECK(std::abs(normal.kurtosis) < 0.1);
  std::vector<double> alt(100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  const auto a = moments(alt);
  CHECK(a.skewness == doctest::Approx(0.0));
  CHECK(a.min == -1.0);
  CHECK(a.max == 1.0);
  CHECK(a.std == doctest::Approx(1.0));
  std::mt19937_64 eg(16);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> ex(100000);
  for (auto& v : ex) v = expo(eg);
  CHECK(std::abs(moments(ex).skewness - 2.0) < 0.2);
  const auto flat = moments(std::vector<double>(10, 2.0));
  CHECK(flat.skewness == 0.0);
  CHECK(flat.kurtosis == 0.0);
}

TEST_CASE("scaling and translation properties") {
  const auto x = oracle::white_noise(512, 17);
  const auto bands = default_bands();
  const auto boxes = default_dfa_boxes(x.size());
  const double c = 3.7;
  std::vector<double> scaled(x.size());
  std::vector<double> shifted(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    scaled[i] = c * x[i];
    shifted[i] = x[i] + 12.5;
  }
  const auto p0 = band_powers(x, 128.0, bands);
  const auto p1 = band_powers(scaled, 128.0, bands);
  const auto p2 = band_powers(shifted, 128.0, bands);
  for (std::size_t b = 0; b < p0.size(); ++b) {
    CHECK(oracle::rel_close(p1[b], c * c * p0[b], 1e-6));
    CHECK(oracle::rel_close(p2[b], p0[b], 1e-6));
  }
  for (const auto* y : {&scaled, &shifted}) {
    CHECK(oracle::rel_close(petrosian_fd(*y), petrosian_fd(x), 1e-6));
    CHECK(oracle::rel_close(higuchi_fd(*y, 8), higuchi_fd(x, 8), 1e-6));
    CHECK(oracle::rel_close(dfa(*y, boxes), dfa(x, boxes), 1e-6));
    CHECK(oracle::rel_close(hjorth(*y).mobility, hjorth(x).mobility, 1e-6));
    CHECK(oracle::rel_close(hjorth(*y).complexity, hjorth(x).complexity, 1e-6));
    CHECK(oracle::rel_close(moments(*y).skewness, moments(x).skewness, 1e-6));
    CHECK(oracle::rel_close(moments(*y).kurtosis, moments(x).kurtosis, 1e-6));
  }
  const auto m0 = moments(x);
  const auto ms = moments(scaled);
  const auto mt = moments(shifted);
  CHECK(oracle::rel_close(ms.std, c * m0.std, 1e-6));
  CHECK(oracle::rel_close(ms.min, c * m0.min, 1e-6));
  CHECK(oracle::rel_close(ms.max, c * m0.max, 1e-6));
  CHECK(oracle::rel_close(mt.std, m0.std, 1e-6));
  CHECK(oracle::rel_close(mt.min, m0.min + 12.5, 1e-6));
  CHECK(oracle::rel_close(mt.max, m0.max + 12.5, 1e-6));
}

TEST_CASE("pyeeg vector structure") {
  const auto names = channel_names(64);
  const EegFeatureConfig cfg;
  const auto e = make_epoch(64, 256, 18);
  const auto fv = pyeeg_vector(e, names, cfg);
  CHECK(fv.size() == 960);
  CHECK(fv.names.size() == 960);
  CHECK(fv.modality == Modality::Eeg);
  CHECK(fv.names[2] == "ch0.alpha_power");
  CHECK(fv.names[959] == "ch63.std");
  for (double v : fv.values) CHECK(std::isfinite(v));

  const std::vector<std::string> cz = {"Cz"};
  const auto one = pyeeg_vector(make_epoch(1, 256, 3), cz, cfg);
  CHECK(one.size() == 15);
  CHECK(one.names[2] == "Cz.alpha_power");

  const auto again = pyeeg_vector(e, names, cfg);
  CHECK(again.values == fv.values);
  CHECK(again.names == fv.names);

  Epoch zero = make_epoch(4, 256, 0);
  zero.eeg.setZero();
  const auto z = pyeeg_vector(zero, channel_names(4), cfg);
  for (double v : z.values) CHECK(std::isfinite(v));
  CHECK_FALSE(z.warnings.empty());
  CHECK(z.values[6] == 0.0);
  CHECK(z.values[7] == 0.0);

  CHECK_THROWS_AS(pyeeg_vector(e, channel_names(3), cfg), std::invalid_argument);
}

TEST_CASE("PCA invariants") {
  SUBCASE("rank one") {
    Eigen::MatrixXd x(50, 2);
    for (int i = 0; i < 50; ++i) {
      x(i, 0) = i * 0.3 - 2.0;
      x(i, 1) = 2.0 * x(i, 0) + 1.0;
    }
    const auto m = fit_pca(x, 0.9);
    CHECK(m.components.rows() == 1);
    CHECK(m.explained_variance_ratio(0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("isotropic gaussian keeps every axis") {
    std::mt19937_64 gen(19);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd x(20000, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(gen);
    const auto m = fit_pca(x, 0.9);
    CHECK(m.components.rows() == 3);
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(std::abs(m.explained_variance_ratio(k) - 1.0 / 3.0) < 0.02);
  }
  SUBCASE("orthonormal, decorrelated, minimal") {
    std::mt19937_64 gen(20);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd mix(8, 8);
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = n01(gen);
    Eigen::MatrixXd z(300, 8);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n01(gen);
    for (int c = 0; c < 8; ++c) z.col(c) *= std::pow(0.6, c);
    const Eigen::MatrixXd x = z * mix;
    const auto m = fit_pca(x, 0.9);
    const Eigen::Index k = m.components.rows();
    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(m.explained_variance_ratio.sum() >= 0.9 - 1e-12);
    if (k > 1) CHECK(m.explained_variance_ratio.head(k - 1).sum() < 0.9);
    CHECK(m.all_explained_variance_ratio.sum() == doctest::Approx(1.0).epsilon(1e-10));

    const Eigen::MatrixXd p = apply_pca(m, x);
    CHECK(p.cols() == k);
    const Eigen::MatrixXd centered = p.rowwise() - p.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(p.rows() - 1);
    const double off = (cov - Eigen::MatrixXd(cov.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
    CHECK(off < 1e-8 * cov.trace());
  }
  SUBCASE("rank-k data reconstructs exactly") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(200, 3);
    Eigen::MatrixXd b(3, 10);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n01(gen);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n01(gen);
    const Eigen::MatrixXd x = a * b;
    const auto m = fit_pca(x, 1.0);
    CHECK(m.components.rows() == 3);
    const Eigen::MatrixXd recon =
        (apply_pca(m, x) * m.components).rowwise() + m.mean.transpose();
    CHECK((recon - x).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("bad inputs") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
    CHECK_THROWS_AS(fit_pca(x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_pca(x, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd::Random(1, 3), 0.9), std::invalid_argument);
  }
}

namespace {

// Class 0: noise concentrated on channel 0; class 1: on channel 1.
std::pair<std::vector<SignalMatrix>, std::vector<int>> csp_fixture(std::uint64_t seed, bool identical) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n01;
  std::vector<SignalMatrix> epochs;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int cls = i % 2;
    SignalMatrix e(8, 256);
    for (int c = 0; c < 8; ++c) {
      double gain = 0.1;
      if (!identical && c == cls) gain = 3.0;
      for (int t = 0; t < 256; ++t) e(c, t) = gain * n01(gen);
    }
    epochs.push_back(std::move(e));
    labels.push_back(cls);
  }
  return {epochs, labels};
}

}  // namespace

TEST_CASE("CSP invariants") {
  auto [epochs, labels] = csp_fixture(22, false);
  const auto m = fit_csp(std::span<const SignalMatrix>(epochs), labels, 4);
  REQUIRE(m.filters.rows() == 4);
  REQUIRE(m.filters.cols() == 8);

  for (Eigen::Index r = 0; r < 4; ++r) {
    const Eigen::VectorXd w = m.filters.row(r).transpose();
    CHECK(std::abs(w.dot(m.composite * w) - 1.0) < 1e-6);
  }
  for (Eigen::Index i = 0; i < m.all_eigenvalues.size(); ++i) {
    CHECK(m.all_eigenvalues(i) >= -1e-12);
    CHECK(m.all_eigenvalues(i) <= 1.0 + 1e-12);
  }

  // Largest-eigenvalue filter favours the label-1 channel.
  Eigen::Index top = 0;
  m.eigenvalues.maxCoeff(&top);
  const Eigen::VectorXd w = m.filters.row(top).transpose().cwiseAbs2();
  CHECK(w(1) / w.sum() >= 0.95);

  // Log-variance of the top filter separates the classes.
  double min0 = 1e300;
  double max1 = -1e300;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto f = apply_csp(m, channel_covariance(epochs[i]));
    REQUIRE(f.size() == 4);
    if (labels[i] == 1) min0 = std::min(min0, f[static_cast<std::size_t>(top)]);
    else max1 = std::max(max1, f[static_cast<std::size_t>(top)]);
  }
  CHECK(min0 > max1);

  // Swapping labels maps every eigenvalue to 1 - lambda.
  std::vector<int> swapped;
  for (int l : labels) swapped.push_back(1 - l);
  const auto ms = fit_csp(std::span<const SignalMatrix>(epochs), swapped, 4);
  const Eigen::Index n = m.all_eigenvalues.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(std::abs(ms.all_eigenvalues(i) - (1.0 - m.all_eigenvalues(n - 1 - i))) < 1e-9);
  }

  Epoch ep;
  ep.eeg = epochs[0];
  const auto fv = apply_csp(m, ep);
  CHECK(fv.size() == 4);
  CHECK(fv.names.size() == 4);
}

TEST_CASE("CSP on identical classes") {
  auto [epochs, labels] = csp_fixture(23, true);
  const auto m = fit_csp(std::span<const SignalMatrix>(epochs), labels, 4);
  for (Eigen::Index i = 0; i < m.all_eigenvalues.size(); ++i) {
    CHECK(std::abs(m.all_eigenvalues(i) - 0.5) < 0.05);
  }
}

TEST_CASE("CSP input checks") {
  auto [epochs, labels] = csp_fixture(24, false);
  std::vector<int> one_class(labels.size(), 0);
  CHECK_THROWS_AS(fit_csp(std::span<const SignalMatrix>(epochs), one_class, 4), std::invalid_argument);
  CHECK_THROWS_AS(fit_csp(std::span<const SignalMatrix>(epochs), labels, 3), std::invalid_argument);
  CHECK_THROWS_AS(fit_csp(std::span<const SignalMatrix>(epochs), labels, 10), std::invalid_argument);
}
