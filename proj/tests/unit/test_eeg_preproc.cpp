#include "intent/eeg_preproc.hpp"
#include "intent/montage.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace intent;

namespace {

// Amplitude of the f-Hz component by direct single-bin DFT over [from, to).
double tone_amplitude(std::span<const double> x, double f, double fs, std::size_t from, std::size_t to) {
  long double re = 0, im = 0;
  for (std::size_t i = from; i < to; ++i) {
    const long double a = 2.0L * std::numbers::pi_v<long double> * f * static_cast<long double>(i) / fs;
    re += x[i] * std::cos(a);
    im += x[i] * std::sin(a);
  }
  return static_cast<double>(2.0L * std::sqrt(re * re + im * im) / static_cast<long double>(to - from));
}

EegRecording recording(const std::vector<std::vector<double>>& channels, double fs) {
  EegRecording r;
  r.fs_hz = fs;
  r.samples.resize(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(channels[0].size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    r.channel_names.push_back("C" + std::to_string(c));
    for (std::size_t i = 0; i < channels[c].size(); ++i) {
      r.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = channels[c][i];
    }
  }
  return r;
}

std::vector<double> row(const EegRecording& r, Eigen::Index c) {
  return {r.samples.row(c).data(), r.samples.row(c).data() + r.samples.cols()};
}

const FilterSpec kSpec{};
constexpr double kFs = 500.0;

}  // namespace

TEST_CASE("filter settings validation") {
  CHECK_NOTHROW(kSpec.validate(kFs));
  FilterSpec bad = kSpec;
  bad.lowpass_hz = 300.0;
  CHECK_THROWS(bad.validate(kFs));
  FilterSpec odd = kSpec;
  odd.order = 3;
  CHECK_THROWS(odd.validate(kFs));
  // notch above the Nyquist frequency
  CHECK_THROWS(kSpec.validate(100.0));
}

TEST_CASE("passband, notch and DC behaviour") {
  const std::size_t n = 5000;
  const auto s10 = oracle::sine(n, 10.0, kFs, 1.0);
  const auto s50 = oracle::sine(n, 50.0, kFs, 1.0);
  const auto chain = design_filter_chain(kSpec, kFs);
  const auto y10 = sosfiltfilt(chain, s10);
  const auto y50 = sosfiltfilt(chain, s50);
  const std::size_t a = 500;
  const std::size_t b = n - 500;
  CHECK(tone_amplitude(y10, 10.0, kFs, a, b) / tone_amplitude(s10, 10.0, kFs, a, b) > 0.95);
  CHECK(tone_amplitude(y50, 50.0, kFs, a, b) / tone_amplitude(s50, 50.0, kFs, a, b) < 0.05);
  const std::vector<double> dc(n, 100.0);
  const auto ydc = sosfiltfilt(chain, dc);
  double peak = 0.0;
  for (std::size_t i = a; i < b; ++i) peak = std::max(peak, std::abs(ydc[i]));
  CHECK(peak < 1.0);
  CHECK(magnitude_response(chain, 10.0, kFs) > 0.95);
  CHECK(magnitude_response(chain, 50.0, kFs) < 0.05);
}

TEST_CASE("forward-backward filtering has zero lag") {
  const std::size_t n = 4000;
  const auto x = oracle::sine(n, 7.0, kFs, 1.0, 0.3);
  const auto y = sosfiltfilt(design_filter_chain(kSpec, kFs), x);
  int best_lag = 99;
  double best = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (std::size_t i = 500; i < n - 500; ++i) c += x[i] * y[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("filtering is linear") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = oracle::white_noise(3000, seed);
    const auto y = oracle::white_noise(3000, seed + 100);
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = 2.5 * x[i] - 0.7 * y[i];
    const auto r = filter_eeg(recording({x, y, mix}, kFs), kSpec);
    double max_err = 0.0;
    double max_ref = 0.0;
    for (Eigen::Index i = 0; i < r.samples.cols(); ++i) {
      const double expect = 2.5 * r.samples(0, i) - 0.7 * r.samples(1, i);
      max_err = std::max(max_err, std::abs(r.samples(2, i) - expect));
      max_ref = std::max(max_ref, std::abs(expect));
    }
    CHECK(max_err <= 1e-6 * max_ref);
  }
}

TEST_CASE("filter rejects short or non-finite recordings") {
  CHECK_THROWS(filter_eeg(recording({std::vector<double>(20, 1.0)}, kFs), kSpec));
  auto bad = oracle::white_noise(3000, 3);
  bad[100] = std::nan("");
  CHECK_THROWS(filter_eeg(recording({bad}, kFs), kSpec));
}

TEST_CASE("bad channel detection") {
  // i.i.d. channels: the expected number of false flags stays at or below one
  int worst = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<std::vector<double>> ch;
    for (int c = 0; c < 64; ++c) ch.push_back(oracle::white_noise(1000, seed * 100 + static_cast<std::uint64_t>(c)));
    const int flagged = static_cast<int>(detect_bad_channels(recording(ch, kFs), 3.0).size());
    worst = std::max(worst, flagged);
    total += flagged;
  }
  CHECK(total / 20.0 <= 1.0);
  CHECK(worst <= 2);
  std::vector<std::vector<double>> ch;
  for (int c = 0; c < 16; ++c) ch.push_back(oracle::white_noise(1000, 7 + static_cast<std::uint64_t>(c)));
  for (auto& v : ch[4]) v *= 50.0;
  ch[9].assign(1000, 0.0);
  const auto bad = detect_bad_channels(recording(ch, kFs), 3.0);
  CHECK(std::find(bad.begin(), bad.end(), 4u) != bad.end());
  CHECK(std::find(bad.begin(), bad.end(), 9u) != bad.end());
  CHECK(bad.size() == 2);
}

TEST_CASE("inverse-distance interpolation") {
  const auto s = oracle::white_noise(200, 11);
  std::vector<std::vector<double>> ch(6, s);
  ch[0].assign(200, 123.0);
  const std::vector<Vec3> pos = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0.6, 0, 0.8}};
  const std::vector<std::size_t> bad = {0};
  const auto r = interpolate_channels(recording(ch, kFs), bad, pos);
  double err = 0.0;
  for (std::size_t i = 0; i < 200; ++i) err = std::max(err, std::abs(r.samples(0, static_cast<Eigen::Index>(i)) - s[i]));
  CHECK(err < 1e-9);
  for (Eigen::Index c = 1; c < 6; ++c) CHECK(row(r, c) == ch[static_cast<std::size_t>(c)]);

  const auto in = recording(ch, kFs);
  CHECK(interpolate_channels(in, {}, pos).samples == in.samples);

  // bad channel at the pole, equidistant good channels carrying +v/-v pairs
  std::vector<std::vector<double>> sym = {std::vector<double>(50, 9.0), std::vector<double>(50, 2.0),
                                          std::vector<double>(50, 5.0), std::vector<double>(50, -2.0),
                                          std::vector<double>(50, -5.0)};
  const std::vector<Vec3> sym_pos = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
  const auto rs = interpolate_channels(recording(sym, kFs), bad, sym_pos);
  CHECK(std::abs(rs.samples(0, 10)) < 1e-12);

  const std::vector<std::size_t> all = {0, 1, 2, 3, 4};
  CHECK_THROWS(interpolate_channels(recording(sym, kFs), all, sym_pos));
}

TEST_CASE("common average reference") {
  std::vector<std::vector<double>> ch;
  for (int c = 0; c < 8; ++c) ch.push_back(oracle::white_noise(300, 40 + static_cast<std::uint64_t>(c)));
  const auto once = common_average_reference(recording(ch, kFs));
  for (Eigen::Index i = 0; i < once.samples.cols(); ++i) CHECK(std::abs(once.samples.col(i).sum()) < 1e-9);
  const auto twice = common_average_reference(once);
  CHECK((twice.samples - once.samples).cwiseAbs().maxCoeff() <= 1e-12);
  const auto single = common_average_reference(recording({oracle::white_noise(10, 1)}, kFs));
  CHECK(single.samples.cwiseAbs().maxCoeff() == 0.0);
  const auto two = common_average_reference(recording({{3.0}, {1.0}}, kFs));
  CHECK(two.samples(0, 0) == 1.0);
  CHECK(two.samples(1, 0) == -1.0);
}

TEST_CASE("built-in montage covers the 64 standard channels") {
  const auto& names = standard_64_channels();
  CHECK(names.size() == 64);
  const auto pos = montage_positions(names);
  for (const auto& p : pos) CHECK(std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) == doctest::Approx(1.0));
  const std::vector<std::string> unknown = {"Cz", "XYZ"};
  CHECK_THROWS_AS(montage_positions(unknown), DataError);
}

TEST_CASE("full cleaning chain") {
  std::vector<std::vector<double>> ch;
  const auto& names = standard_64_channels();
  for (std::size_t c = 0; c < 16; ++c) {
    auto x = oracle::white_noise(2000, 500 + c);
    const auto a = oracle::sine(2000, 10.0, kFs, 3.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += a[i];
    ch.push_back(x);
  }
  ch[3].assign(2000, 0.0);
  auto rec = recording(ch, kFs);
  rec.channel_names.assign(names.begin(), names.begin() + 16);
  const auto pos = montage_positions(rec.channel_names);
  const auto out = preprocess_eeg(rec, pos, EegPreprocConfig{});
  CHECK(out.bad_channels == std::vector<std::size_t>{3});
  CHECK(out.eeg.samples.allFinite());
  for (Eigen::Index i = 0; i < out.eeg.samples.cols(); ++i) CHECK(std::abs(out.eeg.samples.col(i).sum()) < 1e-9);
}
