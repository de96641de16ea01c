#include "intent/eeg_preproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace intent {

namespace {

using cd = std::complex<double>;

void check_order(int order) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("Butterworth order must be even and >= 2");
  }
}

void check_frequency(double f, double fs) {
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be > 0");
  if (!(f > 0.0) || !(f < fs / 2.0)) {
    throw std::invalid_argument("cutoff frequency must lie in (0, fs/2)");
  }
}

std::vector<cd> butter_prototype(int n) {
  std::vector<cd> poles;
  for (int k = 1; k <= n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

cd bilinear(cd s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

std::vector<cd> upper_half(const std::vector<cd>& roots) {
  std::vector<cd> out;
  for (const cd& r : roots) {
    if (r.imag() > 0.0) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](cd a, cd b) { return std::arg(a) < std::arg(b); });
  return out;
}

cd biquad_response(const Biquad& q, cd z) {
  const cd zi = 1.0 / z;
  return (q.b0 + q.b1 * zi + q.b2 * zi * zi) / (1.0 + q.a1 * zi + q.a2 * zi * zi);
}

// Poles come in conjugate pairs; zero_pair gives (b1, b2) per section with b0 = 1.
Sos assemble(const std::vector<cd>& digital_poles, const std::vector<std::pair<double, double>>& zero_pairs,
             cd reference) {
  const auto upper = upper_half(digital_poles);
  if (upper.size() != zero_pairs.size()) throw std::logic_error("pole/zero pairing mismatch");
  Sos sos;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    Biquad q;
    q.b0 = 1.0;
    q.b1 = zero_pairs[i].first;
    q.b2 = zero_pairs[i].second;
    q.a1 = -2.0 * upper[i].real();
    q.a2 = std::norm(upper[i]);
    sos.push_back(q);
  }
  cd h = 1.0;
  for (const auto& q : sos) h *= biquad_response(q, reference);
  const double g = 1.0 / std::abs(h);
  sos.front().b0 *= g;
  sos.front().b1 *= g;
  sos.front().b2 *= g;
  return sos;
}

// Steady-state section states for a unit step, scaled by the DC gain of the
// preceding sections.
std::vector<std::array<double, 2>> sos_zi(const Sos& sos) {
  std::vector<std::array<double, 2>> zi;
  double scale = 1.0;
  for (const auto& q : sos) {
    const double g = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double z2 = q.b2 - q.a2 * g;
    const double z1 = g - q.b0;
    zi.push_back({scale * z1, scale * z2});
    scale *= g;
  }
  return zi;
}

void sosfilt_inplace(const Sos& sos, const std::vector<std::array<double, 2>>& zi, double x0,
                     std::vector<double>& x) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    double z1 = zi[s][0] * x0;
    double z2 = zi[s][1] * x0;
    for (double& v : x) {
      const double in = v;
      const double y = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * y + z2;
      z2 = q.b2 * in - q.a2 * y;
      v = y;
    }
    x0 *= (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_finite(const EegRecording& rec) {
  if (!rec.samples.allFinite()) throw std::invalid_argument("EEG contains non-finite values");
}

}  // namespace

void FilterSpec::validate(double fs_hz) const {
  check_order(order);
  const double nyquist = fs_hz / 2.0;
  if (!(highpass_hz > 0.0 && highpass_hz < lowpass_hz && lowpass_hz < nyquist)) {
    throw std::invalid_argument("filter: require 0 < highpass < lowpass < fs/2");
  }
  const double lo = notch_center_hz - notch_halfwidth_hz;
  const double hi = notch_center_hz + notch_halfwidth_hz;
  if (!(notch_halfwidth_hz > 0.0) || !(lo > highpass_hz) || !(hi < nyquist)) {
    throw std::invalid_argument("filter: notch band must lie in (highpass, fs/2)");
  }
}

Sos butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  check_order(order);
  check_frequency(cutoff_hz, fs_hz);
  const double w = prewarp(cutoff_hz, fs_hz);
  std::vector<cd> poles;
  for (const cd& p : butter_prototype(order)) poles.push_back(bilinear(w * p, fs_hz));
  std::vector<std::pair<double, double>> zeros(order / 2, {2.0, 1.0});  // double zero at z = -1
  return assemble(poles, zeros, cd(1.0, 0.0));
}

Sos butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  check_order(order);
  check_frequency(cutoff_hz, fs_hz);
  const double w = prewarp(cutoff_hz, fs_hz);
  std::vector<cd> poles;
  for (const cd& p : butter_prototype(order)) poles.push_back(bilinear(w / p, fs_hz));
  std::vector<std::pair<double, double>> zeros(order / 2, {-2.0, 1.0});  // double zero at z = 1
  return assemble(poles, zeros, cd(-1.0, 0.0));
}

Sos butterworth_bandstop(int order, double lo_hz, double hi_hz, double fs_hz) {
  check_order(order);
  check_frequency(lo_hz, fs_hz);
  check_frequency(hi_hz, fs_hz);
  if (!(lo_hz < hi_hz)) throw std::invalid_argument("band-stop: lo must be < hi");
  const double w1 = prewarp(lo_hz, fs_hz);
  const double w2 = prewarp(hi_hz, fs_hz);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;
  std::vector<cd> poles;
  for (const cd& p : butter_prototype(order)) {
    const cd half = bw / (2.0 * p);
    const cd disc = std::sqrt(half * half - w0sq);
    poles.push_back(bilinear(half + disc, fs_hz));
    poles.push_back(bilinear(half - disc, fs_hz));
  }
  const cd z0 = bilinear(cd(0.0, std::sqrt(w0sq)), fs_hz);
  std::vector<std::pair<double, double>> zeros(order, {-2.0 * z0.real(), std::norm(z0)});
  return assemble(poles, zeros, cd(1.0, 0.0));
}

Sos design_filter_chain(const FilterSpec& spec, double fs_hz) {
  spec.validate(fs_hz);
  Sos chain = butterworth_highpass(spec.order, spec.highpass_hz, fs_hz);
  const Sos notch =
      butterworth_bandstop(spec.order, spec.notch_center_hz - spec.notch_halfwidth_hz,
                           spec.notch_center_hz + spec.notch_halfwidth_hz, fs_hz);
  const Sos low = butterworth_lowpass(spec.order, spec.lowpass_hz, fs_hz);
  chain.insert(chain.end(), notch.begin(), notch.end());
  chain.insert(chain.end(), low.begin(), low.end());
  return chain;
}

double magnitude_response(const Sos& sos, double f_hz, double fs_hz) {
  const cd z = std::polar(1.0, 2.0 * std::numbers::pi * f_hz / fs_hz);
  cd h = 1.0;
  for (const auto& q : sos) h *= biquad_response(q, z);
  return std::abs(h);
}

std::size_t filtfilt_padlen(const Sos& sos) { return 3 * (2 * sos.size() + 1); }

std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t pad = filtfilt_padlen(sos);
  if (n <= pad) {
    throw std::invalid_argument("sosfiltfilt: input length " + std::to_string(n) +
                                " must exceed padding length " + std::to_string(pad));
  }
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<long>(pad));

  const auto zi = sos_zi(sos);
  sosfilt_inplace(sos, zi, ext.front(), ext);
  std::reverse(ext.begin(), ext.end());
  sosfilt_inplace(sos, zi, ext.front(), ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<long>(pad), ext.begin() + static_cast<long>(pad + n)};
}

EegRecording filter_eeg(const EegRecording& rec, const FilterSpec& spec) {
  check_finite(rec);
  const Sos sos = design_filter_chain(spec, rec.fs_hz);
  const std::size_t n = rec.n_samples();
  if (n <= filtfilt_padlen(sos) || n <= 3 * static_cast<std::size_t>(spec.order)) {
    throw std::invalid_argument("filter_eeg: recording too short for the filter chain");
  }
  EegRecording out = rec;
  for (Eigen::Index c = 0; c < rec.samples.rows(); ++c) {
    const double* row = rec.samples.row(c).data();
    const auto y = sosfiltfilt(sos, std::span<const double>(row, n));
    std::copy(y.begin(), y.end(), out.samples.row(c).data());
  }
  return out;
}

std::vector<std::size_t> detect_bad_channels(const EegRecording& rec, double z_threshold) {
  const std::size_t n_ch = rec.n_channels();
  if (n_ch < 8) throw std::invalid_argument("detect_bad_channels: need at least 8 channels");
  std::vector<double> sd(n_ch);
  for (std::size_t c = 0; c < n_ch; ++c) {
    const auto row = rec.samples.row(static_cast<Eigen::Index>(c));
    const double mean = row.mean();
    sd[c] = std::sqrt((row.array() - mean).square().mean());
  }
  const double typical = std::max(1.0, median(sd));
  std::vector<bool> flat(n_ch);
  std::vector<double> logs;
  for (std::size_t c = 0; c < n_ch; ++c) {
    flat[c] = !(sd[c] > 1e-12 * typical);
    if (!flat[c]) logs.push_back(std::log(sd[c]));
  }
  std::vector<std::size_t> bad;
  double med = 0.0;
  double mad = 0.0;
  if (!logs.empty()) {
    med = median(logs);
    std::vector<double> dev;
    for (double v : logs) dev.push_back(std::abs(v - med));
    mad = 1.4826 * median(dev);
  }
  const double limit = std::abs(z_threshold);
  for (std::size_t c = 0; c < n_ch; ++c) {
    if (flat[c]) {
      bad.push_back(c);
    } else if (mad > 0.0 && std::abs(std::log(sd[c]) - med) / mad > limit) {
      bad.push_back(c);
    }
  }
  return bad;
}

EegRecording interpolate_channels(const EegRecording& rec, std::span<const std::size_t> bad,
                                  std::span<const Vec3> positions) {
  const std::size_t n_ch = rec.n_channels();
  if (positions.size() != n_ch) {
    throw std::invalid_argument("interpolate_channels: one position per channel required");
  }
  std::vector<bool> is_bad(n_ch, false);
  for (std::size_t b : bad) {
    if (b >= n_ch) throw std::invalid_argument("interpolate_channels: bad index out of range");
    is_bad[b] = true;
  }
  std::vector<std::size_t> good;
  for (std::size_t c = 0; c < n_ch; ++c) {
    if (!is_bad[c]) good.push_back(c);
  }
  if (good.empty()) throw std::invalid_argument("interpolate_channels: all channels are bad");
  if (bad.empty()) return rec;
  if (good.size() < 4) throw std::invalid_argument("interpolate_channels: need >= 4 good channels");

  EegRecording out = rec;
  for (std::size_t c = 0; c < n_ch; ++c) {
    if (!is_bad[c]) continue;
    const Vec3& p = positions[c];
    std::vector<double> w(good.size());
    std::optional<std::size_t> coincident;
    for (std::size_t k = 0; k < good.size(); ++k) {
      const Vec3& q = positions[good[k]];
      const double dot = std::clamp(p.x * q.x + p.y * q.y + p.z * q.z, -1.0, 1.0);
      const double d = std::acos(dot);
      if (d < 1e-12) {
        coincident = good[k];
        break;
      }
      w[k] = 1.0 / (d * d);
    }
    auto dst = out.samples.row(static_cast<Eigen::Index>(c));
    if (coincident) {
      dst = rec.samples.row(static_cast<Eigen::Index>(*coincident));
      continue;
    }
    double wsum = 0.0;
    for (double v : w) wsum += v;
    dst.setZero();
    for (std::size_t k = 0; k < good.size(); ++k) {
      dst += (w[k] / wsum) * rec.samples.row(static_cast<Eigen::Index>(good[k]));
    }
  }
  return out;
}

EegRecording common_average_reference(const EegRecording& rec) {
  EegRecording out = rec;
  if (rec.samples.rows() == 0) return out;
  const Eigen::RowVectorXd mean = rec.samples.colwise().mean();
  out.samples.rowwise() -= mean;
  return out;
}

PreprocessedEeg preprocess_eeg(const EegRecording& rec, std::span<const Vec3> positions,
                               const EegPreprocConfig& config) {
  PreprocessedEeg result;
  EegRecording filtered = filter_eeg(rec, config.filter);
  result.bad_channels = detect_bad_channels(filtered, config.bad_channel_z);
  EegRecording repaired = interpolate_channels(filtered, result.bad_channels, positions);
  result.eeg = common_average_reference(repaired);
  return result;
}

}  // namespace intent
