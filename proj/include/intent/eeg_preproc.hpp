#pragma once

#include "intent/montage.hpp"
#include "intent/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace intent {

struct FilterSpec {
  double highpass_hz = 1.0;
  double lowpass_hz = 40.0;
  double notch_center_hz = 50.0;
  double notch_halfwidth_hz = 2.0;
  int order = 4;  // Butterworth order of each stage; must be even

  void validate(double fs_hz) const;
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

// Direct-form II transposed second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

using Sos = std::vector<Biquad>;

Sos butterworth_lowpass(int order, double cutoff_hz, double fs_hz);
Sos butterworth_highpass(int order, double cutoff_hz, double fs_hz);
Sos butterworth_bandstop(int order, double lo_hz, double hi_hz, double fs_hz);

// High-pass, then band-stop, then low-pass, cascaded.
Sos design_filter_chain(const FilterSpec& spec, double fs_hz);

double magnitude_response(const Sos& sos, double f_hz, double fs_hz);

// Odd-extension length used by sosfiltfilt; inputs must be longer than this.
std::size_t filtfilt_padlen(const Sos& sos);

// Forward-backward filtering with odd extension and steady-state initial conditions.
std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x);

EegRecording filter_eeg(const EegRecording& rec, const FilterSpec& spec);

// Constant channels and channels whose log standard deviation deviates from the
// median by more than z_threshold robust (MAD) units.
std::vector<std::size_t> detect_bad_channels(const EegRecording& rec, double z_threshold);

// Inverse-square great-circle-distance weighting of the good channels.
EegRecording interpolate_channels(const EegRecording& rec, std::span<const std::size_t> bad,
                                  std::span<const Vec3> positions);

EegRecording common_average_reference(const EegRecording& rec);

struct EegPreprocConfig {
  FilterSpec filter;
  double bad_channel_z = 3.0;
  std::filesystem::path montage_file;  // empty: built-in table

  friend bool operator==(const EegPreprocConfig&, const EegPreprocConfig&) = default;
};

struct PreprocessedEeg {
  EegRecording eeg;
  std::vector<std::size_t> bad_channels;
};

// filter -> bad-channel detection and interpolation -> common average reference.
PreprocessedEeg preprocess_eeg(const EegRecording& rec, std::span<const Vec3> positions,
                               const EegPreprocConfig& config);

}  // namespace intent
