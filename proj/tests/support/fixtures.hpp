#pragma once

#include "intent/dataset.hpp"
#include "intent/types.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixture {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("intent_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Dwell {
  double x;
  double y;
  double duration_s;
};

struct Scanpath {
  std::vector<intent::GazeSample> samples;
  std::vector<intent::Point2> planted;
};

// Binocular stream at fs: each dwell holds still with small jitter, separated by
// linear saccades of saccade_s. Optional blink gaps mark both eyes invalid.
inline Scanpath planted_scanpath(const std::vector<Dwell>& dwells, double fs, std::uint64_t seed,
                                 double saccade_s = 0.04, double jitter = 0.0005,
                                 std::vector<std::pair<double, double>> blinks = {}) {
  Scanpath sp;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, jitter);
  struct Seg {
    double t0, t1;
    intent::Point2 a, b;
  };
  std::vector<Seg> segs;
  double t = 0.0;
  for (std::size_t i = 0; i < dwells.size(); ++i) {
    const intent::Point2 p{dwells[i].x, dwells[i].y};
    segs.push_back({t, t + dwells[i].duration_s, p, p});
    t += dwells[i].duration_s;
    sp.planted.push_back(p);
    if (i + 1 < dwells.size()) {
      segs.push_back({t, t + saccade_s, p, {dwells[i + 1].x, dwells[i + 1].y}});
      t += saccade_s;
    }
  }
  const auto n = static_cast<std::size_t>(std::floor(t * fs));
  std::size_t s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = static_cast<double>(k) / fs;
    while (s + 1 < segs.size() && tk >= segs[s].t1) ++s;
    const auto& g = segs[s];
    const double f = std::clamp((tk - g.t0) / (g.t1 - g.t0), 0.0, 1.0);
    intent::GazeSample smp;
    smp.t = tk;
    smp.left = {g.a.x + f * (g.b.x - g.a.x) + noise(gen), g.a.y + f * (g.b.y - g.a.y) + noise(gen)};
    smp.right = {smp.left.x + noise(gen), smp.left.y + noise(gen)};
    smp.left_valid = smp.right_valid = true;
    for (const auto& [b0, b1] : blinks) {
      if (tk >= b0 && tk < b1) smp.left_valid = smp.right_valid = false;
    }
    smp.eye_distance_mm = 600.0;
    sp.samples.push_back(smp);
  }
  return sp;
}

inline intent::TrialEvents trial(int id, double nav_start, double search_s,
                                 intent::Tool tool = intent::Tool::Hammer) {
  intent::TrialEvents t;
  t.trial_id = id;
  t.target_tool = tool;
  t.nav_start = nav_start;
  t.nav_end = nav_start + 5.0;
  t.cue_start = t.nav_end;
  t.cue_end = t.cue_start + 5.0;
  t.search_start = t.cue_end;
  t.search_found = t.search_start + search_s;
  return t;
}

// Constant-valued EEG covering [0, duration) with the given channels.
inline intent::EegRecording flat_eeg(std::size_t channels, double fs, double duration) {
  intent::EegRecording e;
  for (std::size_t c = 0; c < channels; ++c) e.channel_names.push_back("C" + std::to_string(c));
  e.fs_hz = fs;
  e.samples = intent::SignalMatrix::Zero(static_cast<Eigen::Index>(channels),
                                         static_cast<Eigen::Index>(std::ceil(duration * fs)));
  for (Eigen::Index i = 0; i < e.samples.cols(); ++i) e.samples.col(i).setConstant(static_cast<double>(i));
  return e;
}

}  // namespace fixture
