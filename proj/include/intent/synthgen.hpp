#pragma once

#include "intent/feature_table.hpp"
#include "intent/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace intent {

struct SynthSpec {
  int n_users = 15;
  int n_scenes = 40;
  std::uint64_t seed = 42;
  double eeg_effect = 1.0;   // alpha x (1 - e/2), beta x (1 + e/2) while searching
  double gaze_effect = 1.0;  // search dwell x (1 + g), saccade spread / (1 + g)
  double search_sigma = 0.45;
  double search_mu = 1.0;  // log seconds; across tool factors the mode lands in [2, 3) s
  double eeg_fs_hz = 128.0;
  double gaze_fs_hz = 120.0;

  void validate() const;
};

std::string synth_user_id(const SynthSpec& spec, int user_index);
Manifest synth_manifest(const SynthSpec& spec);

// Trial timeline: 2 s lead-in, then per scene navigation 5 s, cue 5 s,
// search (lognormal), 1 s pause; 2 s tail after the last scene.
std::vector<TrialEvents> synth_trials(const SynthSpec& spec, int user_index);

UserRecording synth_user(const SynthSpec& spec, int user_index);

// Generates users on demand without touching the disk.
UserSource synth_source(const SynthSpec& spec);

// Writes the canonical layout; byte-identical for identical specs.
void generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace intent
