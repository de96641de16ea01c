#include "intent/synthgen.hpp"

#include "intent/dataset.hpp"
#include "intent/montage.hpp"
#include "intent/parallel.hpp"
#include "intent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace intent {

namespace {

constexpr double kLeadIn = 2.0;
constexpr double kNav = 5.0;
constexpr double kCue = 5.0;
constexpr double kPause = 1.0;
constexpr double kTail = 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum Stream : std::uint64_t { kTrials = 1, kEeg, kGaze, kUser };

// Paul Kellet's refined white-to-pink filter.
class PinkNoise {
 public:
  double next(Rng& rng) {
    const double w = rng.normal();
    b_[0] = 0.99886 * b_[0] + w * 0.0555179;
    b_[1] = 0.99332 * b_[1] + w * 0.0750759;
    b_[2] = 0.96900 * b_[2] + w * 0.1538520;
    b_[3] = 0.86650 * b_[3] + w * 0.3104856;
    b_[4] = 0.55000 * b_[4] + w * 0.5329522;
    b_[5] = -0.7616 * b_[5] - w * 0.0168980;
    const double out = b_[0] + b_[1] + b_[2] + b_[3] + b_[4] + b_[5] + b_[6] + w * 0.5362;
    b_[6] = w * 0.115926;
    return out * 0.11;
  }

 private:
  double b_[7] = {};
};

struct UserTraits {
  double eeg_scale;
  double alpha_hz;
  double beta_hz;
  double dwell_s;
};

UserTraits user_traits(const SynthSpec& spec, int u) {
  Rng rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(u) + 1), kUser));
  UserTraits t;
  t.eeg_scale = std::exp(rng.normal(0.0, 0.2));
  t.alpha_hz = rng.uniform(9.0, 11.5);
  t.beta_hz = rng.uniform(17.0, 24.0);
  t.dwell_s = 0.22 * std::exp(rng.normal(0.0, 0.1));
  return t;
}

// Phase of the recording at time t: 1 while searching, 0 otherwise.
class SearchMask {
 public:
  explicit SearchMask(const std::vector<TrialEvents>& trials) {
    for (const auto& tr : trials) spans_.emplace_back(tr.search_start, tr.search_found);
  }
  bool searching(double t) {
    while (next_ < spans_.size() && spans_[next_].second <= t) ++next_;
    return next_ < spans_.size() && t >= spans_[next_].first;
  }

 private:
  std::vector<std::pair<double, double>> spans_;
  std::size_t next_ = 0;
};

double recording_end(const std::vector<TrialEvents>& trials) {
  return trials.empty() ? kLeadIn + kTail : trials.back().search_found + kPause + kTail;
}

EegRecording synth_eeg(const SynthSpec& spec, int u, const std::vector<TrialEvents>& trials) {
  const UserTraits traits = user_traits(spec, u);
  Rng rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(u) + 1), kEeg));
  EegRecording eeg;
  eeg.channel_names = standard_64_channels();
  eeg.fs_hz = spec.eeg_fs_hz;
  eeg.t0 = 0.0;
  const auto n = static_cast<Eigen::Index>(std::ceil(recording_end(trials) * spec.eeg_fs_hz)) + 1;
  const auto c = static_cast<Eigen::Index>(eeg.channel_names.size());
  eeg.samples.resize(c, n);

  // Spatial patterns: posterior alpha, central beta, with per-channel jitter.
  std::vector<double> g_alpha(static_cast<std::size_t>(c));
  std::vector<double> g_beta(static_cast<std::size_t>(c));
  std::vector<double> g_shared(static_cast<std::size_t>(c));
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    const Vec3 p = standard_position(eeg.channel_names[static_cast<std::size_t>(ch)]).value_or(Vec3{});
    const auto k = static_cast<std::size_t>(ch);
    g_alpha[k] = (0.3 + std::exp(-std::pow(p.y + 0.8, 2) / 0.25)) * rng.uniform(0.8, 1.2);
    g_beta[k] = (0.3 + std::exp(-(p.x * p.x + p.y * p.y) / 0.3)) * rng.uniform(0.8, 1.2);
    g_shared[k] = rng.uniform(0.2, 0.6);
  }
  std::vector<PinkNoise> pink(static_cast<std::size_t>(c));
  PinkNoise shared;
  SearchMask mask(trials);
  const double dt = 1.0 / spec.eeg_fs_hz;
  const double alpha_search = std::max(0.0, 1.0 - 0.5 * spec.eeg_effect);
  const double beta_search = 1.0 + 0.5 * spec.eeg_effect;
  double phase_a = rng.uniform(0.0, kTwoPi);
  double phase_b = rng.uniform(0.0, kTwoPi);
  double env_a = 1.0;
  double env_b = 1.0;
  const double line_amp = 1.5;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const bool search = mask.searching(t);
    phase_a += kTwoPi * traits.alpha_hz * dt + rng.normal(0.0, 0.05);
    phase_b += kTwoPi * traits.beta_hz * dt + rng.normal(0.0, 0.08);
    env_a = 0.995 * env_a + 0.005 * (1.0 + rng.normal(0.0, 1.0));
    env_b = 0.99 * env_b + 0.01 * (1.0 + rng.normal(0.0, 1.0));
    const double a = 8.0 * std::max(0.2, env_a) * std::sin(phase_a) * (search ? alpha_search : 1.0);
    const double b = 4.0 * std::max(0.2, env_b) * std::sin(phase_b) * (search ? beta_search : 1.0);
    const double s = shared.next(rng) * 10.0;
    const double line = line_amp * std::sin(kTwoPi * 50.0 * t);
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const auto k = static_cast<std::size_t>(ch);
      const double noise = pink[k].next(rng) * 10.0 + g_shared[k] * s;
      eeg.samples(ch, i) = traits.eeg_scale * (noise + g_alpha[k] * a + g_beta[k] * b) + line;
    }
  }
  return eeg;
}

double reflect01(double v) {
  constexpr double lo = 0.03;
  constexpr double hi = 0.97;
  for (int i = 0; i < 4 && (v < lo || v > hi); ++i) v = v < lo ? 2 * lo - v : 2 * hi - v;
  return std::clamp(v, lo, hi);
}

std::vector<GazeSample> synth_gaze(const SynthSpec& spec, int u, const std::vector<TrialEvents>& trials) {
  const UserTraits traits = user_traits(spec, u);
  Rng rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(u) + 1), kGaze));
  SearchMask mask(trials);
  const auto n = static_cast<std::size_t>(std::ceil(recording_end(trials) * spec.gaze_fs_hz)) + 1;
  std::vector<GazeSample> out;
  out.reserve(n);
  const double g = spec.gaze_effect;
  Point2 pos{0.5, 0.5};
  Point2 from = pos;
  Point2 to = pos;
  bool in_saccade = false;
  double seg_start = 0.0;
  double seg_end = 0.0;
  double blink_start = -1.0;
  double blink_end = -1.0;
  const auto start_fixation = [&](double t) {
    const bool search = mask.searching(t);
    const double mean = traits.dwell_s * (search ? 1.0 + g : 1.0);
    seg_start = t;
    seg_end = t + std::max(0.08, mean * std::exp(rng.normal(-0.06, 0.35)));
    blink_start = blink_end = -1.0;
    if (rng.uniform01() < 0.04) {
      blink_start = t + rng.uniform(0.0, 0.5) * (seg_end - t);
      blink_end = blink_start + rng.uniform(0.08, 0.18);
    }
  };
  const auto start_saccade = [&](double t) {
    const bool search = mask.searching(t);
    const double spread = 0.18 / (search ? 1.0 + g : 1.0);
    from = pos;
    to = {reflect01(pos.x + rng.normal(0.0, spread)), reflect01(pos.y + rng.normal(0.0, spread))};
    const double dist = std::hypot(to.x - from.x, to.y - from.y);
    seg_start = t;
    seg_end = t + 0.025 + 0.08 * dist;
  };
  start_fixation(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / spec.gaze_fs_hz;
    if (t >= seg_end) {
      if (in_saccade) {
        pos = to;
        in_saccade = false;
        start_fixation(t);
      } else {
        in_saccade = true;
        start_saccade(t);
      }
    }
    Point2 p = pos;
    if (in_saccade) {
      const double f = std::clamp((t - seg_start) / (seg_end - seg_start), 0.0, 1.0);
      p = {from.x + f * (to.x - from.x), from.y + f * (to.y - from.y)};
    }
    GazeSample s;
    s.t = t;
    s.left = {p.x + rng.normal(0.0, 0.0015), p.y + rng.normal(0.0, 0.0015)};
    s.right = {s.left.x + 0.004 + rng.normal(0.0, 0.0015), s.left.y - 0.002 + rng.normal(0.0, 0.0015)};
    const bool blink = t >= blink_start && t < blink_end;
    s.left_valid = !blink;
    s.right_valid = !blink && rng.uniform01() > 0.002;
    s.eye_distance_mm = 600.0 + rng.normal(0.0, 5.0);
    out.push_back(s);
  }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_users < 1) throw std::invalid_argument("synthgen: n_users must be >= 1");
  if (n_scenes < 1) throw std::invalid_argument("synthgen: n_scenes must be >= 1");
  if (!(eeg_effect >= 0.0) || !(gaze_effect >= 0.0)) throw std::invalid_argument("synthgen: effects must be >= 0");
  if (!(search_sigma > 0.0) || !std::isfinite(search_mu)) throw std::invalid_argument("synthgen: invalid search-time shape");
  if (!(eeg_fs_hz >= 110.0)) throw std::invalid_argument("synthgen: eeg_fs_hz must be >= 110 (50 Hz line component)");
  if (!(gaze_fs_hz >= 50.0)) throw std::invalid_argument("synthgen: gaze_fs_hz must be >= 50");
}

std::string synth_user_id(const SynthSpec& spec, int user_index) {
  const int width = std::max<int>(2, static_cast<int>(std::to_string(spec.n_users).size()));
  std::string num = std::to_string(user_index + 1);
  return "u" + std::string(static_cast<std::size_t>(std::max<int>(0, width - static_cast<int>(num.size()))), '0') + num;
}

Manifest synth_manifest(const SynthSpec& spec) {
  spec.validate();
  Manifest m;
  for (int u = 0; u < spec.n_users; ++u) m.users.push_back(synth_user_id(spec, u));
  m.eeg_fs_hz = spec.eeg_fs_hz;
  m.gaze_fs_hz = spec.gaze_fs_hz;
  m.channel_names = standard_64_channels();
  return m;
}

std::vector<TrialEvents> synth_trials(const SynthSpec& spec, int user_index) {
  spec.validate();
  Rng rng(derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(user_index) + 1), kTrials));
  constexpr double tool_factor[] = {1.0, 1.1, 0.9, 1.2, 0.95};
  std::vector<TrialEvents> trials;
  double t = kLeadIn;
  for (int s = 0; s < spec.n_scenes; ++s) {
    TrialEvents tr;
    tr.trial_id = s + 1;
    tr.user_id = synth_user_id(spec, user_index);
    const auto tool = rng.index(std::size(kAllTools));
    tr.target_tool = kAllTools[tool];
    tr.nav_start = t;
    tr.nav_end = t + kNav;
    tr.cue_start = tr.nav_end;
    tr.cue_end = tr.cue_start + kCue;
    tr.search_start = tr.cue_end;
    const double search = tool_factor[tool] * std::exp(rng.normal(spec.search_mu, spec.search_sigma));
    tr.search_found = tr.search_start + std::clamp(search, 0.25, 30.0);
    // Round to the CSV resolution so written and in-memory timelines agree.
    for (double* v : {&tr.nav_start, &tr.nav_end, &tr.cue_start, &tr.cue_end, &tr.search_start, &tr.search_found}) {
      *v = std::round(*v * 1e6) / 1e6;
    }
    trials.push_back(tr);
    t = tr.search_found + kPause;
  }
  return trials;
}

UserRecording synth_user(const SynthSpec& spec, int user_index) {
  UserRecording user;
  user.user_id = synth_user_id(spec, user_index);
  user.trials = synth_trials(spec, user_index);
  user.eeg = synth_eeg(spec, user_index, user.trials);
  user.gaze = synth_gaze(spec, user_index, user.trials);
  return user;
}

UserSource synth_source(const SynthSpec& spec) {
  spec.validate();
  return [spec](const std::string& id, UserLoadReport& report) -> std::optional<UserRecording> {
    report.user_id = id;
    for (int u = 0; u < spec.n_users; ++u) {
      if (synth_user_id(spec, u) == id) {
        UserRecording user = synth_user(spec, u);
        report.trials_read = user.trials.size();
        validate_trials(user, report);
        return user;
      }
    }
    report.failed = true;
    report.failure = "unknown synthetic user " + id;
    return std::nullopt;
  };
}

void generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  const Manifest m = synth_manifest(spec);
  std::filesystem::create_directories(out_dir);
  write_manifest(out_dir, m);
  parallel_for(static_cast<std::size_t>(spec.n_users), [&](std::size_t u) {
    write_user(out_dir, synth_user(spec, static_cast<int>(u)));
  });
}

}  // namespace intent
