#include "intent/dataset.hpp"
#include "intent/eeg_features.hpp"
#include "intent/epoching.hpp"
#include "intent/feature_table.hpp"
#include "intent/stats.hpp"
#include "intent/synthgen.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace intent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("generator settings validation and ids") {
  SynthSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(synth_user_id(s, 0) == "u01");
  CHECK(synth_user_id(s, 14) == "u15");
  const auto m = synth_manifest(s);
  CHECK(m.users.size() == 15);
  CHECK(m.channel_names.size() == 64);
  CHECK(m.eeg_fs_hz == 128.0);
  s.n_users = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SynthSpec{};
  s.eeg_effect = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("generation is byte-identical and loads back") {
  SynthSpec s;
  s.n_users = 2;
  s.n_scenes = 3;
  s.seed = 9;
  const auto a = fixture::temp_dir("synth_a");
  const auto b = fixture::temp_dir("synth_b");
  generate(s, a);
  generate(s, b);
  const auto fa = files_under(a);
  REQUIRE_FALSE(fa.empty());
  CHECK(fa == files_under(b));
  for (const auto& f : fa) {
    INFO(f.string());
    CHECK(slurp(a / f) == slurp(b / f));
  }

  const auto ds = load_dataset(a);
  REQUIRE(ds.users.size() == 2);
  for (const auto& r : ds.load_report) {
    CHECK_FALSE(r.failed);
    CHECK(r.dropped_trials == 0);
  }
  CHECK(ds.users[0].trials.size() == 3);

  // The in-memory source yields the same trials as the files.
  UserLoadReport report;
  const auto mem = synth_source(s)("u01", report);
  REQUIRE(mem.has_value());
  CHECK(mem->trials.size() == ds.users[0].trials.size());
  for (std::size_t i = 0; i < mem->trials.size(); ++i) {
    CHECK(mem->trials[i].search_found == doctest::Approx(ds.users[0].trials[i].search_found).epsilon(1e-12));
  }

  s.seed = 10;
  const auto c = fixture::temp_dir("synth_c");
  generate(s, c);
  CHECK(slurp(user_dir(a, "u01") / "events.csv") != slurp(user_dir(c, "u01") / "events.csv"));
  CHECK_FALSE(slurp(user_dir(a, "u01") / "events.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("trials honour the timeline invariants") {
  SynthSpec s;
  for (int u = 0; u < s.n_users; ++u) {
    const auto trials = synth_trials(s, u);
    REQUIRE(trials.size() == 40);
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto& t = trials[i];
      CHECK_FALSE(t.violation().has_value());
      CHECK(t.nav_duration() == doctest::Approx(5.0));
      CHECK(t.cue_end - t.cue_start == doctest::Approx(5.0));
      CHECK(t.search_duration() > 0.0);
      if (i > 0) CHECK(t.nav_start > trials[i - 1].search_found);
    }
  }
}

TEST_CASE("search-time histogram peaks in the 2-3 s bin") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthSpec s;
    s.seed = 1000 + seed;
    std::vector<TrialEvents> all;
    for (int u = 0; u < s.n_users; ++u) {
      const auto t = synth_trials(s, u);
      all.insert(all.end(), t.begin(), t.end());
    }
    const auto stats = search_time_stats(all);
    const auto mode = std::max_element(stats.histogram.begin(), stats.histogram.end(),
                                       [](const auto& a, const auto& b) { return a.count < b.count; });
    INFO("seed " << s.seed);
    CHECK(mode->lo == 2.0);
  }
}

TEST_CASE("15 users by 120 scenes yields 3600 epochs") {
  SynthSpec s;
  s.n_scenes = 120;
  const auto manifest = synth_manifest(s);
  const auto source = synth_source(s);
  std::size_t epochs = 0;
  for (const auto& id : manifest.users) {
    UserLoadReport report;
    const auto user = source(id, report);
    REQUIRE(user.has_value());
    CHECK(report.dropped_trials == 0);
    const auto sliced = slice_user(*user, user->eeg, {});
    CHECK(sliced.excluded.empty());
    epochs += 2 * sliced.pairs.size();
  }
  CHECK(epochs == 3600);
}

TEST_CASE("planted effects move the intended statistics") {
  const auto alpha_and_dwell = [](double eeg_effect, double gaze_effect) {
    SynthSpec s;
    s.n_users = 1;
    s.n_scenes = 20;
    s.eeg_effect = eeg_effect;
    s.gaze_effect = gaze_effect;
    UserLoadReport report;
    const auto user = synth_source(s)("u01", report);
    REQUIRE(user.has_value());
    const auto epochs = prepare_user_epochs(*user, synth_manifest(s), FeatureOptions{});
    std::vector<double> alpha[2];
    std::vector<double> dwell[2];
    const auto bands = default_bands();
    for (const auto& p : epochs.slices.pairs) {
      const Epoch* e[2] = {&p.navigational, &p.informational};
      for (int k = 0; k < 2; ++k) {
        double a = 0.0;
        for (Eigen::Index c = 0; c < e[k]->eeg.rows(); ++c) {
          const auto row = e[k]->eeg.row(c);
          const std::vector<double> x(row.data(), row.data() + row.size());
          const auto bp = band_powers(x, e[k]->fs_hz, bands);
          a += bp[2] / (bp[0] + bp[1] + bp[2] + bp[3] + bp[4]);
        }
        alpha[k].push_back(a);
        for (const auto& f : e[k]->fixations) dwell[k].push_back(f.duration_s);
      }
    }
    return std::pair{mean_of(alpha[1]) / mean_of(alpha[0]), mean_of(dwell[1]) / mean_of(dwell[0])};
  };
  const auto [alpha_on, dwell_on] = alpha_and_dwell(1.0, 1.0);
  CHECK(alpha_on < 0.8);
  CHECK(dwell_on > 1.3);
  const auto [alpha_off, dwell_off] = alpha_and_dwell(0.0, 0.0);
  CHECK(std::abs(alpha_off - 1.0) < 0.1);
  CHECK(std::abs(dwell_off - 1.0) < 0.15);
}
