#include "fixtures.hpp"
#include "intent/dataset.hpp"
#include "intent/epoching.hpp"
#include "intent/synthgen.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace intent;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

SynthSpec small_spec(int users, int scenes) {
  SynthSpec s;
  s.n_users = users;
  s.n_scenes = scenes;
  return s;
}

}  // namespace

TEST_CASE("screen geometry validates and measures visual angle") {
  ScreenGeometry g;
  CHECK_NOTHROW(g.validate());
  const double deg = g.visual_angle_deg({0.0, 0.5}, {1.0, 0.5});
  CHECK(deg == doctest::Approx(2.0 * std::atan(531.0 / 1200.0) * 180.0 / std::numbers::pi).epsilon(1e-12));
  g.viewer_distance_mm = 0.0;
  CHECK_THROWS(g.validate());
}

TEST_CASE("trial invariants") {
  auto t = fixture::trial(1, 2.0, 3.0);
  CHECK_FALSE(t.violation().has_value());
  t.search_found = t.search_start - 0.1;
  CHECK(t.violation().has_value());
  auto u = fixture::trial(2, 2.0, 3.0);
  u.nav_end = u.nav_start + 4.0;
  CHECK(u.violation().has_value());
}

TEST_CASE("tool names round trip") {
  for (Tool t : kAllTools) CHECK(parse_tool(to_string(t)) == t);
  CHECK_FALSE(parse_tool("chisel").has_value());
}

TEST_CASE("well-formed two-user fixture loads with every trial") {
  const auto dir = fixture::temp_dir("core_load");
  generate(small_spec(2, 4), dir);
  const Dataset ds = load_dataset(dir);
  REQUIRE(ds.users.size() == 2);
  for (const auto& r : ds.load_report) {
    CHECK_FALSE(r.failed);
    CHECK(r.dropped_trials == 0);
  }
  CHECK(ds.users[0].trials.size() == 4);
  CHECK(ds.users[0].eeg.n_channels() == 64);
  CHECK(ds.user("u02").user_id == "u02");
}

TEST_CASE("a trial with search_found before search_start is dropped") {
  const auto dir = fixture::temp_dir("core_bad_trial");
  generate(small_spec(1, 4), dir);
  const auto events = dir / "user_u01" / "events.csv";
  std::string text = slurp(events);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  std::string out = header + "\n";
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (row++ == 1) {
      // swap the last two columns of the second trial
      const auto last = line.rfind(',');
      const auto prev = line.rfind(',', last - 1);
      line = line.substr(0, prev) + "," + line.substr(last + 1) + "," + line.substr(prev + 1, last - prev - 1);
    }
    out += line + "\n";
  }
  spit(events, out);
  const Dataset ds = load_dataset(dir);
  REQUIRE(ds.users.size() == 1);
  CHECK(ds.users[0].trials.size() == 3);
  CHECK(ds.load_report[0].dropped_trials == 1);
  CHECK(ds.users[0].trials[1].trial_id == 3);
}

TEST_CASE("missing manifest is fatal") {
  const auto dir = fixture::temp_dir("core_nomanifest");
  CHECK_THROWS_AS(load_dataset(dir), DataError);
}

TEST_CASE("malformed rows are skipped, a mostly malformed file fails the user") {
  const auto dir = fixture::temp_dir("core_malformed");
  generate(small_spec(2, 2), dir);
  const auto gaze1 = dir / "user_u01" / "gaze.csv";
  std::string g = slurp(gaze1);
  const auto second_line = g.find('\n') + 1;
  g.insert(second_line, "garbage,row\n");
  spit(gaze1, g);
  const auto ev2 = dir / "user_u02" / "events.csv";
  spit(ev2, slurp(ev2).substr(0, slurp(ev2).find('\n') + 1) + "x,y\nz\n1,Hammer,2,7,7,12,12,14\n");
  const Dataset ds = load_dataset(dir);
  CHECK(ds.load_report[0].skipped_rows == 1);
  CHECK_FALSE(ds.load_report[0].failed);
  CHECK(ds.load_report[1].failed);
  CHECK(ds.users.size() == 1);
}

TEST_CASE("equal-duration slicing") {
  UserRecording u;
  u.user_id = "a";
  for (int i = 0; i < 3; ++i) {
    auto t = fixture::trial(i + 1, 2.0 + 25.0 * i, i == 0 ? 3.2 : (i == 1 ? 8.0 : 0.1));
    t.user_id = "a";
    u.trials.push_back(t);
  }
  u.eeg = fixture::flat_eeg(4, 500.0, 80.0);
  const auto r = slice_user(u, u.eeg, {});
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.excluded.size() == 1);
  CHECK(r.pairs[0].navigational.duration_s == doctest::Approx(3.2));
  CHECK(r.pairs[0].informational.duration_s == r.pairs[0].navigational.duration_s);
  CHECK(r.pairs[0].navigational.eeg.cols() == 1600);
  CHECK(r.pairs[1].navigational.duration_s == doctest::Approx(5.0));
  CHECK(r.pairs[1].informational.duration_s == doctest::Approx(5.0));
  CHECK(r.pairs[0].navigational.intent == Intent::Navigational);
  CHECK(r.pairs[0].informational.intent == Intent::Informational);
  // EEG ramps with the sample index, so the first column reveals the onset
  CHECK(r.pairs[0].navigational.eeg(0, 0) == doctest::Approx(1000.0));
  CHECK(r.pairs[0].informational.eeg(0, 0) == doctest::Approx(6000.0));
  CHECK(r.pairs[0].navigational.id() == "a/1/nav");
}

TEST_CASE("ten trials give ten alternating pairs, deterministically") {
  UserRecording u;
  u.user_id = "b";
  for (int i = 0; i < 10; ++i) {
    auto t = fixture::trial(i + 1, 2.0 + 15.0 * i, 2.5);
    t.user_id = "b";
    u.trials.push_back(t);
  }
  u.eeg = fixture::flat_eeg(2, 100.0, 160.0);
  const auto a = slice_user(u, u.eeg, {});
  const auto b = slice_user(u, u.eeg, {});
  REQUIRE(a.pairs.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a.pairs[i].navigational.intent == Intent::Navigational);
    CHECK(a.pairs[i].informational.intent == Intent::Informational);
    CHECK(a.pairs[i].navigational.onset_t == b.pairs[i].navigational.onset_t);
    CHECK(a.pairs[i].informational.eeg == b.pairs[i].informational.eeg);
  }
}

TEST_CASE("prefix windows") {
  UserRecording u;
  u.user_id = "c";
  auto t = fixture::trial(1, 2.0, 3.0);
  t.user_id = "c";
  u.trials.push_back(t);
  u.eeg = fixture::flat_eeg(2, 500.0, 20.0);
  const std::vector<Fixation> fix = {{12.2, 12.9, {0.5, 0.5}, 0.7}, {13.1, 14.5, {0.2, 0.2}, 1.4}};
  const auto r = slice_user(u, u.eeg, fix);
  const Epoch& info = r.pairs.at(0).informational;
  REQUIRE(info.fixations.size() == 2);
  CHECK(info.fixations[1].end_t == doctest::Approx(14.5));
  const Epoch w = window_epoch(info, 1.5);
  CHECK(w.duration_s == 1.5);
  CHECK(w.eeg.cols() == 750);
  REQUIRE(w.fixations.size() == 2);
  CHECK(w.fixations[1].end_t == doctest::Approx(13.5));
  CHECK(w.fixations[1].duration_s == doctest::Approx(0.4));
  CHECK_THROWS(window_epoch(info, 0.0));
  CHECK_THROWS(window_epoch(info, 3.5));
  const Epoch same = window_epoch(info, info.duration_s);
  CHECK(same.eeg == info.eeg);
  CHECK(same.fixations == info.fixations);
}

TEST_CASE("edge guard keeps epochs away from recording ends") {
  UserRecording u;
  u.user_id = "d";
  auto t = fixture::trial(1, 0.5, 3.0);
  t.user_id = "d";
  u.trials.push_back(t);
  u.eeg = fixture::flat_eeg(2, 100.0, 20.0);
  const auto r = slice_user(u, u.eeg, {});
  CHECK(r.pairs.empty());
  CHECK(r.excluded.size() == 1);
}

TEST_CASE("adapter flips the calibration axes") {
  const auto src = fixture::temp_dir("core_adapt_src");
  const auto dst = fixture::temp_dir("core_adapt_dst");
  generate(small_spec(1, 1), src);
  adapt_published_layout(src, dst, {true, false});
  const Dataset a = load_dataset(src);
  const Dataset b = load_dataset(dst);
  REQUIRE(b.users.size() == 1);
  const auto& sa = a.users[0].gaze[10];
  const auto& sb = b.users[0].gaze[10];
  CHECK(sb.left.x == doctest::Approx(1.0 - sa.left.x).epsilon(1e-9));
  CHECK(sb.left.y == doctest::Approx(sa.left.y).epsilon(1e-9));
}
