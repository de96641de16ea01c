#include "intent/evaluation.hpp"
#include "intent/stats.hpp"
#include "intent/synthgen.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace intent;

namespace {

PipelineConfig quick_config() {
  PipelineConfig cfg;
  cfg.model.svm_kernels = {Kernel::Linear};
  cfg.model.svm_c = {1.0};
  cfg.model.svm_gamma = {0.1};
  return cfg;
}

FeatureBuild small_build(int users, int scenes, const PipelineConfig& cfg, double effect = 1.0) {
  SynthSpec s;
  s.n_users = users;
  s.n_scenes = scenes;
  s.seed = 5;
  s.eeg_effect = effect;
  s.gaze_effect = effect;
  return build_feature_tables(synth_manifest(s), synth_source(s), feature_options(cfg));
}

// t statistic on d = a - b straight from the definition.
double t_ref(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
  const long double m = oracle::mean(d);
  const long double var = oracle::pop_var(d) * static_cast<long double>(d.size()) / static_cast<long double>(d.size() - 1);
  return static_cast<double>(m * std::sqrt(static_cast<long double>(d.size())) / std::sqrt(var));
}

}  // namespace

TEST_CASE("paired t-test against the incomplete-beta oracle") {
  const std::vector<double> d = {1, 2, 3};
  const std::vector<double> zero = {0, 0, 0};
  const auto r = paired_ttest(d, zero);
  CHECK(r.df == 2);
  CHECK(std::abs(r.t - 2.0 * std::sqrt(3.0)) < 1e-12);
  CHECK(std::abs(r.p_two_sided - oracle::t_two_sided_p(r.t, 2)) < 1e-9);
  CHECK(r.p_two_sided == doctest::Approx(0.0742).epsilon(1e-3));

  std::mt19937_64 gen(41);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> len(2, 40);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = len(gen);
    std::vector<double> a(static_cast<std::size_t>(n));
    std::vector<double> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = n01(gen);
      b[static_cast<std::size_t>(i)] = n01(gen) + 0.3;
    }
    const auto ab = paired_ttest(a, b);
    const auto ba = paired_ttest(b, a);
    CHECK(oracle::rel_close(ab.t, t_ref(a, b), 1e-9));
    CHECK(std::abs(ab.p_two_sided - oracle::t_two_sided_p(ab.t, n - 1)) < 1e-9);
    CHECK(ab.t == -ba.t);
    CHECK(ab.p_two_sided == ba.p_two_sided);
  }

  const auto same = paired_ttest(d, d);
  CHECK(same.t == 0.0);
  CHECK(same.p_two_sided == 1.0);
  const std::vector<double> anti = {-2, 0, 2};
  const auto a0 = paired_ttest(anti, zero);
  CHECK(a0.t == 0.0);
  CHECK(a0.p_two_sided == doctest::Approx(1.0));
  const std::vector<double> shifted = {2, 3, 4};
  const auto deg = paired_ttest(shifted, d);
  CHECK(deg.degenerate);
  CHECK(deg.p_two_sided == 0.0);
  CHECK_THROWS_AS(paired_ttest(std::vector<double>{1.0}, std::vector<double>{2.0}), std::invalid_argument);
  CHECK_THROWS_AS(paired_ttest(d, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("student t distribution") {
  for (double df : {1.0, 2.0, 5.0, 14.0, 30.0}) {
    for (double t : {-4.0, -1.3, 0.0, 0.7, 2.5}) {
      CHECK(std::abs(student_t_cdf(t, df) - oracle::t_cdf(t, df)) < 1e-9);
    }
    for (double p : {0.025, 0.5, 0.9, 0.975}) {
      CHECK(std::abs(student_t_quantile(p, df) - oracle::t_quantile(p, df)) < 1e-8);
    }
  }
  CHECK(student_t_quantile(0.975, 1) == doctest::Approx(12.7062).epsilon(1e-5));
}

TEST_CASE("bonferroni") {
  CHECK(std::round(bonferroni(0.05, 3) * 1e4) / 1e4 == 0.0167);
  CHECK(bonferroni(0.05, 1) == 0.05);
  CHECK(bonferroni(0.167, 1) == 0.167);
  CHECK_THROWS_AS(bonferroni(0.05, 0), std::invalid_argument);
}

TEST_CASE("mean CI95") {
  const std::vector<double> two = {0.0, 1.0};
  const auto ci = mean_ci95(two);
  CHECK(ci.mean == 0.5);
  CHECK((ci.hi - ci.mean) == doctest::Approx(6.353).epsilon(1e-3));
  CHECK(std::abs((ci.hi - ci.mean) - oracle::t_quantile(0.975, 1) * std::sqrt(0.5) / std::sqrt(2.0)) < 1e-9);

  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(3 + trial));
    for (auto& x : v) x = u(gen);
    const auto c = mean_ci95(v);
    const double n = static_cast<double>(v.size());
    const double sd = std::sqrt(static_cast<double>(oracle::pop_var(v)) * n / (n - 1));
    const double half = oracle::t_quantile(0.975, n - 1) * sd / std::sqrt(n);
    CHECK(std::abs(c.mean - static_cast<double>(oracle::mean(v))) < 1e-12);
    CHECK(std::abs((c.hi - c.lo) / 2 - half) < 1e-9);
    CHECK(c.lo <= c.mean);
    CHECK(c.mean <= c.hi);
  }
  const std::vector<double> flat = {0.7, 0.7, 0.7};
  const auto z = mean_ci95(flat);
  CHECK(z.lo == z.hi);
  CHECK_THROWS_AS(mean_ci95(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("search time statistics") {
  std::vector<TrialEvents> trials;
  for (int i = 0; i < 10; ++i) trials.push_back(fixture::trial(i, 20.0 * i, 2.5, kAllTools[i % 5]));
  const auto s = search_time_stats(trials);
  REQUIRE(s.histogram.size() == 7);
  CHECK(s.n_trials == 10);
  CHECK(s.histogram[2].count == 10);
  CHECK(s.histogram[2].lo == 2.0);
  CHECK(s.histogram[2].hi == 3.0);
  CHECK(std::isinf(s.histogram[6].hi));
  REQUIRE(s.per_tool.size() == 5);
  for (const auto& t : s.per_tool) {
    CHECK(t.count == 2);
    CHECK(t.median == doctest::Approx(2.5));
  }

  trials.push_back(fixture::trial(10, 300.0, 9.0, Tool::Saw));
  const auto o = search_time_stats(trials);
  CHECK(o.histogram[6].count == 1);
  CHECK(o.per_tool[2].count == 3);
  CHECK(o.per_tool[2].mean == doctest::Approx((2.5 + 2.5 + 9.0) / 3.0));

  const std::vector<double> q = {1, 2, 3, 4};
  CHECK(quantile(q, 0.5) == 2.5);
  CHECK(quantile(q, 0.25) == 1.75);
  CHECK(quantile(q, 0.0) == 1.0);
  CHECK(quantile(q, 1.0) == 4.0);
}

TEST_CASE("leakage guard") {
  const std::vector<FitRecord> fits = {{"eeg.scaler", {"u01/1/nav", "u01/1/info"}},
                                       {"gaze.selection", {"u01/1/nav"}}};
  const std::vector<std::string> clean = {"u02/1/nav"};
  CHECK_NOTHROW(assert_no_leakage(fits, clean));
  const std::vector<std::string> dirty = {"u02/1/nav", "u01/1/info"};
  CHECK_THROWS_AS(assert_no_leakage(fits, dirty), LeakageError);
}

TEST_CASE("stratified split") {
  std::vector<std::size_t> rows(20);
  std::vector<int> labels(20);
  for (std::size_t i = 0; i < 20; ++i) {
    rows[i] = 100 + i;
    labels[i] = static_cast<int>(i % 2);
  }
  const auto s = stratified_split(rows, labels, 0.2, 3);
  REQUIRE(s.has_value());
  const auto& [train, test] = *s;
  CHECK(train.size() == 16);
  CHECK(test.size() == 4);
  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  CHECK(all.size() == 20);
  int pos = 0;
  for (auto r : test) pos += labels[r - 100];
  CHECK(pos == 2);
  CHECK(stratified_split(rows, labels, 0.2, 3) == s);

  std::vector<int> lopsided(20, 0);
  lopsided[0] = 1;
  CHECK_FALSE(stratified_split(rows, lopsided, 0.2, 3).has_value());
}

TEST_CASE("leave-one-user-out") {
  auto cfg = quick_config();
  const auto build = small_build(2, 8, cfg);
  REQUIRE(build.tables.size() == 1);
  const auto& table = build.tables.front();
  CHECK(table.rows() == 32);
  const std::vector<FusionStrategy> st = {FusionStrategy::Early, FusionStrategy::Late};
  const auto reports = louo_evaluate(table, cfg, st, 42);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].folds.size() == 2);
  CHECK(reports[0].units.size() == 2);
  CHECK(reports[0].n_epochs == 32);
  CHECK(reports[0].comparisons.size() == 1);
  CHECK(reports[1].comparisons.empty());
  for (const auto& r : reports) {
    CHECK(r.ci_lo <= r.mean_accuracy);
    CHECK(r.mean_accuracy <= r.ci_hi);
    CHECK(r.confusion.total() == 32);
    for (const auto& u : r.units) {
      CHECK(u.accuracy >= 0.0);
      CHECK(u.accuracy <= 1.0);
    }
  }

  SUBCASE("fold fits never see the held-out user") {
    const auto test_rows = table.rows_of(table.users()[0]);
    const auto train_rows = table.rows_of(table.users()[1]);
    const auto fold = run_fold(table, train_rows, test_rows, cfg, st, 1);
    CHECK_FALSE(fold.fits.empty());
    std::vector<std::string> ids;
    for (auto r : test_rows) ids.push_back(table.epochs[r].id);
    CHECK_NOTHROW(assert_no_leakage(fold.fits, ids));
  }
  SUBCASE("injected leakage aborts") {
    cfg.eval.inject_leakage = true;
    CHECK_THROWS_AS(louo_evaluate(table, cfg, st, 42), LeakageError);
  }
  SUBCASE("single user is rejected") {
    const auto one = select_rows(table, table.rows_of(table.users()[0]));
    CHECK_THROWS(louo_evaluate(one, cfg, st, 42));
  }
  SUBCASE("reproducible") {
    const auto again = louo_evaluate(table, cfg, st, 42);
    CHECK(again[0].mean_accuracy == reports[0].mean_accuracy);
    CHECK(again[1].units[1].accuracy == reports[1].units[1].accuracy);
  }
}

TEST_CASE("within-user repeats") {
  const auto cfg = quick_config();
  const auto build = small_build(2, 10, cfg, 3.0);
  const auto& table = build.tables.front();
  const std::vector<FusionStrategy> st = {FusionStrategy::Early};
  const auto reports = within_user_evaluate(table, cfg, st, 10, 0.2, 42);
  REQUIRE(reports.size() == 1);
  REQUIRE(reports[0].units.size() == 2);
  for (const auto& u : reports[0].units) {
    CHECK(u.repeat_accuracies.size() == 10);
    CHECK(u.accuracy >= 0.95);
  }
  CHECK(reports[0].folds.size() == 20);
  for (const auto& f : reports[0].folds) CHECK(f.n_test == 4);
  const auto again = within_user_evaluate(table, cfg, st, 10, 0.2, 42);
  CHECK(again[0].units[0].repeat_accuracies == reports[0].units[0].repeat_accuracies);
  CHECK(again[0].mean_accuracy == reports[0].mean_accuracy);
}

TEST_CASE("windowed evaluation shares one epoch set") {
  auto cfg = quick_config();
  cfg.eval.protocol = Protocol::Windowed;
  const auto build = small_build(2, 8, cfg);
  REQUIRE(build.tables.size() == 4);
  for (const auto& t : build.tables) {
    CHECK(t.rows() == build.tables[0].rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
      CHECK(t.epochs[i].id == build.tables[0].epochs[i].id);
      CHECK(t.epochs[i].search_duration_s >= 2.0);
    }
  }
  const std::vector<FusionStrategy> st = {FusionStrategy::Early};
  const auto all = windowed_evaluate(build.tables, cfg, st, Protocol::Louo, 42);
  REQUIRE(all.size() == 4);
  for (std::size_t w = 0; w < 4; ++w) {
    const auto& r = all[w][0];
    CHECK(r.protocol == Protocol::Windowed);
    REQUIRE(r.window_s.has_value());
    CHECK(*r.window_s == cfg.eval.windows[w]);
    REQUIRE(r.folds.size() == all[0][0].folds.size());
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      CHECK(r.folds[f].n_test == all[0][0].folds[f].n_test);
      CHECK(r.folds[f].n_train == all[0][0].folds[f].n_train);
    }
  }
}

TEST_CASE("full run on an in-memory dataset") {
  auto cfg = quick_config();
  cfg.compare = {FusionStrategy::EegOnly, FusionStrategy::GazeOnly};
  SynthSpec s;
  s.n_users = 3;
  s.n_scenes = 6;
  const auto run = run_evaluation(cfg, synth_manifest(s), synth_source(s));
  REQUIRE(run.reports.size() == 1);
  CHECK(run.reports[0].strategy == FusionStrategy::Early);
  CHECK(run.reports[0].comparisons.size() == 2);
  for (const auto& c : run.reports[0].comparisons) CHECK(c.alpha_adjusted == doctest::Approx(0.025));
  CHECK_FALSE(run.config_echo.empty());
  CHECK(run.load_reports.size() == 3);

  cfg.eeg_preproc.filter.lowpass_hz = 90.0;
  CHECK_THROWS_AS(run_evaluation(cfg, synth_manifest(s), synth_source(s)), ConfigError);
}
