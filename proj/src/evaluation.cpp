#include "intent/evaluation.hpp"

#include "intent/gaze_features.hpp"
#include "intent/parallel.hpp"
#include "intent/rng.hpp"
#include "intent/scaler.hpp"
#include "intent/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace intent {

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Eigen::MatrixXd take_cols(const Eigen::MatrixXd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

std::set<std::string> ids_of(const FeatureTable& t, std::span<const std::size_t> rows) {
  std::set<std::string> s;
  for (auto r : rows) s.insert(t.epochs[r].id);
  return s;
}

bool uses_eeg(std::span<const FusionStrategy> s) {
  return std::any_of(s.begin(), s.end(), [](FusionStrategy x) { return x != FusionStrategy::GazeOnly; });
}

bool uses_gaze(std::span<const FusionStrategy> s) {
  return std::any_of(s.begin(), s.end(), [](FusionStrategy x) { return x != FusionStrategy::EegOnly; });
}

struct EegBlock {
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
};

EegBlock fit_eeg(const FeatureTable& t, std::span<const std::size_t> fit_rows,
                 std::span<const std::size_t> train, std::span<const std::size_t> test,
                 const PipelineConfig& cfg, std::vector<FitRecord>& fits) {
  EegBlock b;
  if (cfg.eeg_method == EegMethod::Pyeeg) {
    if (t.pyeeg.cols() == 0) throw std::logic_error("run_fold: table lacks PyEEG features");
    const ScalerModel pre = fit_scaler(take_rows(t.pyeeg, fit_rows));
    fits.push_back({"eeg.scaler", ids_of(t, fit_rows)});
    const Eigen::MatrixXd xtr = apply_scaler(pre, take_rows(t.pyeeg, train));
    const PcaModel pca = fit_pca(xtr, cfg.eeg_features.variance_target);
    fits.push_back({"eeg.pca", ids_of(t, train)});
    const Eigen::MatrixXd ztr = apply_pca(pca, xtr);
    const Eigen::MatrixXd zte = apply_pca(pca, apply_scaler(pre, take_rows(t.pyeeg, test)));
    const ScalerModel post = fit_scaler(ztr);
    fits.push_back({"eeg.scaler_post", ids_of(t, train)});
    b.train = apply_scaler(post, ztr);
    b.test = apply_scaler(post, zte);
    return b;
  }
  if (t.covariances.size() != t.rows()) throw std::logic_error("run_fold: table lacks covariances");
  std::vector<Eigen::MatrixXd> covs;
  std::vector<int> labels;
  for (auto r : fit_rows) {
    covs.push_back(t.covariances[r]);
    labels.push_back(t.epochs[r].label);
  }
  const CspModel csp = fit_csp(covs, labels, cfg.eeg_features.csp_components);
  fits.push_back({"eeg.csp", ids_of(t, fit_rows)});
  const auto project = [&](std::span<const std::size_t> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), csp.filters.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto f = apply_csp(csp, t.covariances[rows[i]]);
      for (std::size_t j = 0; j < f.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
    }
    return m;
  };
  const Eigen::MatrixXd ftr = project(train);
  const ScalerModel s = fit_scaler(ftr);
  fits.push_back({"eeg.scaler", ids_of(t, train)});
  b.train = apply_scaler(s, ftr);
  b.test = apply_scaler(s, project(test));
  return b;
}

struct GazeBlock {
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
  std::vector<std::string> selected;
};

GazeBlock fit_gaze(const FeatureTable& t, std::span<const std::size_t> fit_rows,
                   std::span<const std::size_t> train, std::span<const std::size_t> test,
                   const PipelineConfig& cfg, std::vector<FitRecord>& fits) {
  GazeBlock b;
  std::vector<std::size_t> cols;
  if (cfg.gaze_features.pinned_selection) {
    cols = gaze_feature_indices(*cfg.gaze_features.pinned_selection);
  } else {
    cols = spearman_cluster_select(take_rows(t.gaze, fit_rows), cfg.gaze_features.clustering_threshold);
  }
  fits.push_back({"gaze.selection", ids_of(t, fit_rows)});
  for (auto c : cols) b.selected.emplace_back(gaze_feature_names()[c]);
  const Eigen::MatrixXd gtr = take_cols(take_rows(t.gaze, train), cols);
  const ScalerModel s = fit_scaler(gtr);
  fits.push_back({"gaze.scaler", ids_of(t, train)});
  b.train = apply_scaler(s, gtr);
  b.test = apply_scaler(s, take_cols(take_rows(t.gaze, test), cols));
  return b;
}

std::vector<EvalReport> assemble(Protocol protocol, std::optional<double> window,
                                 std::span<const FusionStrategy> strategies,
                                 const std::vector<std::string>& units,
                                 const std::vector<std::vector<FoldOutcome>>& outcomes,
                                 const std::vector<std::vector<int>>& repeat_ids,
                                 std::size_t n_epochs, std::vector<std::string> warnings) {
  std::vector<EvalReport> reports(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    EvalReport& r = reports[s];
    r.protocol = protocol;
    r.window_s = window;
    r.strategy = strategies[s];
    r.n_epochs = n_epochs;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (outcomes[u].empty()) continue;
      UnitResult ur;
      ur.unit = units[u];
      double sum = 0.0;
      for (std::size_t k = 0; k < outcomes[u].size(); ++k) {
        FoldRecord f = outcomes[u][k].per_strategy[s];
        f.repeat = repeat_ids[u][k];
        sum += f.accuracy;
        if (protocol == Protocol::WithinUser) ur.repeat_accuracies.push_back(f.accuracy);
        r.confusion.add(f.confusion);
        r.folds.push_back(std::move(f));
      }
      ur.accuracy = sum / static_cast<double>(outcomes[u].size());
      r.units.push_back(std::move(ur));
    }
    if (r.units.empty()) throw std::invalid_argument("evaluation produced no results");
    std::vector<double> acc;
    for (const auto& u : r.units) acc.push_back(u.accuracy);
    if (acc.size() >= 2) {
      const MeanCi ci = mean_ci95(acc);
      r.mean_accuracy = ci.mean;
      r.ci_lo = std::max(0.0, ci.lo);
      r.ci_hi = std::min(1.0, ci.hi);
      r.ci_lo = std::min(r.ci_lo, r.mean_accuracy);
      r.ci_hi = std::max(r.ci_hi, r.mean_accuracy);
    } else {
      r.mean_accuracy = r.ci_lo = r.ci_hi = acc.front();
      warnings.push_back("a single evaluation unit; confidence interval has zero width");
    }
  }
  // Paired comparisons of the primary strategy against each alternative.
  const int m = static_cast<int>(strategies.size()) - 1;
  for (int k = 1; k <= m; ++k) {
    Comparison c;
    c.a = std::string(to_string(strategies[0]));
    c.b = std::string(to_string(strategies[static_cast<std::size_t>(k)]));
    c.mean_b = reports[static_cast<std::size_t>(k)].mean_accuracy;
    c.alpha_adjusted = bonferroni(0.05, m);
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& u : reports[0].units) a.push_back(u.accuracy);
    for (const auto& u : reports[static_cast<std::size_t>(k)].units) b.push_back(u.accuracy);
    if (a.size() >= 2) {
      const TTestResult t = paired_ttest(a, b);
      c.t = t.t;
      c.p = t.p_two_sided;
      c.df = t.df;
      c.degenerate = t.degenerate;
      c.significant = c.p < c.alpha_adjusted;
    } else {
      warnings.push_back("comparison " + c.a + " vs " + c.b + " skipped: fewer than 2 units");
    }
    reports[0].comparisons.push_back(c);
  }
  for (auto& r : reports) r.warnings = warnings;
  return reports;
}

std::vector<std::string> table_warnings(const FeatureTable& t) { return t.warnings; }

}  // namespace

double Confusion::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

void Confusion::add(const Confusion& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
}

void assert_no_leakage(std::span<const FitRecord> fits, std::span<const std::string> test_ids) {
  for (const auto& f : fits) {
    for (const auto& id : test_ids) {
      if (f.epoch_ids.count(id) > 0) {
        throw LeakageError("leakage guard: transform '" + f.transform + "' was fit on test epoch " + id);
      }
    }
  }
}

FoldOutcome run_fold(const FeatureTable& table, std::span<const std::size_t> train_rows,
                     std::span<const std::size_t> test_rows, const PipelineConfig& config,
                     std::span<const FusionStrategy> strategies, std::uint64_t seed) {
  if (train_rows.empty() || test_rows.empty()) throw std::invalid_argument("run_fold: empty split");
  FoldOutcome out;
  std::vector<std::size_t> fit_rows(train_rows.begin(), train_rows.end());
  if (config.eval.inject_leakage) fit_rows.push_back(test_rows.front());

  const bool eeg_used = uses_eeg(strategies);
  const bool gaze_used = uses_gaze(strategies);
  EegBlock eeg;
  GazeBlock gaze;
  if (eeg_used) eeg = fit_eeg(table, fit_rows, train_rows, test_rows, config, out.fits);
  if (gaze_used) {
    const auto gaze_fit = eeg_used ? std::span<const std::size_t>(train_rows) : std::span<const std::size_t>(fit_rows);
    gaze = fit_gaze(table, gaze_fit, train_rows, test_rows, config, out.fits);
  }
  std::vector<std::string> test_ids;
  for (auto r : test_rows) test_ids.push_back(table.epochs[r].id);
  assert_no_leakage(out.fits, test_ids);

  std::vector<int> y_train;
  for (auto r : train_rows) y_train.push_back(table.epochs[r].label);
  const ModelSpec spec = config.model.spec();
  for (FusionStrategy s : strategies) {
    const FusionModel model = train_fusion(eeg.train, gaze.train, y_train, s, spec,
                                           derive_seed(seed, 100 + static_cast<std::uint64_t>(s)));
    out.warnings.insert(out.warnings.end(), model.warnings.begin(), model.warnings.end());
    const FusionPrediction pred = predict_fusion(model, eeg.test, gaze.test);
    FoldRecord rec;
    rec.n_train = train_rows.size();
    rec.n_test = test_rows.size();
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const int truth = table.epochs[test_rows[i]].label;
      const int p = pred.labels[i];
      if (p == 1 && truth == 1) ++rec.confusion.tp;
      else if (p == 0 && truth == 0) ++rec.confusion.tn;
      else if (p == 1) ++rec.confusion.fp;
      else ++rec.confusion.fn;
    }
    rec.accuracy = rec.confusion.accuracy();
    rec.eeg_dim = s == FusionStrategy::GazeOnly ? 0 : eeg.train.cols();
    if (s != FusionStrategy::EegOnly) rec.gaze_selected = gaze.selected;
    out.per_strategy.push_back(std::move(rec));
  }
  return out;
}

std::vector<EvalReport> louo_evaluate(const FeatureTable& table, const PipelineConfig& config,
                                      std::span<const FusionStrategy> strategies, std::uint64_t seed) {
  if (strategies.empty()) throw std::invalid_argument("louo_evaluate: no strategy");
  const auto users = table.users();
  if (users.size() < 2) throw std::invalid_argument("louo_evaluate: need at least 2 users");
  std::vector<std::vector<FoldOutcome>> outcomes(users.size());
  parallel_for(users.size(), [&](std::size_t u) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < table.rows(); ++i) {
      (table.epochs[i].user_id == users[u] ? test : train).push_back(i);
    }
    outcomes[u].push_back(run_fold(table, train, test, config, strategies, derive_seed(seed, u)));
    for (auto& f : outcomes[u].back().per_strategy) f.unit = users[u];
  });
  std::vector<std::string> warnings = table_warnings(table);
  for (const auto& o : outcomes) {
    for (const auto& f : o) warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  const std::vector<std::vector<int>> repeat_ids(users.size(), std::vector<int>{0});
  return assemble(Protocol::Louo, table.window_s, strategies, users, outcomes, repeat_ids,
                  table.rows(), std::move(warnings));
}

std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_split(
    std::span<const std::size_t> rows, std::span<const int> labels, double test_fraction,
    std::uint64_t seed) {
  Rng rng(seed);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (labels[i] == cls) members.push_back(rows[i]);
    }
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(members.size())));
    if (n_test < 1 || n_test >= members.size()) return std::nullopt;
    rng.shuffle(members);
    split.second.insert(split.second.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.first.insert(split.first.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.first.begin(), split.first.end());
  std::sort(split.second.begin(), split.second.end());
  return split;
}

std::vector<EvalReport> within_user_evaluate(const FeatureTable& table, const PipelineConfig& config,
                                             std::span<const FusionStrategy> strategies,
                                             int n_repeats, double test_fraction, std::uint64_t seed) {
  if (strategies.empty()) throw std::invalid_argument("within_user_evaluate: no strategy");
  if (n_repeats < 1) throw std::invalid_argument("within_user_evaluate: n_repeats must be >= 1");
  const auto users = table.users();
  std::vector<std::string> warnings = table_warnings(table);
  struct Job {
    std::size_t user;
    int repeat;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<std::size_t>> user_rows(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    user_rows[u] = table.rows_of(users[u]);
    if (user_rows[u].size() < 10) {
      warnings.push_back("user " + users[u] + " excluded: fewer than 10 epochs");
      continue;
    }
    for (int r = 0; r < n_repeats; ++r) jobs.push_back({u, r});
  }
  std::vector<std::optional<FoldOutcome>> results(jobs.size());
  std::vector<std::string> skipped(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto [u, r] = jobs[j];
    const auto& rows = user_rows[u];
    std::vector<int> labels;
    for (auto i : rows) labels.push_back(table.epochs[i].label);
    const auto split_seed = derive_seed(derive_seed(seed, u), static_cast<std::uint64_t>(r));
    const auto split = stratified_split(rows, labels, test_fraction, split_seed);
    if (!split) {
      skipped[j] = "user " + users[u] + " repeat " + std::to_string(r) + " skipped: stratification impossible";
      return;
    }
    results[j] = run_fold(table, split->first, split->second, config, strategies,
                          derive_seed(split_seed, 1));
    for (auto& f : results[j]->per_strategy) f.unit = users[u];
  });
  std::vector<std::vector<FoldOutcome>> outcomes(users.size());
  std::vector<std::vector<int>> repeat_ids(users.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!skipped[j].empty()) warnings.push_back(skipped[j]);
    if (!results[j]) continue;
    warnings.insert(warnings.end(), results[j]->warnings.begin(), results[j]->warnings.end());
    outcomes[jobs[j].user].push_back(std::move(*results[j]));
    repeat_ids[jobs[j].user].push_back(jobs[j].repeat);
  }
  return assemble(Protocol::WithinUser, table.window_s, strategies, users, outcomes, repeat_ids,
                  table.rows(), std::move(warnings));
}

std::vector<std::vector<EvalReport>> windowed_evaluate(std::span<const FeatureTable> tables,
                                                       const PipelineConfig& config,
                                                       std::span<const FusionStrategy> strategies,
                                                       Protocol protocol, std::uint64_t seed) {
  if (protocol == Protocol::Windowed) throw std::invalid_argument("windowed_evaluate: nested protocol");
  if (tables.empty()) throw std::invalid_argument("windowed_evaluate: no window tables");
  for (const auto& t : tables) {
    if (t.rows() == 0) throw std::invalid_argument("windowed_evaluate: empty sample set after exclusion");
    if (t.rows() != tables.front().rows()) throw std::logic_error("windowed_evaluate: epoch sets differ");
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (t.epochs[i].id != tables.front().epochs[i].id) {
        throw std::logic_error("windowed_evaluate: epoch sets differ");
      }
    }
  }
  std::vector<std::vector<EvalReport>> out;
  for (const auto& t : tables) {
    if (protocol == Protocol::Louo) {
      out.push_back(louo_evaluate(t, config, strategies, seed));
    } else {
      out.push_back(within_user_evaluate(t, config, strategies, config.eval.repeats,
                                         config.eval.test_fraction, seed));
    }
    for (auto& r : out.back()) r.protocol = Protocol::Windowed;
  }
  return out;
}

FeatureOptions feature_options(const PipelineConfig& config) {
  std::vector<FusionStrategy> strategies{config.strategy};
  strategies.insert(strategies.end(), config.compare.begin(), config.compare.end());
  FeatureOptions o;
  o.ivt = config.ivt;
  o.eeg_preproc = config.eeg_preproc;
  o.slice = config.epoching;
  o.eeg = config.eeg_features;
  const bool eeg = uses_eeg(strategies);
  o.pyeeg = eeg && config.eeg_method == EegMethod::Pyeeg;
  o.covariance = eeg && config.eeg_method == EegMethod::Csp;
  if (config.eval.protocol == Protocol::Windowed) {
    o.windows = config.eval.windows;
    o.min_search_s = *std::max_element(o.windows.begin(), o.windows.end());
  }
  return o;
}

EvalRun run_evaluation(const PipelineConfig& config, const Manifest& manifest,
                       const UserSource& source) {
  config.validate();
  try {
    config.eeg_preproc.filter.validate(manifest.eeg_fs_hz);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " (sampling rate " + std::to_string(manifest.eeg_fs_hz) + " Hz)");
  }
  EvalRun run;
  run.config_echo = config_to_json(config);
  FeatureBuild build = build_feature_tables(manifest, source, feature_options(config));
  run.load_reports = std::move(build.load_reports);
  run.excluded_users = std::move(build.excluded_users);
  run.warnings = std::move(build.warnings);
  for (const auto& t : build.tables) {
    if (t.rows() == 0) throw DataError("no valid epochs remain after loading and exclusion");
  }
  std::vector<FusionStrategy> strategies{config.strategy};
  strategies.insert(strategies.end(), config.compare.begin(), config.compare.end());
  const auto seed = config.eval.seed;
  switch (config.eval.protocol) {
    case Protocol::Louo:
      run.reports.push_back(louo_evaluate(build.tables.front(), config, strategies, seed).front());
      break;
    case Protocol::WithinUser:
      run.reports.push_back(within_user_evaluate(build.tables.front(), config, strategies,
                                                 config.eval.repeats, config.eval.test_fraction, seed)
                                .front());
      break;
    case Protocol::Windowed:
      for (auto& per_window : windowed_evaluate(build.tables, config, strategies,
                                                config.eval.window_protocol, seed)) {
        run.reports.push_back(std::move(per_window.front()));
      }
      break;
  }
  return run;
}

EvalRun run_evaluation(const PipelineConfig& config) {
  if (config.dataset.empty()) throw ConfigError("dataset: required");
  config.validate();
  const DatasetReader reader(config.dataset);
  return run_evaluation(config, reader.manifest(), reader_source(reader));
}

}  // namespace intent
