#include "intent/feature_table.hpp"

#include "intent/gaze_features.hpp"
#include "intent/montage.hpp"
#include "intent/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace intent {

namespace {

struct UserRows {
  std::vector<FeatureTable> tables;
  UserLoadReport report;
  bool usable = false;
  std::vector<std::string> warnings;
};

void append_epoch(FeatureTable& t, const Epoch& e, const FeatureOptions& o,
                  std::vector<std::vector<double>>& pyeeg_rows,
                  std::vector<std::vector<double>>& gaze_rows, std::size_t& no_fixations,
                  std::size_t& flat_channels) {
  EpochInfo info;
  info.id = e.id();
  info.user_id = e.user_id;
  info.trial_id = e.trial_id;
  info.intent = e.intent;
  info.tool = e.target_tool;
  info.label = label_of(e.intent);
  info.duration_s = e.duration_s;
  info.search_duration_s = e.search_duration_s;
  t.epochs.push_back(std::move(info));
  if (o.pyeeg) {
    FeatureVector fv = pyeeg_vector(e, t.channels, o.eeg);
    flat_channels += fv.warnings.size();
    pyeeg_rows.push_back(std::move(fv.values));
  }
  if (o.covariance) t.covariances.push_back(channel_covariance(e.eeg));
  FeatureVector g = gaze_features(e.fixations, e.duration_s);
  if (!g.warnings.empty()) ++no_fixations;
  gaze_rows.push_back(std::move(g.values));
}

Eigen::MatrixXd stack(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

UserRows process_user(const std::string& id, const Manifest& manifest, const UserSource& source,
                      const FeatureOptions& o) {
  UserRows out;
  std::optional<UserRecording> user = source(id, out.report);
  if (!user) return out;
  UserEpochs ue;
  try {
    ue = prepare_user_epochs(*user, manifest, o);
  } catch (const DataError& e) {
    out.report.failed = true;
    out.report.failure = e.what();
    return out;
  }
  user.reset();
  for (const auto& why : ue.slices.excluded) out.report.drop_reasons.push_back(why);
  if (!ue.bad_channels.empty()) {
    out.warnings.push_back("user " + id + ": " + std::to_string(ue.bad_channels.size()) +
                           " bad EEG channel(s) interpolated");
  }

  const std::size_t n_tables = o.windows.empty() ? 1 : o.windows.size();
  const double max_window = o.windows.empty() ? 0.0 : *std::max_element(o.windows.begin(), o.windows.end());
  std::vector<const EpochPair*> kept;
  std::size_t short_search = 0;
  for (const auto& p : ue.slices.pairs) {
    const double search = p.informational.search_duration_s;
    if (search < o.min_search_s || p.navigational.duration_s < max_window) {
      ++short_search;
      continue;
    }
    kept.push_back(&p);
  }
  if (short_search > 0) {
    out.warnings.push_back("user " + id + ": " + std::to_string(short_search) +
                           " trial(s) excluded by the minimum search duration");
  }

  out.tables.resize(n_tables);
  for (std::size_t w = 0; w < n_tables; ++w) {
    FeatureTable& t = out.tables[w];
    t.channels = manifest.channel_names;
    if (!o.windows.empty()) t.window_s = o.windows[w];
    std::vector<std::vector<double>> pyeeg_rows;
    std::vector<std::vector<double>> gaze_rows;
    std::size_t no_fix = 0;
    std::size_t flat = 0;
    for (const EpochPair* p : kept) {
      for (const Epoch* e : {&p->navigational, &p->informational}) {
        if (t.window_s) {
          append_epoch(t, window_epoch(*e, *t.window_s), o, pyeeg_rows, gaze_rows, no_fix, flat);
        } else {
          append_epoch(t, *e, o, pyeeg_rows, gaze_rows, no_fix, flat);
        }
      }
    }
    if (o.pyeeg) t.pyeeg = stack(pyeeg_rows, t.channels.size() * kFeaturesPerChannel);
    t.gaze = stack(gaze_rows, kGazeFeatureCount);
    if (no_fix > 0) {
      t.warnings.push_back("user " + id + ": " + std::to_string(no_fix) +
                           " epoch(s) without fixations; gaze features set to 0");
    }
    if (flat > 0) {
      t.warnings.push_back("user " + id + ": " + std::to_string(flat) +
                           " zero-variance channel epoch(s); Hjorth parameters set to 0");
    }
  }
  out.usable = !kept.empty();
  return out;
}

void append_table(FeatureTable& dst, FeatureTable&& src) {
  if (dst.channels.empty()) dst.channels = src.channels;
  dst.window_s = src.window_s;
  const auto old = static_cast<Eigen::Index>(dst.rows());
  const auto add = static_cast<Eigen::Index>(src.rows());
  dst.epochs.insert(dst.epochs.end(), std::make_move_iterator(src.epochs.begin()),
                    std::make_move_iterator(src.epochs.end()));
  if (src.pyeeg.size() > 0 || (src.pyeeg.cols() > 0)) {
    dst.pyeeg.conservativeResize(old + add, src.pyeeg.cols());
    dst.pyeeg.bottomRows(add) = src.pyeeg;
  }
  dst.gaze.conservativeResize(old + add, static_cast<Eigen::Index>(kGazeFeatureCount));
  dst.gaze.bottomRows(add) = src.gaze;
  dst.covariances.insert(dst.covariances.end(), std::make_move_iterator(src.covariances.begin()),
                         std::make_move_iterator(src.covariances.end()));
  dst.warnings.insert(dst.warnings.end(), src.warnings.begin(), src.warnings.end());
}

}  // namespace

std::vector<int> FeatureTable::labels() const {
  std::vector<int> y;
  y.reserve(epochs.size());
  for (const auto& e : epochs) y.push_back(e.label);
  return y;
}

std::vector<std::string> FeatureTable::users() const {
  std::vector<std::string> u;
  for (const auto& e : epochs) {
    if (u.empty() || u.back() != e.user_id) {
      if (std::find(u.begin(), u.end(), e.user_id) == u.end()) u.push_back(e.user_id);
    }
  }
  return u;
}

std::vector<std::size_t> FeatureTable::rows_of(const std::string& user_id) const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    if (epochs[i].user_id == user_id) r.push_back(i);
  }
  return r;
}

UserSource reader_source(const DatasetReader& reader) {
  return [&reader](const std::string& id, UserLoadReport& report) { return reader.read_user(id, report); };
}

UserEpochs prepare_user_epochs(const UserRecording& user, const Manifest& manifest,
                               const FeatureOptions& options) {
  const std::vector<Fixation> fixations = detect_fixations(user.gaze, manifest.screen, options.ivt);
  const std::vector<Vec3> positions =
      montage_positions(user.eeg.channel_names, options.eeg_preproc.montage_file);
  PreprocessedEeg pre;
  try {
    pre = preprocess_eeg(user.eeg, positions, options.eeg_preproc);
  } catch (const std::invalid_argument& e) {
    throw DataError("user " + user.user_id + ": EEG preprocessing failed: " + e.what());
  }
  UserEpochs ue;
  ue.bad_channels = std::move(pre.bad_channels);
  ue.slices = slice_user(user, pre.eeg, fixations, options.slice);
  return ue;
}

FeatureBuild build_feature_tables(const Manifest& manifest, const UserSource& source,
                                  const FeatureOptions& options) {
  for (double w : options.windows) {
    if (!(w > 0.0)) throw std::invalid_argument("build_feature_tables: window sizes must be > 0");
  }
  const auto& users = manifest.users;
  std::vector<UserRows> per_user(users.size());
  parallel_for(users.size(), [&](std::size_t i) {
    per_user[i] = process_user(users[i], manifest, source, options);
  });

  FeatureBuild build;
  build.tables.resize(options.windows.empty() ? 1 : options.windows.size());
  for (auto& t : build.tables) t.channels = manifest.channel_names;
  for (std::size_t w = 0; w < options.windows.size(); ++w) build.tables[w].window_s = options.windows[w];
  for (std::size_t i = 0; i < users.size(); ++i) {
    UserRows& u = per_user[i];
    u.report.user_id = users[i];
    build.warnings.insert(build.warnings.end(), u.warnings.begin(), u.warnings.end());
    if (u.report.failed) {
      build.excluded_users.push_back(users[i]);
      build.warnings.push_back("user " + users[i] + " excluded: " + u.report.failure);
    } else if (!u.usable) {
      build.excluded_users.push_back(users[i]);
      build.warnings.push_back("user " + users[i] + " excluded: no valid epochs");
    } else {
      for (std::size_t w = 0; w < build.tables.size(); ++w) append_table(build.tables[w], std::move(u.tables[w]));
    }
    build.load_reports.push_back(std::move(u.report));
    u = UserRows{};
  }
  return build;
}

FeatureTable select_rows(const FeatureTable& table, std::span<const std::size_t> rows) {
  FeatureTable t;
  t.window_s = table.window_s;
  t.channels = table.channels;
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (table.pyeeg.cols() > 0) t.pyeeg.resize(n, table.pyeeg.cols());
  t.gaze.resize(n, table.gaze.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    const auto k = static_cast<Eigen::Index>(i);
    t.epochs.push_back(table.epochs.at(rows[i]));
    if (table.pyeeg.cols() > 0) t.pyeeg.row(k) = table.pyeeg.row(r);
    t.gaze.row(k) = table.gaze.row(r);
    if (!table.covariances.empty()) t.covariances.push_back(table.covariances[rows[i]]);
  }
  t.warnings = table.warnings;
  return t;
}

}  // namespace intent
