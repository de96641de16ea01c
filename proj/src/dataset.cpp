#include "intent/dataset.hpp"

#include "csv_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace intent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kGazeHeader = "t,lx,ly,rx,ry,lvalid,rvalid,eye_dist_mm";
constexpr std::string_view kEventsHeader =
    "trial_id,target_tool,nav_start,nav_end,cue_start,cue_end,search_start,search_found";

void check_malformed_ratio(std::size_t malformed, std::size_t rows, const fs::path& file) {
  if (rows > 0 && malformed * 2 > rows) {
    throw DataError(file.string() + ": " + std::to_string(malformed) + " of " +
                    std::to_string(rows) + " rows malformed");
  }
}

EegRecording read_eeg_csv(const fs::path& file, const Manifest& manifest, UserLoadReport& report) {
  const std::string text = csv::read_file(file);
  const std::size_t n_ch = manifest.channel_names.size();

  std::vector<double> values;  // time-major rows of n_ch values
  std::vector<long> indices;
  std::vector<std::string_view> fields;
  bool header_seen = false;
  std::size_t rows = 0;
  std::size_t malformed = 0;
  double t0 = 0.0;
  long last_index = -1;

  std::vector<double> row(n_ch);
  csv::for_each_line(text, [&](std::string_view line) {
    if (!header_seen) {
      header_seen = true;
      csv::split(line, fields);
      bool ok = fields.size() == n_ch + 1 && fields[0] == "t";
      for (std::size_t c = 0; ok && c < n_ch; ++c) ok = fields[c + 1] == manifest.channel_names[c];
      if (!ok) throw DataError(file.string() + ": header does not match manifest channel_names");
      return;
    }
    if (line.empty()) return;
    ++rows;
    csv::split(line, fields);
    double t = 0.0;
    bool ok = fields.size() == n_ch + 1 && csv::parse_double(fields[0], t);
    for (std::size_t c = 0; ok && c < n_ch; ++c) ok = csv::parse_double(fields[c + 1], row[c]);
    if (ok) {
      if (indices.empty()) t0 = t;
      const long idx = std::lround((t - t0) * manifest.eeg_fs_hz);
      ok = idx > last_index;
      if (ok) {
        last_index = idx;
        indices.push_back(idx);
        values.insert(values.end(), row.begin(), row.end());
      }
    }
    if (!ok) ++malformed;
  });
  if (!header_seen) throw DataError(file.string() + ": empty file");
  check_malformed_ratio(malformed, rows, file);
  if (indices.empty()) throw DataError(file.string() + ": no EEG samples");
  report.skipped_rows += malformed;

  EegRecording eeg;
  eeg.channel_names = manifest.channel_names;
  eeg.fs_hz = manifest.eeg_fs_hz;
  eeg.t0 = t0;
  const auto n_samples = static_cast<Eigen::Index>(last_index + 1);
  eeg.samples.resize(static_cast<Eigen::Index>(n_ch), n_samples);
  std::size_t held = 0;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    if (k + 1 < indices.size() && indices[k + 1] <= i) ++k;
    if (indices[k] != i) ++held;
    const double* src = values.data() + k * n_ch;
    for (std::size_t c = 0; c < n_ch; ++c) eeg.samples(static_cast<Eigen::Index>(c), i) = src[c];
  }
  if (held > 0) {
    report.warnings.push_back(file.string() + ": " + std::to_string(held) +
                              " missing EEG samples filled by sample-and-hold");
  }
  return eeg;
}

bool parse_flag(std::string_view s, bool& out) {
  if (s == "1") {
    out = true;
    return true;
  }
  if (s == "0") {
    out = false;
    return true;
  }
  return false;
}

bool parse_eye(std::string_view xs, std::string_view ys, bool& valid, Point2& p) {
  if (!valid) return true;  // coordinates of an invalid eye are never read
  if (!csv::parse_double(xs, p.x) || !csv::parse_double(ys, p.y)) return false;
  constexpr double lo = -0.2;
  constexpr double hi = 1.2;
  if (p.x < lo || p.x > hi || p.y < lo || p.y > hi) valid = false;
  return true;
}

std::vector<GazeSample> read_gaze_csv(const fs::path& file, UserLoadReport& report) {
  const std::string text = csv::read_file(file);
  std::vector<GazeSample> out;
  std::vector<std::string_view> fields;
  bool header_seen = false;
  std::size_t rows = 0;
  std::size_t malformed = 0;
  csv::for_each_line(text, [&](std::string_view line) {
    if (!header_seen) {
      header_seen = true;
      if (line != kGazeHeader) throw DataError(file.string() + ": unexpected gaze header");
      return;
    }
    if (line.empty()) return;
    ++rows;
    csv::split(line, fields);
    GazeSample s;
    bool ok = fields.size() == 8 && csv::parse_double(fields[0], s.t) &&
              parse_flag(fields[5], s.left_valid) && parse_flag(fields[6], s.right_valid);
    ok = ok && parse_eye(fields[1], fields[2], s.left_valid, s.left) &&
         parse_eye(fields[3], fields[4], s.right_valid, s.right);
    if (ok && (s.left_valid || s.right_valid)) {
      ok = csv::parse_double(fields[7], s.eye_distance_mm) && s.eye_distance_mm > 0.0;
    }
    if (ok && !out.empty()) ok = s.t > out.back().t;
    if (ok) {
      out.push_back(s);
    } else {
      ++malformed;
    }
  });
  if (!header_seen) throw DataError(file.string() + ": empty file");
  check_malformed_ratio(malformed, rows, file);
  if (out.empty()) throw DataError(file.string() + ": no gaze samples");
  report.skipped_rows += malformed;
  return out;
}

std::vector<TrialEvents> read_events_csv(const fs::path& file, const std::string& user_id,
                                         UserLoadReport& report) {
  const std::string text = csv::read_file(file);
  std::vector<TrialEvents> out;
  std::vector<std::string_view> fields;
  bool header_seen = false;
  std::size_t rows = 0;
  std::size_t malformed = 0;
  csv::for_each_line(text, [&](std::string_view line) {
    if (!header_seen) {
      header_seen = true;
      if (line != kEventsHeader) throw DataError(file.string() + ": unexpected events header");
      return;
    }
    if (line.empty()) return;
    ++rows;
    csv::split(line, fields);
    TrialEvents ev;
    ev.user_id = user_id;
    bool ok = fields.size() == 8 && csv::parse_int(fields[0], ev.trial_id);
    if (ok) {
      const auto tool = parse_tool(fields[1]);
      ok = tool.has_value();
      if (ok) ev.target_tool = *tool;
    }
    ok = ok && csv::parse_double(fields[2], ev.nav_start) &&
         csv::parse_double(fields[3], ev.nav_end) && csv::parse_double(fields[4], ev.cue_start) &&
         csv::parse_double(fields[5], ev.cue_end) &&
         csv::parse_double(fields[6], ev.search_start) &&
         csv::parse_double(fields[7], ev.search_found);
    if (ok) {
      out.push_back(ev);
    } else {
      ++malformed;
    }
  });
  if (!header_seen) throw DataError(file.string() + ": empty file");
  check_malformed_ratio(malformed, rows, file);
  report.skipped_rows += malformed;
  return out;
}

}  // namespace

fs::path user_dir(const fs::path& root, const std::string& user_id) {
  return root / ("user_" + user_id);
}

Manifest read_manifest(const fs::path& root) {
  const fs::path file = root / "manifest.json";
  if (!fs::exists(file)) throw DataError("missing manifest: " + file.string());
  json j;
  try {
    std::ifstream in(file);
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("invalid manifest " + file.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.users = j.at("users").get<std::vector<std::string>>();
    m.eeg_fs_hz = j.at("eeg_fs_hz").get<double>();
    m.gaze_fs_hz = j.at("gaze_fs_hz").get<double>();
    m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    const json& s = j.at("screen");
    m.screen.width_px = s.at("width_px").get<int>();
    m.screen.height_px = s.at("height_px").get<int>();
    m.screen.width_mm = s.at("width_mm").get<double>();
    m.screen.height_mm = s.at("height_mm").get<double>();
    m.screen.viewer_distance_mm = s.at("viewer_distance_mm").get<double>();
  } catch (const json::exception& e) {
    throw DataError("invalid manifest " + file.string() + ": " + e.what());
  }
  if (m.users.empty()) throw DataError("manifest lists no users");
  if (std::set<std::string>(m.users.begin(), m.users.end()).size() != m.users.size()) {
    throw DataError("manifest lists duplicate users");
  }
  if (m.channel_names.empty()) throw DataError("manifest lists no channels");
  if (!(m.eeg_fs_hz > 0.0) || !(m.gaze_fs_hz > 0.0)) {
    throw DataError("manifest sampling rates must be positive");
  }
  m.screen.validate();
  return m;
}

void write_manifest(const fs::path& root, const Manifest& m) {
  json j;
  j["users"] = m.users;
  j["eeg_fs_hz"] = m.eeg_fs_hz;
  j["gaze_fs_hz"] = m.gaze_fs_hz;
  j["channel_names"] = m.channel_names;
  j["screen"] = {{"width_px", m.screen.width_px},
                 {"height_px", m.screen.height_px},
                 {"width_mm", m.screen.width_mm},
                 {"height_mm", m.screen.height_mm},
                 {"viewer_distance_mm", m.screen.viewer_distance_mm}};
  fs::create_directories(root);
  std::ofstream out(root / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (root / "manifest.json").string());
  out << j.dump(2) << '\n';
}

DatasetReader::DatasetReader(fs::path root) : root_(std::move(root)), manifest_(read_manifest(root_)) {}

std::optional<UserRecording> DatasetReader::read_user(const std::string& user_id,
                                                      UserLoadReport& report) const {
  report = UserLoadReport{};
  report.user_id = user_id;
  const fs::path dir = user_dir(root_, user_id);
  UserRecording user;
  user.user_id = user_id;
  try {
    user.eeg = read_eeg_csv(dir / "eeg.csv", manifest_, report);
    user.gaze = read_gaze_csv(dir / "gaze.csv", report);
    user.trials = read_events_csv(dir / "events.csv", user_id, report);
  } catch (const DataError& e) {
    report.failed = true;
    report.failure = e.what();
    return std::nullopt;
  }
  validate_trials(user, report);
  return user;
}

void validate_trials(UserRecording& user, UserLoadReport& report) {
  report.trials_read = user.trials.size();
  const double eeg_lo = user.eeg.t0;
  const double eeg_hi = user.eeg.t_end();
  const double gaze_lo = user.gaze.empty() ? 0.0 : user.gaze.front().t;
  const double gaze_hi = user.gaze.empty() ? -1.0 : user.gaze.back().t;
  std::set<int> seen;
  std::vector<TrialEvents> kept;
  kept.reserve(user.trials.size());
  for (auto& ev : user.trials) {
    std::optional<std::string> why = ev.violation();
    if (!why && (ev.nav_start < eeg_lo || ev.search_found > eeg_hi)) {
      why = "outside EEG time range";
    }
    if (!why && (ev.nav_start < gaze_lo || ev.search_found > gaze_hi)) {
      why = "outside gaze time range";
    }
    if (!why && !seen.insert(ev.trial_id).second) why = "duplicate trial_id";
    if (why) {
      ++report.dropped_trials;
      report.drop_reasons.push_back("trial " + std::to_string(ev.trial_id) + ": " + *why);
    } else {
      kept.push_back(std::move(ev));
    }
  }
  user.trials = std::move(kept);
}

Dataset load_dataset(const fs::path& root) {
  DatasetReader reader(root);
  Dataset ds;
  ds.manifest = reader.manifest();
  for (const auto& id : reader.manifest().users) {
    UserLoadReport report;
    auto user = reader.read_user(id, report);
    if (user) ds.users.push_back(std::move(*user));
    ds.load_report.push_back(std::move(report));
  }
  return ds;
}

void write_eeg_csv(const fs::path& file, const EegRecording& eeg) {
  std::string out;
  out.reserve(eeg.n_samples() * (eeg.n_channels() * 9 + 12) + 64);
  out += 't';
  for (const auto& name : eeg.channel_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (Eigen::Index i = 0; i < eeg.samples.cols(); ++i) {
    csv::append_fixed(out, eeg.t0 + static_cast<double>(i) / eeg.fs_hz, 6);
    for (Eigen::Index c = 0; c < eeg.samples.rows(); ++c) {
      out += ',';
      csv::append_fixed(out, eeg.samples(c, i), 3);
    }
    out += '\n';
  }
  csv::write_file(file, out);
}

void write_gaze_csv(const fs::path& file, const std::vector<GazeSample>& gaze) {
  std::string out;
  out.reserve(gaze.size() * 64 + 64);
  out += kGazeHeader;
  out += '\n';
  for (const auto& s : gaze) {
    csv::append_fixed(out, s.t, 6);
    out += ',';
    if (s.left_valid) {
      csv::append_fixed(out, s.left.x, 5);
      out += ',';
      csv::append_fixed(out, s.left.y, 5);
    } else {
      out += ',';
    }
    out += ',';
    if (s.right_valid) {
      csv::append_fixed(out, s.right.x, 5);
      out += ',';
      csv::append_fixed(out, s.right.y, 5);
    } else {
      out += ',';
    }
    out += s.left_valid ? ",1" : ",0";
    out += s.right_valid ? ",1," : ",0,";
    if (s.left_valid || s.right_valid) csv::append_fixed(out, s.eye_distance_mm, 2);
    out += '\n';
  }
  csv::write_file(file, out);
}

void write_events_csv(const fs::path& file, const std::vector<TrialEvents>& trials) {
  std::string out(kEventsHeader);
  out += '\n';
  for (const auto& ev : trials) {
    out += std::to_string(ev.trial_id);
    out += ',';
    out += to_string(ev.target_tool);
    for (double t : {ev.nav_start, ev.nav_end, ev.cue_start, ev.cue_end, ev.search_start,
                     ev.search_found}) {
      out += ',';
      csv::append_fixed(out, t, 6);
    }
    out += '\n';
  }
  csv::write_file(file, out);
}

void write_user(const fs::path& root, const UserRecording& user) {
  const fs::path dir = user_dir(root, user.user_id);
  fs::create_directories(dir);
  write_eeg_csv(dir / "eeg.csv", user.eeg);
  write_gaze_csv(dir / "gaze.csv", user.gaze);
  write_events_csv(dir / "events.csv", user.trials);
}

void adapt_published_layout(const fs::path& source, const fs::path& destination,
                            const AdapterOptions& options) {
  DatasetReader reader(source);
  write_manifest(destination, reader.manifest());
  for (const auto& id : reader.manifest().users) {
    UserLoadReport report;
    auto user = reader.read_user(id, report);
    if (!user) throw DataError("cannot adapt user " + id + ": " + report.failure);
    for (auto& s : user->gaze) {
      for (Point2* p : {&s.left, &s.right}) {
        if (options.flip_x) p->x = 1.0 - p->x;
        if (options.flip_y) p->y = 1.0 - p->y;
      }
    }
    write_user(destination, *user);
  }
}

}  // namespace intent
