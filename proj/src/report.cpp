#include "intent/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace intent {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
}

ordered_json report_object(const EvalReport& r) {
  ordered_json j;
  j["protocol"] = std::string(to_string(r.protocol));
  j["window_s"] = r.window_s ? ordered_json(*r.window_s) : ordered_json(nullptr);
  j["strategy"] = std::string(to_string(r.strategy));
  j["mean_accuracy"] = r.mean_accuracy;
  j["ci95"] = {{"lo", r.ci_lo}, {"hi", r.ci_hi}};
  j["n_epochs"] = r.n_epochs;
  j["confusion"] = confusion_json(r.confusion);
  ordered_json per_unit = ordered_json::object();
  for (const auto& u : r.units) per_unit[u.unit] = u.accuracy;
  j["per_unit_accuracies"] = per_unit;
  if (r.protocol != Protocol::Louo) {
    ordered_json reps = ordered_json::object();
    for (const auto& u : r.units) reps[u.unit] = u.repeat_accuracies;
    j["repeat_accuracies"] = reps;
  }
  ordered_json folds = ordered_json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"unit", f.unit},
                     {"repeat", f.repeat},
                     {"n_train", f.n_train},
                     {"n_test", f.n_test},
                     {"accuracy", f.accuracy},
                     {"confusion", confusion_json(f.confusion)},
                     {"eeg_dim", f.eeg_dim},
                     {"gaze_selected", f.gaze_selected}});
  }
  j["folds"] = folds;
  ordered_json cmp = ordered_json::array();
  for (const auto& c : r.comparisons) {
    cmp.push_back({{"pair", {c.a, c.b}},
                   {"mean_b", c.mean_b},
                   {"t", number_or_null(c.t)},
                   {"p", c.p},
                   {"df", c.df},
                   {"alpha_adjusted", c.alpha_adjusted},
                   {"significant", c.significant},
                   {"degenerate", c.degenerate}});
  }
  j["comparisons"] = cmp;
  j["warnings"] = collapse_warnings(r.warnings);
  return j;
}

std::string window_tag(double w) { return format_number(w) + "s"; }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> collapse_warnings(const std::vector<std::string>& warnings) {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> counts;
  for (const auto& w : warnings) {
    if (counts[w]++ == 0) order.push_back(w);
  }
  std::vector<std::string> out;
  for (const auto& w : order) {
    const auto n = counts[w];
    out.push_back(n == 1 ? w : w + " (x" + std::to_string(n) + ")");
  }
  return out;
}

std::string report_json(const EvalRun& run) {
  ordered_json j;
  j["format"] = "intent-sense-report";
  j["version"] = 1;
  j["config"] = ordered_json::parse(run.config_echo);
  ordered_json reports = ordered_json::array();
  for (const auto& r : run.reports) reports.push_back(report_object(r));
  j["reports"] = reports;
  ordered_json load = ordered_json::array();
  for (const auto& l : run.load_reports) {
    load.push_back({{"user_id", l.user_id},
                    {"trials_read", l.trials_read},
                    {"dropped_trials", l.dropped_trials},
                    {"drop_reasons", collapse_warnings(l.drop_reasons)},
                    {"skipped_rows", l.skipped_rows},
                    {"failed", l.failed},
                    {"failure", l.failure},
                    {"warnings", collapse_warnings(l.warnings)}});
  }
  j["load"] = load;
  j["excluded_users"] = run.excluded_users;
  j["warnings"] = collapse_warnings(run.warnings);
  return j.dump(2) + "\n";
}

std::string summary_csv(const EvalReport& report) {
  std::string s = "unit,accuracy\n";
  for (const auto& u : report.units) s += u.unit + "," + format_number(u.accuracy) + "\n";
  return s;
}

std::string windows_csv(const std::vector<EvalReport>& reports) {
  std::string s = "window_s,mean_accuracy,ci_lo,ci_hi,n_epochs\n";
  for (const auto& r : reports) {
    s += (r.window_s ? format_number(*r.window_s) : std::string("full")) + "," +
         format_number(r.mean_accuracy) + "," + format_number(r.ci_lo) + "," +
         format_number(r.ci_hi) + "," + std::to_string(r.n_epochs) + "\n";
  }
  return s;
}

std::string histogram_csv(const SearchTimeStats& stats) {
  std::string s = "bin_lo,bin_hi,count\n";
  for (const auto& b : stats.histogram) {
    s += format_number(b.lo) + "," + format_number(b.hi) + "," + std::to_string(b.count) + "\n";
  }
  return s;
}

std::string per_tool_csv(const SearchTimeStats& stats) {
  std::string s = "tool,count,mean,median,q1,q3\n";
  for (const auto& t : stats.per_tool) {
    s += std::string(to_string(t.tool)) + "," + std::to_string(t.count) + "," +
         format_number(t.mean) + "," + format_number(t.median) + "," + format_number(t.q1) + "," +
         format_number(t.q3) + "\n";
  }
  return s;
}

std::vector<ScanpathRow> scanpath_rows(const UserRecording& user, const std::vector<Fixation>& fixations) {
  std::vector<ScanpathRow> rows;
  auto trials = user.trials;
  std::sort(trials.begin(), trials.end(),
            [](const TrialEvents& a, const TrialEvents& b) { return a.trial_id < b.trial_id; });
  for (const auto& tr : trials) {
    const std::pair<Intent, std::pair<double, double>> phases[] = {
        {Intent::Navigational, {tr.nav_start, tr.nav_end}},
        {Intent::Informational, {tr.search_start, tr.search_found}}};
    for (const auto& [phase, span] : phases) {
      const std::size_t first = rows.size();
      for (const auto& f : fixations) {
        if (f.end_t > span.first && f.start_t < span.second) {
          rows.push_back({user.user_id, tr.trial_id, phase, f.start_t, f.centroid, f.duration_s});
        }
      }
      std::stable_sort(rows.begin() + static_cast<std::ptrdiff_t>(first), rows.end(),
                       [](const ScanpathRow& a, const ScanpathRow& b) { return a.t < b.t; });
    }
  }
  return rows;
}

std::string scanpath_csv(const std::vector<ScanpathRow>& rows) {
  std::string s = "user_id,trial_id,phase,t,x,y,duration_s\n";
  for (const auto& r : rows) {
    s += r.user_id + "," + std::to_string(r.trial_id) + "," +
         (r.phase == Intent::Navigational ? "nav" : "info") + "," + format_number(r.t) + "," +
         format_number(r.xy.x) + "," + format_number(r.xy.y) + "," + format_number(r.duration_s) + "\n";
  }
  return s;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + file.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + file.string());
}

std::vector<std::filesystem::path> write_run(const EvalRun& run, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  const auto put = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(dir / name);
  };
  put("report.json", report_json(run));
  if (run.reports.size() == 1 && !run.reports.front().window_s) {
    put("summary.csv", summary_csv(run.reports.front()));
  } else {
    for (const auto& r : run.reports) {
      put("summary_" + (r.window_s ? window_tag(*r.window_s) : std::string("full")) + ".csv", summary_csv(r));
    }
    put("windows.csv", windows_csv(run.reports));
  }
  return files;
}

}  // namespace intent
