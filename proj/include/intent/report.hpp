#pragma once

#include "intent/evaluation.hpp"
#include "intent/stats.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace intent {

// Shortest round-trip decimal form; identical across runs and platforms.
std::string format_number(double v);

// Identical warnings collapsed into "<text> (xN)", first-appearance order.
std::vector<std::string> collapse_warnings(const std::vector<std::string>& warnings);

// Self-describing run report with the effective configuration embedded as an object.
std::string report_json(const EvalRun& run);

// unit,accuracy
std::string summary_csv(const EvalReport& report);
// window_s,mean_accuracy,ci_lo,ci_hi,n_epochs
std::string windows_csv(const std::vector<EvalReport>& reports);

// bin_lo,bin_hi,count (the overflow bin has bin_hi "inf")
std::string histogram_csv(const SearchTimeStats& stats);
// tool,count,mean,median,q1,q3
std::string per_tool_csv(const SearchTimeStats& stats);

struct ScanpathRow {
  std::string user_id;
  int trial_id = 0;
  Intent phase = Intent::Navigational;
  double t = 0.0;  // fixation onset
  Point2 xy;
  double duration_s = 0.0;
};

// Fixations overlapping each trial's navigation and search phases, time-ordered per phase.
std::vector<ScanpathRow> scanpath_rows(const UserRecording& user, const std::vector<Fixation>& fixations);
// user_id,trial_id,phase,t,x,y,duration_s
std::string scanpath_csv(const std::vector<ScanpathRow>& rows);

void write_text(const std::filesystem::path& file, const std::string& text);

// Writes report.json plus summary CSVs into dir; returns the written files.
std::vector<std::filesystem::path> write_run(const EvalRun& run, const std::filesystem::path& dir);

}  // namespace intent
