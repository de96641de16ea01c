#pragma once

#include "intent/types.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace intent {

double student_t_cdf(double t, double df);
// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

struct TTestResult {
  double t = 0.0;
  double p_two_sided = 1.0;
  int df = 0;
  bool degenerate = false;  // zero spread of differences with non-zero mean
};

// Paired t-test on a - b. Throws std::invalid_argument unless sizes match and n >= 2.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// alpha / m. Throws std::invalid_argument for m < 1.
double bonferroni(double alpha, int m);

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// mean +- t_{0.975, n-1} * sd / sqrt(n). Throws std::invalid_argument for n < 2.
MeanCi mean_ci95(std::span<const double> values);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;  // +infinity for the overflow bin
  std::size_t count = 0;
};

struct ToolSummary {
  Tool tool = Tool::Hammer;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct SearchTimeStats {
  std::vector<HistogramBin> histogram;  // [0,1) ... [5,6), then [6, inf)
  std::vector<ToolSummary> per_tool;    // every tool, canonical order
  std::size_t n_trials = 0;
};

// Linear-interpolation quantile of a sample (q in [0, 1]).
double quantile(std::vector<double> values, double q);

SearchTimeStats search_time_stats(std::span<const TrialEvents> trials);

}  // namespace intent
