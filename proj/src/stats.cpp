#include "intent/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace intent {

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_cdf: df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t(df), t);
}

double student_t_quantile(double p, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_quantile: df must be > 0");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("student_t_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::students_t(df), p);
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_ttest: samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTestResult r;
  r.df = static_cast<int>(a.size()) - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.t = mean * std::sqrt(n) / sd;
  // Upper tail of |t| keeps p identical when a and b are swapped.
  r.p_two_sided = std::min(1.0, 2.0 * student_t_cdf(-std::abs(r.t), r.df));
  return r;
}

double bonferroni(double alpha, int m) {
  if (m < 1) throw std::invalid_argument("bonferroni: m must be >= 1");
  return alpha / m;
}

MeanCi mean_ci95(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("mean_ci95: need at least 2 values");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return {values.front(), values.front(), values.front()};
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double half = student_t_quantile(0.975, n - 1.0) * sd / std::sqrt(n);
  return {mean, mean - half, mean + half};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SearchTimeStats search_time_stats(std::span<const TrialEvents> trials) {
  SearchTimeStats s;
  for (int b = 0; b < 6; ++b) s.histogram.push_back({double(b), double(b + 1), 0});
  s.histogram.push_back({6.0, std::numeric_limits<double>::infinity(), 0});
  std::vector<std::vector<double>> by_tool(std::size(kAllTools));
  for (const auto& ev : trials) {
    const double d = ev.search_duration();
    const auto bin = d >= 6.0 ? 6 : static_cast<int>(std::floor(std::max(d, 0.0)));
    ++s.histogram[static_cast<std::size_t>(bin)].count;
    by_tool[static_cast<std::size_t>(ev.target_tool)].push_back(d);
    ++s.n_trials;
  }
  for (Tool tool : kAllTools) {
    const auto& v = by_tool[static_cast<std::size_t>(tool)];
    ToolSummary t;
    t.tool = tool;
    t.count = v.size();
    if (!v.empty()) {
      t.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      t.median = quantile(v, 0.5);
      t.q1 = quantile(v, 0.25);
      t.q3 = quantile(v, 0.75);
    }
    s.per_tool.push_back(t);
  }
  return s;
}

}  // namespace intent
