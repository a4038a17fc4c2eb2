#ifndef STREAMSYNC_STATS_HPP_
#define STREAMSYNC_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace streamsync {

struct SummaryStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stdev = 0.0;  // sample stdev (n-1), 0 for a single sample
  std::size_t count = 0;
};

inline SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  SummaryStats s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(sq / static_cast<double>(s.count - 1));
  }
  return s;
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(lo, hi).
inline double ks_uniform_statistic(std::vector<double> samples, double lo, double hi) {
  if (samples.empty()) throw std::invalid_argument("ks_uniform_statistic: empty input");
  if (!(hi > lo)) throw std::invalid_argument("ks_uniform_statistic: hi must exceed lo");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double cdf = (samples[i] - lo) / (hi - lo);
    cdf = std::clamp(cdf, 0.0, 1.0);
    const double lo_step = static_cast<double>(i) / n;
    const double hi_step = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(hi_step - cdf, cdf - lo_step));
  }
  return d;
}

// Fixed-width histogram; bins are [origin + i*width, origin + (i+1)*width).
struct Histogram {
  double origin = 0.0;
  double bin_width = 1.0;
  std::vector<std::int64_t> counts;

  static Histogram build(std::span<const double> values, double bin_width) {
    if (values.empty()) throw std::invalid_argument("Histogram: empty input");
    if (!(bin_width > 0.0)) throw std::invalid_argument("Histogram: bin_width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    h.origin = std::floor(lo / bin_width) * bin_width;
    const auto nbins = static_cast<std::size_t>(std::floor((hi - h.origin) / bin_width)) + 1;
    h.counts.assign(nbins, 0);
    for (double v : values) {
      auto idx = static_cast<std::size_t>(std::floor((v - h.origin) / bin_width));
      if (idx >= h.counts.size()) idx = h.counts.size() - 1;
      ++h.counts[idx];
    }
    return h;
  }
};

}  // namespace streamsync

#endif  // STREAMSYNC_STATS_HPP_
