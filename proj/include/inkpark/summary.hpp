#pragma once

#include <span>
#include <vector>

namespace inkpark {

/// Distribution summary of one series. Moments are population (1/N) moments;
/// kurtosis is excess kurtosis. When the standard deviation is zero, skewness
/// and kurtosis are reported as 0.
struct SummarySet {
  double mean = 0;
  double median = 0;
  double variance = 0;
  double std = 0;
  double max = 0;
  double min = 0;
  double p1 = 0;
  double p99 = 0;
  double p_range = 0;  // p99 - p1
  double skewness = 0;
  double kurtosis = 0;
};

/// Percentile by linear interpolation between closest ranks at position
/// q * (N - 1) of the sorted data, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);
double percentile(std::span<const double> values, double q);

/// Throws std::invalid_argument on an empty series.
SummarySet summarize(std::span<const double> series);

}  // namespace inkpark
