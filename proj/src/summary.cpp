#include "inkpark/summary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inkpark {

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty series");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, q);
}

SummarySet summarize(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("summarize: empty series");
  const double n = static_cast<double>(series.size());
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());

  SummarySet s;
  s.min = sorted.front();
  s.max = sorted.back();
  if (s.min == s.max) {
    s.mean = s.median = s.p1 = s.p99 = s.min;
    return s;
  }
  double sum = 0;
  for (double v : series) sum += v;
  s.mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : series) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  s.std = std::sqrt(m2);
  if (m2 > 0.0) {
    s.skewness = m3 / (m2 * s.std);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  s.median = percentile_sorted(sorted, 0.5);
  s.p1 = percentile_sorted(sorted, 0.01);
  s.p99 = percentile_sorted(sorted, 0.99);
  s.p_range = s.p99 - s.p1;
  return s;
}

}  // namespace inkpark
