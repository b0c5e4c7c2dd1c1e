#include "inkpark/emd.hpp"

#include <algorithm>
#include <cmath>

#include "inkpark/kinematics.hpp"

namespace inkpark {

Extrema find_extrema(std::span<const double> s) {
  Extrema e;
  const std::size_t n = s.size();
  if (n < 3) return e;
  // Walk runs of equal values; an interior run whose neighbours are both
  // lower (higher) is a maximum (minimum).
  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    if (j + 1 >= n) break;
    const double left = s[i - 1], right = s[j + 1], v = s[i];
    const std::size_t centre = i + (j - i) / 2;
    if (v > left && v > right) e.maxima.push_back(centre);
    else if (v < left && v < right) e.minima.push_back(centre);
    i = j + 1;
  }
  return e;
}

std::vector<double> natural_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> at) {
  const std::size_t k = xs.size();
  std::vector<double> out(at.size());
  if (k < 2) throw std::invalid_argument("spline needs at least 2 knots");
  // Second derivatives m_i with m_0 = m_{k-1} = 0 (tridiagonal, Thomas algorithm).
  std::vector<double> m(k, 0.0);
  if (k > 2) {
    const std::size_t n = k - 2;
    std::vector<double> diag(n), upper(n), rhs(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = r + 1;
      const double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
      diag[r] = 2.0 * (h0 + h1);
      upper[r] = h1;
      rhs[r] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    for (std::size_t r = 1; r < n; ++r) {
      const double lower = xs[r + 1] - xs[r];  // h0 of row r
      const double w = lower / diag[r - 1];
      diag[r] -= w * upper[r - 1];
      rhs[r] -= w * rhs[r - 1];
    }
    m[n] = rhs[n - 1] / diag[n - 1];
    for (std::size_t r = n - 1; r-- > 0;) m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
  }
  std::size_t seg = 0;
  for (std::size_t q = 0; q < at.size(); ++q) {
    const double x = at[q];
    if (x < xs[seg] || seg + 1 >= k || x > xs[seg + 1]) {
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      seg = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - xs.begin() - 1, 0,
                                                                static_cast<std::ptrdiff_t>(k) - 2));
    }
    const double h = xs[seg + 1] - xs[seg];
    const double a = (xs[seg + 1] - x) / h;
    const double b = (x - xs[seg]) / h;
    out[q] = a * ys[seg] + b * ys[seg + 1] +
             ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
  }
  return out;
}

namespace {

// Knots for one envelope: the extrema plus up to two mirror images at each
// end, reflected about the first and last sample.
std::vector<double> envelope(std::span<const double> h, std::span<const std::size_t> idx,
                             std::span<const double> grid) {
  const double last = static_cast<double>(h.size() - 1);
  std::vector<double> xs, ys;
  const std::size_t e = idx.size();
  for (std::size_t k = std::min<std::size_t>(2, e); k-- > 0;) {
    xs.push_back(-static_cast<double>(idx[k]));
    ys.push_back(h[idx[k]]);
  }
  for (std::size_t i : idx) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(h[i]);
  }
  for (std::size_t k = 0; k < std::min<std::size_t>(2, e); ++k) {
    xs.push_back(2.0 * last - static_cast<double>(idx[e - 1 - k]));
    ys.push_back(h[idx[e - 1 - k]]);
  }
  return natural_cubic_spline(xs, ys, grid);
}

bool is_monotone(std::span<const double> s) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < s[i - 1]) up = false;
    if (s[i] > s[i - 1]) down = false;
  }
  return up || down;
}

}  // namespace

EmdResult emd(std::span<const double> series, const EmdConfig& config) {
  if (series.size() < kEmdMinLength)
    throw KinematicsError("emd: series needs at least " + std::to_string(kEmdMinLength) + " samples");
  const std::size_t n = series.size();
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i);

  EmdResult out;
  std::vector<double> r(series.begin(), series.end());
  while (static_cast<int>(out.imfs.size()) < config.max_imfs) {
    if (is_monotone(r)) break;
    const Extrema ex = find_extrema(r);
    if (ex.maxima.size() + ex.minima.size() < 2 || ex.maxima.empty() || ex.minima.empty()) break;

    std::vector<double> h = r;
    for (int sift = 0; sift < config.max_sifts; ++sift) {
      const Extrema e = find_extrema(h);
      if (e.maxima.empty() || e.minima.empty()) break;
      const auto upper = envelope(h, e.maxima, grid);
      const auto lower = envelope(h, e.minima, grid);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double mean = 0.5 * (upper[i] + lower[i]);
        num += mean * mean;
        den += h[i] * h[i];
        h[i] -= mean;
      }
      if (den == 0 || num / den < config.sd_threshold) break;
    }
    for (std::size_t i = 0; i < n; ++i) r[i] -= h[i];
    out.imfs.push_back(std::move(h));
  }
  out.residual = std::move(r);
  return out;
}

EmdFeatures emd_features(std::span<const double> series, const EmdConfig& config) {
  const EmdResult res = emd(series, config);
  EmdFeatures f{};
  for (std::size_t k = 0; k < 3 && k < res.imfs.size(); ++k) {
    f[2 * k] = conventional_energy(res.imfs[k]);
    f[2 * k + 1] = histogram_entropy(res.imfs[k]);
  }
  f[6] = static_cast<double>(res.imfs.size());
  return f;
}

EmdFeatures emd_features(const Trial& trial, const EmdConfig& config) {
  const auto v = kinematic_series(trial, Kind::Velocity, Axis::Resultant, false, Phase::Whole);
  return emd_features(v.values, config);
}

}  // namespace inkpark
