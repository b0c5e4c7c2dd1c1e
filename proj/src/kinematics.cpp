#include "inkpark/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "inkpark/summary.hpp"

namespace inkpark {

std::size_t phase_pairs(std::size_t n) { return std::max<std::size_t>(1, (n + 9) / 10); }

SampleRange phase_range(std::size_t n, Phase phase) {
  if (n < 2) throw KinematicsError("trial needs at least 2 samples for phase extraction");
  const std::size_t c = phase_pairs(n);
  switch (phase) {
    case Phase::Whole: return {0, n};
    case Phase::First10: return {0, c + 1};
    case Phase::Last10: return {n - 1 - c, n};
  }
  return {0, n};
}

std::size_t min_pairs(Kind kind) {
  switch (kind) {
    case Kind::Displacement:
    case Kind::Velocity: return 1;
    case Kind::Acceleration: return 2;
    case Kind::Jerk: return 3;
  }
  return 1;
}

namespace {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Displacement: return "disp";
    case Kind::Velocity: return "vel";
    case Kind::Acceleration: return "acc";
    case Kind::Jerk: return "jerk";
  }
  return "?";
}

const char* kind_units(Kind k) {
  switch (k) {
    case Kind::Displacement: return "units/ms";
    case Kind::Velocity: return "units/ms^2";
    case Kind::Acceleration: return "units/ms^3";
    case Kind::Jerk: return "units/ms^4";
  }
  return "";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Whole: return "whole";
    case Phase::First10: return "first10";
    case Phase::Last10: return "last10";
  }
  return "?";
}

}  // namespace

std::string series_name(Kind kind, Axis axis, bool is_signed, Phase phase) {
  std::string name = phase_name(phase);
  name += '.';
  if (is_signed) name += "signed_";
  name += kind_name(kind);
  if (axis == Axis::X) name += "_x";
  if (axis == Axis::Y) name += "_y";
  return name;
}

std::vector<double> difference_series(std::span<const Sample> samples, Kind kind, Axis axis,
                                      bool is_signed) {
  const std::size_t pairs = samples.empty() ? 0 : samples.size() - 1;
  if (pairs < min_pairs(kind))
    throw KinematicsError(std::string("phase too short for ") + kind_name(kind) + ": " +
                          std::to_string(pairs) + " difference pairs");
  std::vector<double> dt(pairs);
  std::vector<double> v(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Sample& a = samples[i];
    const Sample& b = samples[i + 1];
    dt[i] = static_cast<double>(b.t - a.t);
    const double dx = static_cast<double>(b.x - a.x);
    const double dy = static_cast<double>(b.y - a.y);
    double delta = 0;
    switch (axis) {
      case Axis::Resultant: delta = std::hypot(dx, dy); break;
      case Axis::X: delta = dx; break;
      case Axis::Y: delta = dy; break;
    }
    v[i] = delta / dt[i];
  }
  if (kind != Kind::Displacement) {
    for (std::size_t i = 0; i < pairs; ++i) v[i] /= dt[i];
    const int extra = kind == Kind::Acceleration ? 1 : kind == Kind::Jerk ? 2 : 0;
    for (int k = 0; k < extra; ++k) {
      for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] = (v[i + 1] - v[i]) / dt[i];
      v.pop_back();
    }
  }
  if (!is_signed)
    for (double& x : v) x = std::abs(x);
  return v;
}

KinematicSeries kinematic_series(const Trial& trial, Kind kind, Axis axis, bool is_signed,
                                 Phase phase) {
  const SampleRange r = phase_range(trial.samples.size(), phase);
  KinematicSeries s;
  s.name = series_name(kind, axis, is_signed, phase);
  s.units = kind_units(kind);
  s.values = difference_series(std::span(trial.samples).subspan(r.begin, r.size()), kind, axis,
                               is_signed);
  return s;
}

std::vector<Stroke> segment_strokes(const Trial& trial) {
  std::vector<Stroke> out;
  const auto& s = trial.samples;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    if (i == s.size() || s[i].button != s[start].button) {
      out.push_back({s[start].button == 1 ? StrokeKind::OnSurface : StrokeKind::InAir, start, i - 1});
      start = i;
    }
  }
  return out;
}

std::size_t stroke_number(std::span<const Stroke> strokes) {
  return static_cast<std::size_t>(std::count_if(
      strokes.begin(), strokes.end(), [](const Stroke& s) { return s.kind == StrokeKind::OnSurface; }));
}

std::vector<double> polyline_angles(std::span<const double> xs, std::span<const double> ys,
                                    double d) {
  std::vector<double> out;
  const std::size_t n = xs.size();
  if (n < 3 || !(d > 0)) return out;
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
  const double total = arc.back();
  if (total < 2 * d) return out;

  // offset from anchor a to the point at arc length s; differences are taken
  // before interpolating so rounding stays at the scale of the offset
  auto offset_at = [&](std::size_t a, double s) -> Point2 {
    // first vertex with arc > s; segment is [k-1, k]
    auto it = std::upper_bound(arc.begin(), arc.end(), s);
    std::size_t k = static_cast<std::size_t>(it - arc.begin());
    if (k >= n) return {xs[n - 1] - xs[a], ys[n - 1] - ys[a]};
    if (k == 0) return {xs[0] - xs[a], ys[0] - ys[a]};
    const double len = arc[k] - arc[k - 1];
    const double f = len > 0 ? (s - arc[k - 1]) / len : 0.0;
    return {(xs[k - 1] - xs[a]) + f * (xs[k] - xs[k - 1]), (ys[k - 1] - ys[a]) + f * (ys[k] - ys[k - 1])};
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (arc[i] - d < 0 || arc[i] + d > total) continue;
    const Point2 v1 = offset_at(i, arc[i] - d);
    const Point2 v2 = offset_at(i, arc[i] + d);
    const double v1x = v1.x, v1y = v1.y, v2x = v2.x, v2y = v2.y;
    if ((v1x == 0 && v1y == 0) || (v2x == 0 && v2y == 0)) continue;
    // atan2(|v1 x v2|, v1 . v2) equals arccos of the normalized dot product
    // and stays accurate near 0 and 180 degrees.
    double cross = v1x * v2y - v1y * v2x;
    // interpolated points carry rounding; a cross product at that level is collinear
    if (std::abs(cross) <= 8 * std::numeric_limits<double>::epsilon() * std::hypot(v1x, v1y) * std::hypot(v2x, v2y))
      cross = 0;
    const double dot = v1x * v2x + v1y * v2y;
    if (cross == 0) out.push_back(dot < 0 ? 180.0 : 0.0);
    else out.push_back(std::atan2(std::abs(cross), dot) * 180.0 / std::numbers::pi);
  }
  return out;
}

KinematicSeries angle_trajectory(const Trial& trial, AngleConfig config) {
  KinematicSeries s;
  s.name = "angle.d" + std::to_string(static_cast<long long>(std::lround(config.d)));
  s.units = "deg";
  if (!(config.d > 0)) throw KinematicsError("angle offset d must be positive");
  std::vector<double> xs, ys;
  for (const Stroke& st : segment_strokes(trial)) {
    if (st.kind != StrokeKind::OnSurface) continue;
    xs.clear();
    ys.clear();
    for (std::size_t i = st.first; i <= st.last; ++i) {
      xs.push_back(static_cast<double>(trial.samples[i].x));
      ys.push_back(static_cast<double>(trial.samples[i].y));
    }
    const auto a = polyline_angles(xs, ys, config.d);
    s.values.insert(s.values.end(), a.begin(), a.end());
  }
  return s;
}

std::size_t count_changes(std::span<const double> series, double epsilon) {
  if (series.size() < 3) return 0;
  std::size_t changes = 0;
  int prev = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double diff = series[i] - series[i - 1];
    if (std::abs(diff) <= epsilon) continue;
    const int sign = diff > 0 ? 1 : -1;
    if (prev != 0 && sign != prev) ++changes;
    prev = sign;
  }
  return changes;
}

Durations durations(const Trial& trial) {
  Durations d;
  const auto& s = trial.samples;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dt = static_cast<double>(s[i + 1].t - s[i].t);
    (s[i].button == 1 ? d.on_surface_ms : d.in_air_ms) += dt;
  }
  if (!s.empty()) d.total_ms = static_cast<double>(s.back().t - s.front().t);
  d.ratio = d.on_surface_ms > 0 ? d.in_air_ms / d.on_surface_ms : kRatioSentinel;
  return d;
}

namespace {

int bin_of(double v, double lo, double hi, int bins) {
  if (!(hi > lo)) return 0;
  const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
  return std::clamp(b, 0, bins - 1);
}

double entropy_of_counts(std::span<const std::size_t> counts, std::size_t total, EntropyKind kind,
                         double order) {
  if (total == 0) return 0.0;
  const double n = static_cast<double>(total);
  if (kind == EntropyKind::Shannon || order == 1.0) {
    double h = 0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / n;
      h -= p * std::log2(p);
    }
    return h + 0.0;
  }
  double s = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    s += std::pow(static_cast<double>(c) / n, order);
  }
  return std::log2(s) / (1.0 - order) + 0.0;
}

}  // namespace

double entropy(std::span<const Point2> points, EntropyKind kind, double renyi_order, int bins) {
  if (points.empty()) throw KinematicsError("entropy of empty point set");
  if (bins < 1) throw KinematicsError("entropy: bins must be >= 1");
  double xlo = points[0].x, xhi = xlo, ylo = points[0].y, yhi = ylo;
  for (const Point2& p : points) {
    xlo = std::min(xlo, p.x);
    xhi = std::max(xhi, p.x);
    ylo = std::min(ylo, p.y);
    yhi = std::max(yhi, p.y);
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins * bins), 0);
  for (const Point2& p : points)
    ++counts[static_cast<std::size_t>(bin_of(p.x, xlo, xhi, bins) * bins + bin_of(p.y, ylo, yhi, bins))];
  return entropy_of_counts(counts, points.size(), kind, renyi_order);
}

double histogram_entropy(std::span<const double> series, int bins) {
  if (series.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : series) ++counts[static_cast<std::size_t>(bin_of(v, *lo, *hi, bins))];
  return entropy_of_counts(counts, series.size(), EntropyKind::Shannon, 1.0);
}

double conventional_energy(std::span<const double> series) {
  double e = 0;
  for (double v : series) e += v * v;
  return e;
}

std::vector<double> teager_kaiser(std::span<const double> series) {
  if (series.size() < 3) throw KinematicsError("Teager-Kaiser energy needs at least 3 samples");
  std::vector<double> psi(series.size() - 2);
  for (std::size_t i = 1; i + 1 < series.size(); ++i)
    psi[i - 1] = series[i] * series[i] - series[i - 1] * series[i + 1];
  return psi;
}

double snr_db(std::span<const double> series, std::size_t window) {
  if (window == 0) throw KinematicsError("snr: window must be positive");
  if (series.size() < window)
    throw KinematicsError("snr: series shorter than the smoothing window (" +
                          std::to_string(window) + ")");
  const std::size_t n = series.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
  double p_smooth = 0, p_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    const double mean = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
    const double r = series[i] - mean;
    p_smooth += mean * mean;
    p_res += r * r;
  }
  p_smooth /= static_cast<double>(n);
  p_res /= static_cast<double>(n);
  if (p_smooth <= 0) return -kSnrClampDb;
  if (p_res <= 0) return kSnrClampDb;
  return std::clamp(10.0 * std::log10(p_smooth / p_res), -kSnrClampDb, kSnrClampDb);
}

PenStateFeatures pen_state_features(const Trial& trial) {
  if (trial.samples.empty()) throw KinematicsError("pen state of empty trial");
  const Sample& f = trial.samples.front();
  const Sample& l = trial.samples.back();
  PenStateFeatures p;
  p.first_pressure = static_cast<double>(f.pressure);
  p.first_azimuth = static_cast<double>(f.azimuth);
  p.first_altitude = static_cast<double>(f.altitude);
  p.last_pressure = static_cast<double>(l.pressure);
  p.last_azimuth = static_cast<double>(l.azimuth);
  p.last_altitude = static_cast<double>(l.altitude);
  p.last_x = static_cast<double>(l.x);
  p.last_y = static_cast<double>(l.y);
  return p;
}

std::optional<StrokeStats> stroke_feature_block(const Trial& trial, StrokeQuantity quantity) {
  StrokeStats acc{};
  std::size_t used = 0;
  std::vector<double> values;
  for (const Stroke& st : segment_strokes(trial)) {
    if (st.kind != StrokeKind::OnSurface) continue;
    const auto samples = std::span(trial.samples).subspan(st.first, st.size());
    values.clear();
    if (quantity == StrokeQuantity::Pressure) {
      for (const Sample& s : samples) values.push_back(static_cast<double>(s.pressure));
    } else {
      if (samples.size() < 2) continue;
      values = difference_series(samples,
                                 quantity == StrokeQuantity::Displacement ? Kind::Displacement
                                                                          : Kind::Velocity,
                                 Axis::Resultant, false);
    }
    const SummarySet s = summarize(values);
    const StrokeStats one{s.max, s.min, s.mean, s.median, s.variance,
                          s.std, s.p1,  s.p99,  s.skewness, s.kurtosis};
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += one[k];
    ++used;
  }
  if (used == 0) return std::nullopt;
  for (double& v : acc) v /= static_cast<double>(used);
  return acc;
}

std::vector<double> pressure_series(const Trial& trial) {
  std::vector<double> out;
  out.reserve(trial.samples.size());
  for (const Sample& s : trial.samples) out.push_back(static_cast<double>(s.pressure));
  return out;
}

std::vector<double> coordinate_series(const Trial& trial, Axis axis) {
  std::vector<double> out;
  out.reserve(trial.samples.size());
  for (const Sample& s : trial.samples)
    out.push_back(static_cast<double>(axis == Axis::Y ? s.y : s.x));
  return out;
}

}  // namespace inkpark
