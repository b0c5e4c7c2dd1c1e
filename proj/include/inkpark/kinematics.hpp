#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "inkpark/signal_io.hpp"

namespace inkpark {

class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Phases
//
// With n samples and c = max(1, ceil(n / 10)) difference pairs, First10 is
// samples [0, c] and Last10 is samples [n-1-c, n-1] (inclusive), i.e. the
// difference indices 1..c and n-c..n-1 in 1-based notation. Whole is every
// sample.
// ---------------------------------------------------------------------------

enum class Phase { Whole, First10, Last10 };

struct SampleRange {
  std::size_t begin = 0;  // first sample
  std::size_t end = 0;    // one past the last sample
  std::size_t size() const { return end - begin; }
};

/// Number of difference pairs in a First10/Last10 phase of an n-sample trial.
std::size_t phase_pairs(std::size_t n);
/// Throws KinematicsError when the trial has fewer than two samples.
SampleRange phase_range(std::size_t n, Phase phase);

// ---------------------------------------------------------------------------
// Difference series
//
// Displacement  d_i = delta / dt_i           (delta = |dp| or dx or dy), units/ms
// Velocity      v_i = d_i / dt_i                                      units/ms^2
// Acceleration  a_i = (v_{i+1} - v_i) / dt_i                          units/ms^3
// Jerk          j_i = (a_{i+1} - a_i) / dt_i                          units/ms^4
//
// with dt_i = t_{i+1} - t_i. Velocity keeps the second division by dt of the
// chained displacement/velocity definitions. Unsigned series are the
// elementwise absolute value of the signed ones; the resultant displacement
// and velocity are non-negative either way.
// ---------------------------------------------------------------------------

enum class Kind { Displacement, Velocity, Acceleration, Jerk };
enum class Axis { Resultant, X, Y };

struct KinematicSeries {
  std::string name;
  std::vector<double> values;
  std::string units;
};

/// Difference pairs needed for one value of `kind` (1, 1, 2, 3).
std::size_t min_pairs(Kind kind);

/// Series over an arbitrary sample range; throws KinematicsError if the
/// range holds fewer than min_pairs(kind) difference pairs.
std::vector<double> difference_series(std::span<const Sample> samples, Kind kind, Axis axis,
                                      bool is_signed);

KinematicSeries kinematic_series(const Trial& trial, Kind kind, Axis axis, bool is_signed,
                                 Phase phase);

std::string series_name(Kind kind, Axis axis, bool is_signed, Phase phase);

// ---------------------------------------------------------------------------
// Strokes
// ---------------------------------------------------------------------------

enum class StrokeKind { OnSurface, InAir };

/// Maximal run of constant button state, sample indices inclusive.
struct Stroke {
  StrokeKind kind = StrokeKind::OnSurface;
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const Stroke&, const Stroke&) = default;
};

std::vector<Stroke> segment_strokes(const Trial& trial);
std::size_t stroke_number(std::span<const Stroke> strokes);

// ---------------------------------------------------------------------------
// Trajectory angle
// ---------------------------------------------------------------------------

/// d is an arc-length offset in raw tablet units.
struct AngleConfig {
  double d = 10.0;
};

inline constexpr std::array<double, 10> kAngleOffsets{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

/// For every on-surface anchor with at least d of stroke arc length on both
/// sides, the angle in degrees between the vectors to the points d before
/// and d after along the polyline. Empty when no stroke is long enough.
KinematicSeries angle_trajectory(const Trial& trial, AngleConfig config);

/// Same computation on a single polyline.
std::vector<double> polyline_angles(std::span<const double> xs, std::span<const double> ys,
                                    double d);

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

/// Sign changes of the first difference. Differences with |diff| <= epsilon
/// are skipped, so plateaus collapse. Series shorter than 3 give 0.
std::size_t count_changes(std::span<const double> series, double epsilon = 0.0);

inline constexpr double kRatioSentinel = 1e6;

struct Durations {
  double in_air_ms = 0;
  double on_surface_ms = 0;
  double total_ms = 0;
  double ratio = 0;  // in_air / on_surface, kRatioSentinel when on_surface == 0
};

/// Interval [t_i, t_{i+1}) counts toward the button state of sample i.
Durations durations(const Trial& trial);

struct Point2 {
  double x = 0;
  double y = 0;
};

enum class EntropyKind { Shannon, Renyi };

inline constexpr int kEntropyBins = 16;

/// Entropy in bits of the 16x16 joint histogram over the bounding box.
/// Renyi order defaults to 2; order 1 reduces to Shannon.
double entropy(std::span<const Point2> points, EntropyKind kind, double renyi_order = 2.0,
               int bins = kEntropyBins);
/// Shannon entropy in bits of a 1-D histogram over the series range.
double histogram_entropy(std::span<const double> series, int bins = kEntropyBins);

/// Sum of squares.
double conventional_energy(std::span<const double> series);
/// psi[i] = x_i^2 - x_{i-1} x_{i+1} for interior i; length n - 2. Throws on n < 3.
std::vector<double> teager_kaiser(std::span<const double> series);

inline constexpr std::size_t kSnrWindow = 15;
inline constexpr double kSnrClampDb = 60.0;

/// 10 log10(P_smooth / P_residual) with a centred moving average whose
/// half-width shrinks symmetrically near the edges. Clamped to +/-60 dB;
/// zero residual gives +60, zero smooth power gives -60. Throws if the
/// series is shorter than the window.
double snr_db(std::span<const double> series, std::size_t window = kSnrWindow);

struct PenStateFeatures {
  double first_pressure = 0;
  double first_azimuth = 0;
  double first_altitude = 0;
  double last_pressure = 0;
  double last_azimuth = 0;
  double last_altitude = 0;
  double last_x = 0;
  double last_y = 0;
};

PenStateFeatures pen_state_features(const Trial& trial);

// ---------------------------------------------------------------------------
// Per-stroke statistics
// ---------------------------------------------------------------------------

enum class StrokeQuantity { Pressure, Displacement, Velocity };

/// max, min, mean, median, variance, std, p1, p99, skewness, kurtosis
using StrokeStats = std::array<double, 10>;
inline constexpr std::array<const char*, 10> kStrokeStatNames{
    "max", "min", "mean", "median", "variance", "std", "p1", "p99", "skewness", "kurtosis"};

/// Statistics of the quantity within each on-surface stroke, averaged over
/// strokes. Displacement and velocity use the resultant series inside the
/// stroke, so single-sample strokes do not contribute to them. nullopt when
/// no stroke contributes.
std::optional<StrokeStats> stroke_feature_block(const Trial& trial, StrokeQuantity quantity);

std::vector<double> pressure_series(const Trial& trial);
std::vector<double> coordinate_series(const Trial& trial, Axis axis);

}  // namespace inkpark
