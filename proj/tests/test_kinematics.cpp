#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "inkpark/emd.hpp"
#include "inkpark/kinematics.hpp"
#include "inkpark/rng.hpp"
#include "inkpark/synth_cohort.hpp"

using namespace inkpark;
using doctest::Approx;

namespace {

Trial trial_of(std::vector<Sample> samples) {
  Trial t;
  t.subject_id = "S";
  t.samples = std::move(samples);
  return t;
}

Trial buttons(std::vector<int> b) {
  std::vector<Sample> s;
  for (std::size_t i = 0; i < b.size(); ++i) s.push_back({static_cast<std::int64_t>(10 * i), 0, 0, b[i], 0, 0, b[i] ? 100 : 0});
  return trial_of(s);
}

std::vector<double> tone(std::size_t n, double periods, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * periods * static_cast<double>(i) / static_cast<double>(n));
  return x;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("button runs become strokes") {
    const auto s = segment_strokes(buttons({1, 1, 0, 0, 1}));
    REQUIRE(s.size() == 3);
    CHECK(s[0] == Stroke{StrokeKind::OnSurface, 0, 1});
    CHECK(s[1] == Stroke{StrokeKind::InAir, 2, 3});
    CHECK(s[2] == Stroke{StrokeKind::OnSurface, 4, 4});
    CHECK(stroke_number(s) == 2);
    CHECK(stroke_number(segment_strokes(buttons({1, 1, 1}))) == 1);
    const auto air = segment_strokes(buttons({0, 0}));
    CHECK(air.size() == 1);
    CHECK(stroke_number(air) == 0);
  }

  TEST_CASE("3-4-5 step: displacement 0.5, velocity 0.05") {
    const Trial t = trial_of({{0, 0, 0, 1, 0, 0, 1}, {10, 3, 4, 1, 0, 0, 1}});
    CHECK(kinematic_series(t, Kind::Displacement, Axis::Resultant, false, Phase::Whole).values ==
          std::vector<double>{0.5});
    const auto v = kinematic_series(t, Kind::Velocity, Axis::Resultant, false, Phase::Whole).values;
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Approx(0.05).epsilon(1e-15));
    CHECK_THROWS_AS(kinematic_series(t, Kind::Acceleration, Axis::X, false, Phase::Whole), KinematicsError);
  }

  TEST_CASE("signed displacement keeps direction") {
    const Trial t = trial_of({{0, 5, 0, 1, 0, 0, 1}, {1, 2, 0, 1, 0, 0, 1}});
    CHECK(kinematic_series(t, Kind::Displacement, Axis::X, true, Phase::Whole).values == std::vector<double>{-3});
    CHECK(kinematic_series(t, Kind::Displacement, Axis::X, false, Phase::Whole).values == std::vector<double>{3});
  }

  TEST_CASE("stationary pen gives zero series for every kind and axis") {
    std::vector<Sample> s;
    for (int i = 0; i < 30; ++i) s.push_back({i * 7, 40, 50, 1, 0, 0, 10});
    const Trial t = trial_of(s);
    for (Kind k : {Kind::Displacement, Kind::Velocity, Kind::Acceleration, Kind::Jerk})
      for (Axis a : {Axis::Resultant, Axis::X, Axis::Y})
        for (Phase p : {Phase::Whole, Phase::First10, Phase::Last10})
          for (double v : kinematic_series(t, k, a, true, p).values) CHECK(v == 0.0);
  }

  TEST_CASE("acceleration and jerk chain the differences") {
    // x = t^2 at unit steps: d = 2t+1, v = d, a = 2, j = 0
    std::vector<Sample> s;
    for (int i = 0; i < 6; ++i) s.push_back({i, i * i, 0, 1, 0, 0, 1});
    const Trial t = trial_of(s);
    CHECK(kinematic_series(t, Kind::Velocity, Axis::X, true, Phase::Whole).values == std::vector<double>{1, 3, 5, 7, 9});
    CHECK(kinematic_series(t, Kind::Acceleration, Axis::X, true, Phase::Whole).values == std::vector<double>{2, 2, 2, 2});
    CHECK(kinematic_series(t, Kind::Jerk, Axis::X, true, Phase::Whole).values == std::vector<double>{0, 0, 0});
  }

  TEST_CASE("phase ranges cover the first and last tenth") {
    CHECK(phase_pairs(25) == 3);
    CHECK(phase_pairs(5) == 1);
    const SampleRange f = phase_range(25, Phase::First10), l = phase_range(25, Phase::Last10);
    CHECK(f.begin == 0);
    CHECK(f.end == 4);
    CHECK(l.begin == 21);
    CHECK(l.end == 25);
    CHECK(phase_range(25, Phase::Whole).size() == 25);
    CHECK_THROWS_AS(phase_range(1, Phase::Whole), KinematicsError);
  }

  TEST_CASE("phase series are slices of the whole series") {
    const Trial t = generate_trial(task_template(2), Label::PD, severity_preset("separable"), 3);
    const auto whole = kinematic_series(t, Kind::Velocity, Axis::Y, true, Phase::Whole).values;
    const auto first = kinematic_series(t, Kind::Velocity, Axis::Y, true, Phase::First10).values;
    const auto last = kinematic_series(t, Kind::Velocity, Axis::Y, true, Phase::Last10).values;
    const std::size_t c = phase_pairs(t.samples.size());
    REQUIRE(first.size() == c);
    REQUIRE(last.size() == c);
    for (std::size_t i = 0; i < c; ++i) {
      CHECK(first[i] == whole[i]);
      CHECK(last[i] == whole[whole.size() - c + i]);
    }
  }

  TEST_CASE("unsigned series are the absolute value of signed ones") {
    const Trial t = generate_trial(task_template(6), Label::PD, severity_preset("hard"), 11);
    for (Kind k : {Kind::Displacement, Kind::Velocity, Kind::Acceleration, Kind::Jerk})
      for (Axis a : {Axis::Resultant, Axis::X, Axis::Y}) {
        const auto sg = kinematic_series(t, k, a, true, Phase::Whole).values;
        const auto us = kinematic_series(t, k, a, false, Phase::Whole).values;
        REQUIRE(sg.size() == us.size());
        for (std::size_t i = 0; i < sg.size(); ++i) CHECK(us[i] == std::abs(sg[i]));
      }
  }

  TEST_CASE("trajectory angles") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
      xs.push_back(i);
      ys.push_back(2 * i);
    }
    for (double d : kAngleOffsets)
      for (double a : polyline_angles(xs, ys, d)) CHECK(a == 180.0);
    // corner: (d,0) -> (0,0) -> (0,d)
    const std::vector<double> cx{10, 5, 0, 0, 0}, cy{0, 0, 0, 5, 10};
    const auto corner = polyline_angles(cx, cy, 10);
    REQUIRE(corner.size() == 1);
    CHECK(corner[0] == Approx(90.0).epsilon(1e-12));
    CHECK(polyline_angles(cx, cy, 50).empty());
    for (double a : angle_trajectory(generate_trial(task_template(1), Label::HC, severity_preset("none"), 1), {30}).values) {
      CHECK(a >= 0.0);
      CHECK(a <= 180.0);
    }
    CHECK_THROWS_AS(angle_trajectory(buttons({1, 1, 1}), {0}), KinematicsError);
  }

  TEST_CASE("sign changes of the first difference") {
    CHECK(count_changes(std::vector<double>{1, 2, 1, 2, 1}) == 3);
    CHECK(count_changes(std::vector<double>{1, 2, 3, 4}) == 0);
    CHECK(count_changes(std::vector<double>{5, 5, 5, 5}) == 0);
    CHECK(count_changes(std::vector<double>{1, 2}) == 0);
    CHECK(count_changes(std::vector<double>{1, 2, 2, 2, 1}) == 1);
    // positive affine maps keep the count
    Rng rng(8);
    std::vector<double> x(200), y(200);
    for (auto& v : x) v = std::round(rng.normal() * 4);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3 * x[i] + 17;
    CHECK(count_changes(x) == count_changes(y));
  }

  TEST_CASE("durations split intervals by the starting sample's state") {
    const Durations d = durations(buttons({1, 1, 0, 0, 1}));
    CHECK(d.on_surface_ms == 20);
    CHECK(d.in_air_ms == 20);
    CHECK(d.total_ms == 40);
    CHECK(d.ratio == 1.0);
    CHECK(durations(buttons({1, 1, 1})).ratio == 0.0);
    CHECK(durations(buttons({0, 0, 0})).ratio == kRatioSentinel);
  }

  TEST_CASE("entropy of joint position histograms") {
    std::vector<Point2> grid;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) grid.push_back({static_cast<double>(i), static_cast<double>(j)});
    CHECK(entropy(grid, EntropyKind::Shannon) == Approx(8.0).epsilon(1e-12));
    CHECK(entropy(grid, EntropyKind::Renyi) == Approx(8.0).epsilon(1e-12));
    const std::vector<Point2> same(10, Point2{3, 4});
    CHECK(entropy(same, EntropyKind::Shannon) == 0.0);
    CHECK(entropy(same, EntropyKind::Renyi) == 0.0);
    const std::vector<Point2> two{{0, 0}, {0, 0}, {0, 0}, {1, 1}};
    CHECK(entropy(two, EntropyKind::Shannon) == Approx(0.811278).epsilon(1e-6));
    CHECK(entropy(two, EntropyKind::Renyi) == Approx(-std::log2(0.625)).epsilon(1e-12));
    CHECK(entropy(two, EntropyKind::Renyi, 1.0) == Approx(entropy(two, EntropyKind::Shannon)).epsilon(1e-12));
  }

  TEST_CASE("energy and Teager-Kaiser operator") {
    CHECK(conventional_energy(std::vector<double>{1, 2, 3}) == 14.0);
    for (double v : teager_kaiser(std::vector<double>(10, 2.5))) CHECK(v == 0.0);
    CHECK(teager_kaiser(std::vector<double>{0, 1, 0}) == std::vector<double>{1.0});
    CHECK_THROWS(teager_kaiser(std::vector<double>{1, 2}));
    const auto x = tone(300, 7, 2.0);
    const double omega = 2 * std::numbers::pi * 7 / 300;
    for (double v : teager_kaiser(x)) CHECK(v == Approx(4 * std::sin(omega) * std::sin(omega)).epsilon(1e-9));
  }

  TEST_CASE("signal to noise ratio") {
    std::vector<double> ramp(100);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    CHECK(snr_db(ramp) == kSnrClampDb);
    Rng rng(3);
    std::vector<double> noisy = ramp;
    for (auto& v : noisy) v += 99.0 * rng.normal();
    CHECK(snr_db(noisy) < snr_db(ramp));
    CHECK(snr_db(std::vector<double>(50, 0.0)) == -kSnrClampDb);
    CHECK_THROWS(snr_db(std::vector<double>(5, 1.0)));
  }

  TEST_CASE("EMD") {
    std::vector<double> mono(100);
    for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = std::exp(0.03 * static_cast<double>(i));
    const EmdResult m = emd(mono);
    CHECK(m.imfs.empty());
    CHECK(m.residual == mono);

    const auto x = tone(1000, 20);
    const EmdResult r = emd(x);
    REQUIRE(!r.imfs.empty());
    CHECK(correlation(r.imfs[0], x) > 0.99);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double s = r.residual[i];
      for (const auto& imf : r.imfs) s += imf[i];
      CHECK(s == Approx(x[i]).epsilon(1e-9));
    }
    const EmdFeatures f = emd_features(x);
    CHECK(f[0] == Approx(conventional_energy(x)).epsilon(0.05));
    const EmdFeatures fm = emd_features(mono);
    CHECK(fm[0] == 0.0);
    CHECK(fm[2] == 0.0);
    CHECK(fm[4] == 0.0);
    CHECK(fm[6] == 0.0);
  }

  TEST_CASE("natural cubic spline reproduces lines and hits knots") {
    const std::vector<double> xs{0, 1, 3, 4}, ys{1, 3, 7, 9}, at{0, 0.5, 2, 3.5, 4};
    const auto v = natural_cubic_spline(xs, ys, at);
    for (std::size_t i = 0; i < at.size(); ++i) CHECK(v[i] == Approx(1 + 2 * at[i]).epsilon(1e-12));
  }

  TEST_CASE("first and last pen state") {
    std::vector<Sample> s{{0, 0, 0, 1, 500, 600, 100}, {10, 3, 4, 1, 500, 600, 110}, {20, 6, 8, 1, 500, 600, 120}};
    const PenStateFeatures p = pen_state_features(trial_of(s));
    CHECK(p.first_pressure == 100);
    CHECK(p.last_pressure == 120);
    CHECK(p.last_x == 6);
    CHECK(p.last_y == 8);
    const PenStateFeatures one = pen_state_features(trial_of({s[1]}));
    CHECK(one.first_pressure == one.last_pressure);
    CHECK(one.first_azimuth == one.last_azimuth);
  }

  TEST_CASE("per-stroke pressure statistics") {
    std::vector<Sample> s{{0, 0, 0, 1, 0, 0, 10}, {10, 1, 0, 1, 0, 0, 20}, {20, 2, 0, 1, 0, 0, 30}};
    const auto b = stroke_feature_block(trial_of(s), StrokeQuantity::Pressure);
    REQUIRE(b.has_value());
    const StrokeStats& st = *b;
    CHECK(st[0] == 30);
    CHECK(st[1] == 10);
    CHECK(st[2] == Approx(20));
    CHECK(st[3] == 20);
    CHECK(st[4] == Approx(200.0 / 3));
    CHECK(st[5] == Approx(std::sqrt(200.0 / 3)));
    CHECK(st[6] == Approx(10.2));
    CHECK(st[7] == Approx(29.8));
    CHECK(st[8] == Approx(0.0));
    CHECK(st[9] == Approx(-1.5));

    // two identical strokes average to the single-stroke values
    std::vector<Sample> twice = s;
    twice.push_back({30, 2, 0, 0, 0, 0, 0});
    for (const auto& x : s) twice.push_back({x.t + 40, x.x, x.y, 1, 0, 0, x.pressure});
    const auto b2 = stroke_feature_block(trial_of(twice), StrokeQuantity::Pressure);
    REQUIRE(b2.has_value());
    for (std::size_t i = 0; i < st.size(); ++i) CHECK((*b2)[i] == Approx(st[i]).epsilon(1e-12));

    const auto single = stroke_feature_block(trial_of({s[0]}), StrokeQuantity::Pressure);
    REQUIRE(single.has_value());
    CHECK((*single)[4] == 0.0);
    CHECK((*single)[8] == 0.0);
    CHECK((*single)[9] == 0.0);
    CHECK(!stroke_feature_block(buttons({0, 0, 0}), StrokeQuantity::Pressure).has_value());
  }
}
