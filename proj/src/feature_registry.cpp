#include <cmath>
#include <functional>
#include <map>

#include "inkpark/emd.hpp"
#include "inkpark/kinematics.hpp"
#include "inkpark/stats_agg.hpp"

namespace inkpark {

std::array<double, 11> summary_values(const SummarySet& s) {
  return {s.mean, s.median, s.variance, s.std, s.max, s.min,
          s.p1,   s.p99,    s.p_range,  s.skewness, s.kurtosis};
}

std::vector<std::string> FeatureRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::optional<std::size_t> FeatureRegistry::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

namespace {

using Values = std::optional<std::vector<double>>;

struct Block {
  std::string source;
  std::vector<std::string> stats;
  std::function<Values()> compute;
  std::string sentinel_stat;  // empty when no stat carries a sentinel
  double sentinel = 0;
};

const std::vector<std::string>& summary_stats() {
  static const std::vector<std::string> s(kSummaryStatNames.begin(), kSummaryStatNames.end());
  return s;
}

std::vector<double> summary_vector(std::span<const double> series) {
  const auto a = summary_values(summarize(series));
  return {a.begin(), a.end()};
}

// Lazily computed per-trial series shared between blocks.
class TrialCache {
 public:
  explicit TrialCache(const Trial* trial) : trial_(trial) {}

  const Trial& trial() const { return *trial_; }

  const std::vector<double>& series(Kind kind, Axis axis, bool is_signed, Phase phase) {
    const std::string key = series_name(kind, axis, is_signed, phase);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, kinematic_series(*trial_, kind, axis, is_signed, phase).values).first;
    return it->second;
  }

 private:
  const Trial* trial_;
  std::map<std::string, std::vector<double>> cache_;
};

// Emits every feature block in registry order. With a null trial only the
// layout is used; compute() is never called.
std::vector<Block> define_blocks(TrialCache& c) {
  std::vector<Block> blocks;
  auto summary_of = [&](Kind k, Axis a, bool s, Phase p) {
    blocks.push_back({series_name(k, a, s, p), summary_stats(),
                      [&c, k, a, s, p]() -> Values { return summary_vector(c.series(k, a, s, p)); }});
  };
  auto raw_summary = [&](std::string name, std::function<std::vector<double>(const Trial&)> get) {
    blocks.push_back({"raw." + name, summary_stats(),
                      [&c, get]() -> Values { return summary_vector(get(c.trial())); }});
  };

  // Trajectory angles at arc-length offsets 10..100.
  for (double d : kAngleOffsets) {
    blocks.push_back({"angle.d" + std::to_string(static_cast<int>(d)),
                      {"mean", "median", "std", "p1", "p99"},
                      [&c, d]() -> Values {
                        const auto a = angle_trajectory(c.trial(), {d});
                        if (a.values.empty()) return std::nullopt;
                        const SummarySet s = summarize(a.values);
                        return std::vector<double>{s.mean, s.median, s.std, s.p1, s.p99};
                      }});
  }

  // Signed whole-trial displacement and velocity.
  for (Kind k : {Kind::Displacement, Kind::Velocity})
    for (Axis a : {Axis::X, Axis::Y}) summary_of(k, a, true, Phase::Whole);

  blocks.push_back({"pen.first",
                    {"pressure", "azimuth", "altitude"},
                    [&c]() -> Values {
                      const auto p = pen_state_features(c.trial());
                      return std::vector<double>{p.first_pressure, p.first_azimuth, p.first_altitude};
                    }});

  // First and last 10% phases.
  for (Phase p : {Phase::First10, Phase::Last10}) {
    summary_of(Kind::Displacement, Axis::Resultant, false, p);
    summary_of(Kind::Velocity, Axis::Resultant, false, p);
    for (bool s : {false, true})
      for (Kind k : {Kind::Displacement, Kind::Velocity})
        for (Axis a : {Axis::X, Axis::Y}) summary_of(k, a, s, p);
  }

  blocks.push_back({"pen.last",
                    {"x", "y", "pressure", "azimuth", "altitude"},
                    [&c]() -> Values {
                      const auto p = pen_state_features(c.trial());
                      return std::vector<double>{p.last_x, p.last_y, p.last_pressure, p.last_azimuth,
                                                 p.last_altitude};
                    }});

  const std::vector<std::string> stroke_stats(kStrokeStatNames.begin(), kStrokeStatNames.end());
  for (auto [q, name] : {std::pair{StrokeQuantity::Pressure, "pressure"},
                         std::pair{StrokeQuantity::Displacement, "disp"},
                         std::pair{StrokeQuantity::Velocity, "vel"}}) {
    blocks.push_back({std::string("stroke.") + name, stroke_stats, [&c, q]() -> Values {
                        const auto b = stroke_feature_block(c.trial(), q);
                        if (!b) return std::nullopt;
                        return std::vector<double>(b->begin(), b->end());
                      }});
  }

  // Baseline: raw channels.
  raw_summary("x", [](const Trial& t) { return coordinate_series(t, Axis::X); });
  raw_summary("y", [](const Trial& t) { return coordinate_series(t, Axis::Y); });
  raw_summary("button", [](const Trial& t) {
    std::vector<double> v;
    for (const auto& s : t.samples) v.push_back(s.button);
    return v;
  });
  raw_summary("pressure", pressure_series);
  raw_summary("azimuth", [](const Trial& t) {
    std::vector<double> v;
    for (const auto& s : t.samples) v.push_back(static_cast<double>(s.azimuth));
    return v;
  });
  raw_summary("altitude", [](const Trial& t) {
    std::vector<double> v;
    for (const auto& s : t.samples) v.push_back(static_cast<double>(s.altitude));
    return v;
  });

  // Baseline: whole-trial kinematics.
  summary_of(Kind::Displacement, Axis::Resultant, false, Phase::Whole);
  summary_of(Kind::Velocity, Axis::Resultant, false, Phase::Whole);
  for (Kind k : {Kind::Displacement, Kind::Velocity})
    for (Axis a : {Axis::X, Axis::Y}) summary_of(k, a, false, Phase::Whole);
  summary_of(Kind::Acceleration, Axis::Resultant, true, Phase::Whole);
  summary_of(Kind::Jerk, Axis::Resultant, true, Phase::Whole);

  blocks.push_back({"count",
                    {"ncv", "nca", "ncp", "strokes"},
                    [&c]() -> Values {
                      const auto& vel = c.series(Kind::Velocity, Axis::Resultant, false, Phase::Whole);
                      const auto& acc = c.series(Kind::Acceleration, Axis::Resultant, true, Phase::Whole);
                      const auto strokes = segment_strokes(c.trial());
                      return std::vector<double>{
                          static_cast<double>(count_changes(vel)),
                          static_cast<double>(count_changes(acc)),
                          static_cast<double>(count_changes(pressure_series(c.trial()))),
                          static_cast<double>(stroke_number(strokes))};
                    }});

  blocks.push_back({"dur",
                    {"in_air_ms", "on_surface_ms", "total_ms", "ratio"},
                    [&c]() -> Values {
                      const auto d = durations(c.trial());
                      return std::vector<double>{d.in_air_ms, d.on_surface_ms, d.total_ms, d.ratio};
                    },
                    "ratio", kRatioSentinel});

  blocks.push_back({"entropy", {"shannon", "renyi2"}, [&c]() -> Values {
                      std::vector<Point2> pts;
                      for (const auto& s : c.trial().samples)
                        pts.push_back({static_cast<double>(s.x), static_cast<double>(s.y)});
                      return std::vector<double>{entropy(pts, EntropyKind::Shannon),
                                                 entropy(pts, EntropyKind::Renyi, 2.0)};
                    }});

  blocks.push_back({"energy", {"conv_x", "conv_y"}, [&c]() -> Values {
                      return std::vector<double>{
                          conventional_energy(c.series(Kind::Displacement, Axis::X, true, Phase::Whole)),
                          conventional_energy(c.series(Kind::Displacement, Axis::Y, true, Phase::Whole))};
                    }});
  for (Axis a : {Axis::X, Axis::Y}) {
    blocks.push_back({std::string("tke.") + (a == Axis::X ? "x" : "y"), summary_stats(),
                      [&c, a]() -> Values {
                        return summary_vector(
                            teager_kaiser(c.series(Kind::Displacement, a, true, Phase::Whole)));
                      }});
  }

  blocks.push_back({"snr", {"x", "y"}, [&c]() -> Values {
                      return std::vector<double>{snr_db(coordinate_series(c.trial(), Axis::X)),
                                                 snr_db(coordinate_series(c.trial(), Axis::Y))};
                    }});

  blocks.push_back({"emd",
                    std::vector<std::string>(kEmdFeatureNames.begin(), kEmdFeatureNames.end()),
                    [&c]() -> Values {
                      const auto f = emd_features(
                          c.series(Kind::Velocity, Axis::Resultant, false, Phase::Whole));
                      return std::vector<double>(f.begin(), f.end());
                    }});
  return blocks;
}

FeatureRegistry make_registry() {
  TrialCache none(nullptr);
  FeatureRegistry reg;
  reg.version = std::string(kRegistryVersion);
  for (const Block& b : define_blocks(none)) {
    for (const auto& stat : b.stats) {
      FeatureSpec f{b.source + "." + stat, b.source, stat, std::nullopt};
      if (!b.sentinel_stat.empty() && stat == b.sentinel_stat) f.sentinel = b.sentinel;
      reg.features.push_back(std::move(f));
    }
  }
  return reg;
}

}  // namespace

const FeatureRegistry& default_registry() {
  static const FeatureRegistry reg = make_registry();
  return reg;
}

FeatureRow extract_features(const Trial& trial, const FeatureRegistry& registry) {
  if (registry.version != kRegistryVersion || registry.size() != default_registry().size())
    throw std::invalid_argument("extract_features: unsupported registry '" + registry.version + "'");
  validate_trial(trial);
  TrialCache cache(&trial);
  FeatureRow row;
  row.values.reserve(registry.size());
  row.present.reserve(registry.size());
  for (const Block& b : define_blocks(cache)) {
    const Values v = b.compute();
    if (v && v->size() != b.stats.size())
      throw std::logic_error("feature block " + b.source + " produced the wrong width");
    for (std::size_t k = 0; k < b.stats.size(); ++k) {
      const double x = v ? (*v)[k] : 0.0;
      const bool ok = v.has_value() && std::isfinite(x);
      row.values.push_back(ok ? x : 0.0);
      row.present.push_back(ok);
    }
  }
  return row;
}

}  // namespace inkpark
