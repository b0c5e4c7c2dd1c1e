#include "inkpark/synth_cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "inkpark/rng.hpp"
#include "json.hpp"

namespace inkpark {

using nlohmann::json;

std::string_view template_kind_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Spiral: return "spiral";
    case TemplateKind::RepeatedLetter: return "letter";
    case TemplateKind::Word: return "word";
    case TemplateKind::Sentence: return "sentence";
  }
  return "?";
}

TemplateKind parse_template_kind(std::string_view s) {
  if (s == "spiral") return TemplateKind::Spiral;
  if (s == "letter" || s == "repeated-letter") return TemplateKind::RepeatedLetter;
  if (s == "word") return TemplateKind::Word;
  if (s == "sentence") return TemplateKind::Sentence;
  throw std::invalid_argument("unknown template kind '" + std::string(s) + "'");
}

TaskTemplate task_template(int task_id) {
  switch (task_id) {
    case 1: return {1, TemplateKind::Spiral, 1, 0, 6000};
    case 2: return {2, TemplateKind::RepeatedLetter, 2, 2, 1800};
    case 3: return {3, TemplateKind::RepeatedLetter, 2, 3, 2200};
    case 4: return {4, TemplateKind::RepeatedLetter, 3, 3, 2200};
    case 5: return {5, TemplateKind::Word, 2, 4, 2600};
    case 6: return {6, TemplateKind::Word, 3, 3, 2200};
    case 7: return {7, TemplateKind::Word, 3, 4, 2600};
    case 8: return {8, TemplateKind::Sentence, 5, 4, 2400};
    default: throw std::invalid_argument("task id must be in [1, 8]");
  }
}

std::vector<TaskTemplate> default_tasks() {
  std::vector<TaskTemplate> out;
  for (int t = 1; t <= 8; ++t) out.push_back(task_template(t));
  return out;
}

Severity severity_preset(std::string_view name) {
  if (name == "separable") return {30.0, 5.0, 0.6, 0.12, 60.0};
  if (name == "hard") return {6.0, 5.0, 0.9, 0.03, 12.0};
  if (name == "none") return {0.0, 5.0, 1.0, 0.0, 0.0};
  throw std::invalid_argument("unknown severity preset '" + std::string(name) + "'");
}

void validate_severity(const Severity& s) {
  if (!(s.tremor_amplitude >= 0)) throw std::invalid_argument("tremor_amplitude must be >= 0");
  if (!(s.tremor_freq_hz > 0)) throw std::invalid_argument("tremor_freq_hz must be > 0");
  if (!(s.speed_factor > 0 && s.speed_factor <= 1))
    throw std::invalid_argument("speed_factor must be in (0, 1]");
  if (!(s.amplitude_decay_per_stroke >= 0 && s.amplitude_decay_per_stroke < 1))
    throw std::invalid_argument("amplitude_decay_per_stroke must be in [0, 1)");
  if (!(s.pressure_jitter >= 0)) throw std::invalid_argument("pressure_jitter must be >= 0");
}

void validate_cohort_spec(const CohortSpec& spec) {
  if (spec.n_pd < 1 || spec.n_hc < 1) throw std::invalid_argument("n_pd and n_hc must be >= 1");
  if (spec.tasks.empty()) throw std::invalid_argument("cohort spec needs at least one task");
  for (const auto& t : spec.tasks) {
    if (t.task_id < 1 || t.task_id > 8) throw std::invalid_argument("task id must be in [1, 8]");
    if (t.strokes < 1) throw std::invalid_argument("template needs at least one stroke");
    if (!(t.stroke_duration_ms > 0)) throw std::invalid_argument("stroke duration must be positive");
  }
  if (!(spec.sampling_rate_hz > 0)) throw std::invalid_argument("sampling rate must be positive");
  validate_severity(spec.severity);
}

namespace {

struct Vec2 {
  double x = 0, y = 0;
};

// Stroke shape in local coordinates, starting at the origin.
Vec2 stroke_shape(const TaskTemplate& t, double w) {
  if (t.kind == TemplateKind::Spiral) {
    const double theta = 6.0 * std::numbers::pi * w;
    const double a = 160.0;
    return {a * theta * std::cos(theta), a * theta * std::sin(theta)};
  }
  // Prolate cycloid: loops when b > r.
  double r = 120, b = 300, h = 1500;
  if (t.kind == TemplateKind::Word) r = 150, b = 250, h = 800;
  if (t.kind == TemplateKind::Sentence) r = 140, b = 220, h = 700;
  const double loops = std::max(1, t.loops_per_stroke);
  const double phi = 2.0 * std::numbers::pi * loops * w;
  Vec2 p{r * phi - b * std::sin(phi), 0.5 * h * (1.0 - std::cos(phi))};
  if (t.kind != TemplateKind::RepeatedLetter) p.y += 200.0 * std::sin(0.5 * std::numbers::pi * loops * w);
  return p;
}

double stroke_width(const TaskTemplate& t) {
  return stroke_shape(t, 1.0).x - stroke_shape(t, 0.0).x;
}

}  // namespace

Trial generate_trial(const TaskTemplate& tmpl, Label label, const Severity& severity_in,
                     std::uint64_t seed, double sampling_rate_hz) {
  validate_severity(severity_in);
  const Severity sev = label == Label::PD ? severity_in : severity_preset("none");
  Rng rng(seed);

  // Subject/trial-level draws; the count is fixed so PD and HC streams align.
  const double scale = rng.uniform(0.85, 1.15);
  const double tempo = rng.uniform(0.9, 1.1);
  const Vec2 origin{rng.uniform(3000, 5000), rng.uniform(3000, 5000)};
  const double phase_x = rng.uniform(0, 2 * std::numbers::pi);
  const double phase_y = rng.uniform(0, 2 * std::numbers::pi);
  const double base_pressure = rng.uniform(500, 800);
  const double base_azimuth = rng.uniform(1500, 2500);
  const double base_altitude = rng.uniform(400, 700);

  const int k_strokes = tmpl.strokes;
  std::vector<double> seg_ms;  // stroke, gap, stroke, ... in writing-time ms
  for (int k = 0; k < k_strokes; ++k) {
    seg_ms.push_back(tempo * tmpl.stroke_duration_ms * rng.uniform(0.85, 1.15));
    if (k + 1 < k_strokes) seg_ms.push_back(tempo * rng.uniform(100, 300));
  }
  double writing_ms = 0;
  for (double s : seg_ms) writing_ms += s;
  const auto base_duration = static_cast<std::int64_t>(std::llround(writing_ms));
  const auto duration = static_cast<std::int64_t>(
      std::llround(static_cast<double>(base_duration) / sev.speed_factor));
  const auto intervals = std::max<std::int64_t>(
      1, std::llround(static_cast<double>(duration) * sampling_rate_hz / 1000.0));
  if (duration < intervals) throw std::invalid_argument("sampling rate too high for ms timestamps");

  // Stroke anchors and decayed end points.
  std::vector<Vec2> anchor(k_strokes), end(k_strokes);
  double x_cursor = 0;
  for (int k = 0; k < k_strokes; ++k) {
    anchor[k] = {x_cursor, 0};
    const double decay = std::pow(1.0 - sev.amplitude_decay_per_stroke, k);
    const Vec2 e = stroke_shape(tmpl, 1.0);
    end[k] = {anchor[k].x + decay * e.x, anchor[k].y + decay * e.y};
    x_cursor += stroke_width(tmpl) + 500.0;
  }

  Trial trial;
  trial.label = label;
  trial.task_id = tmpl.task_id;
  trial.sampling_rate_hz = sampling_rate_hz;
  trial.samples.reserve(static_cast<std::size_t>(intervals + 1));
  for (std::int64_t i = 0; i <= intervals; ++i) {
    const std::int64_t t = (2 * i * duration + intervals) / (2 * intervals);
    const double u = static_cast<double>(t) / static_cast<double>(duration);
    double tau = u * writing_ms;

    // Locate the segment holding writing time tau.
    std::size_t seg = 0;
    while (seg + 1 < seg_ms.size() && tau > seg_ms[seg]) tau -= seg_ms[seg++];
    const double w = std::clamp(tau / seg_ms[seg], 0.0, 1.0);
    const bool on_surface = seg % 2 == 0;
    const int k = static_cast<int>(seg / 2);

    Vec2 p;
    double press_profile = 0;
    if (on_surface) {
      const double decay = std::pow(1.0 - sev.amplitude_decay_per_stroke, k);
      const Vec2 local = stroke_shape(tmpl, w);
      p = {anchor[k].x + decay * local.x, anchor[k].y + decay * local.y};
      press_profile = std::pow(std::sin(std::numbers::pi * (0.05 + 0.9 * w)), 0.3);
    } else {
      p = {end[k].x + w * (anchor[k + 1].x - end[k].x),
           end[k].y + w * (anchor[k + 1].y - end[k].y) + 150.0 * std::sin(std::numbers::pi * w)};
    }

    const double ts = static_cast<double>(t) / 1000.0;
    const double jx = rng.normal(), jy = rng.normal();
    const double jp = rng.normal(), jp_pd = rng.normal();
    const double ja = rng.normal(), jl = rng.normal();

    const double tremor = 2.0 * std::numbers::pi * sev.tremor_freq_hz * ts;
    const double x = origin.x + scale * p.x + sev.tremor_amplitude * std::sin(tremor + phase_x) + jx;
    const double y = origin.y + scale * p.y + sev.tremor_amplitude * std::sin(tremor + phase_y) + jy;

    Sample s;
    s.t = t;
    s.x = std::llround(x);
    s.y = std::llround(y);
    s.button = on_surface ? 1 : 0;
    s.azimuth = std::llround(base_azimuth + 60.0 * std::sin(2 * std::numbers::pi * u) + 2.0 * ja);
    s.altitude = std::llround(base_altitude + 30.0 * std::cos(2 * std::numbers::pi * u) + 2.0 * jl);
    if (on_surface) {
      const double pr = base_pressure * press_profile + 4.0 * jp + sev.pressure_jitter * jp_pd;
      s.pressure = std::max<std::int64_t>(1, std::llround(pr));
    }
    trial.samples.push_back(s);
  }
  return trial;
}

GeneratedCohort generate_cohort(const CohortSpec& spec) {
  validate_cohort_spec(spec);
  GeneratedCohort out;
  auto add_subject = [&](const std::string& id, Label label) {
    const std::uint64_t subject_seed = derive_seed(spec.seed, {hash_key(id)});
    for (const auto& tmpl : spec.tasks) {
      const std::uint64_t trial_seed = derive_seed(subject_seed, {static_cast<std::uint64_t>(tmpl.task_id)});
      Trial t = generate_trial(tmpl, label, spec.severity, trial_seed, spec.sampling_rate_hz);
      t.subject_id = id;
      out.manifest.records.push_back(
          {id, tmpl.task_id, label, id + "_t" + std::to_string(tmpl.task_id) + ".txt", spec.sampling_rate_hz});
      out.trials.push_back(std::move(t));
    }
  };
  auto make_id = [](const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i + 1);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < spec.n_pd; ++i) add_subject(make_id("PD", i), Label::PD);
  for (std::size_t i = 0; i < spec.n_hc; ++i) add_subject(make_id("HC", i), Label::HC);
  return out;
}

void write_cohort(const GeneratedCohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < cohort.trials.size(); ++i)
    write_trial_file(cohort.trials[i], dir / cohort.manifest.records[i].path);
  write_manifest(cohort.manifest, dir / "manifest.json");
}

CohortSpec parse_cohort_spec_json(std::string_view json_text) {
  const json doc = json::parse(json_text);
  CohortSpec spec;
  spec.n_pd = doc.value("n_pd", spec.n_pd);
  spec.n_hc = doc.value("n_hc", spec.n_hc);
  spec.seed = doc.value("seed", spec.seed);
  spec.sampling_rate_hz = doc.value("sampling_rate_hz", spec.sampling_rate_hz);
  if (doc.contains("preset")) spec.severity = severity_preset(doc.at("preset").get<std::string>());
  if (doc.contains("severity")) {
    const json& s = doc.at("severity");
    if (s.is_string()) {
      spec.severity = severity_preset(s.get<std::string>());
    } else {
      spec.severity.tremor_amplitude = s.value("tremor_amplitude", spec.severity.tremor_amplitude);
      spec.severity.tremor_freq_hz = s.value("tremor_freq_hz", spec.severity.tremor_freq_hz);
      spec.severity.speed_factor = s.value("speed_factor", spec.severity.speed_factor);
      spec.severity.amplitude_decay_per_stroke =
          s.value("amplitude_decay_per_stroke", spec.severity.amplitude_decay_per_stroke);
      spec.severity.pressure_jitter = s.value("pressure_jitter", spec.severity.pressure_jitter);
    }
  }
  if (doc.contains("tasks")) {
    spec.tasks.clear();
    for (const json& t : doc.at("tasks")) {
      if (t.is_number_integer()) {
        spec.tasks.push_back(task_template(t.get<int>()));
        continue;
      }
      TaskTemplate tt = task_template(t.at("task_id").get<int>());
      if (t.contains("kind")) tt.kind = parse_template_kind(t.at("kind").get<std::string>());
      tt.strokes = t.value("strokes", tt.strokes);
      tt.loops_per_stroke = t.value("loops_per_stroke", tt.loops_per_stroke);
      tt.stroke_duration_ms = t.value("stroke_duration_ms", tt.stroke_duration_ms);
      spec.tasks.push_back(tt);
    }
  }
  validate_cohort_spec(spec);
  return spec;
}

std::string format_cohort_spec_json(const CohortSpec& spec) {
  json tasks = json::array();
  for (const auto& t : spec.tasks)
    tasks.push_back({{"task_id", t.task_id},
                     {"kind", std::string(template_kind_name(t.kind))},
                     {"strokes", t.strokes},
                     {"loops_per_stroke", t.loops_per_stroke},
                     {"stroke_duration_ms", t.stroke_duration_ms}});
  json doc{{"n_pd", spec.n_pd},
           {"n_hc", spec.n_hc},
           {"seed", spec.seed},
           {"sampling_rate_hz", spec.sampling_rate_hz},
           {"tasks", tasks},
           {"severity",
            {{"tremor_amplitude", spec.severity.tremor_amplitude},
             {"tremor_freq_hz", spec.severity.tremor_freq_hz},
             {"speed_factor", spec.severity.speed_factor},
             {"amplitude_decay_per_stroke", spec.severity.amplitude_decay_per_stroke},
             {"pressure_jitter", spec.severity.pressure_jitter}}}};
  return doc.dump(2) + "\n";
}

}  // namespace inkpark
