#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/signal_io.hpp"

namespace inkpark {

enum class TemplateKind { Spiral, RepeatedLetter, Word, Sentence };

std::string_view template_kind_name(TemplateKind k);
TemplateKind parse_template_kind(std::string_view s);

/// Parametric base trajectory for one task. Strokes are separated by
/// in-air gaps of 100-300 ms.
struct TaskTemplate {
  int task_id = 1;
  TemplateKind kind = TemplateKind::Spiral;
  int strokes = 1;
  int loops_per_stroke = 0;        // cursive loops (letters, words)
  double stroke_duration_ms = 2000;  // mean on-surface time per stroke
};

/// Handwriting-task layout modelled on the eight tablet tasks: spiral,
/// letter, bigram, trigram, three words and a sentence.
TaskTemplate task_template(int task_id);
std::vector<TaskTemplate> default_tasks();

/// Group effect sizes applied to PD trials only.
struct Severity {
  double tremor_amplitude = 0;        // tablet units
  double tremor_freq_hz = 5;          // > 0
  double speed_factor = 1;            // (0, 1]; time axis stretched by 1 / speed_factor
  double amplitude_decay_per_stroke = 0;  // [0, 1); stroke k scaled by (1 - decay)^k
  double pressure_jitter = 0;         // device units (std of added noise)
};

/// "separable" (large effects), "hard" (small effects) or "none".
Severity severity_preset(std::string_view name);
void validate_severity(const Severity& s);

struct CohortSpec {
  std::size_t n_pd = 1;
  std::size_t n_hc = 1;
  std::vector<TaskTemplate> tasks = default_tasks();
  std::uint64_t seed = 0;
  Severity severity = severity_preset("separable");
  double sampling_rate_hz = kDefaultSamplingRateHz;
};

void validate_cohort_spec(const CohortSpec& spec);
CohortSpec parse_cohort_spec_json(std::string_view json_text);
std::string format_cohort_spec_json(const CohortSpec& spec);

/// Deterministic in (template, label, severity, seed). HC trials ignore the
/// severity; with all effects at zero PD and HC trials coincide.
Trial generate_trial(const TaskTemplate& tmpl, Label label, const Severity& severity,
                     std::uint64_t seed, double sampling_rate_hz = kDefaultSamplingRateHz);

struct GeneratedCohort {
  std::vector<Trial> trials;
  CohortManifest manifest;  // paths are "<subject>_t<task>.txt"
};

/// Subject seeds are derive_seed(spec.seed, {hash_key(subject_id)}) and
/// trial seeds derive_seed(subject_seed, {task_id}).
GeneratedCohort generate_cohort(const CohortSpec& spec);

/// Writes every trial file plus manifest.json into `dir` (created if needed).
void write_cohort(const GeneratedCohort& cohort, const std::filesystem::path& dir);

}  // namespace inkpark
