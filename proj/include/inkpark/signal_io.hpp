#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace inkpark {

enum class Label : int { HC = -1, PD = +1 };

inline int label_value(Label l) { return static_cast<int>(l); }
Label label_from_int(int v);
std::string_view label_name(Label l);
Label parse_label(std::string_view s);

/// One tablet record. All fields are raw device integers; t is in ms.
struct Sample {
  std::int64_t t = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  int button = 0;  // 0 = in-air, 1 = on-surface
  std::int64_t azimuth = 0;
  std::int64_t altitude = 0;
  std::int64_t pressure = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

inline constexpr double kDefaultSamplingRateHz = 150.0;

struct Trial {
  std::string subject_id;
  int task_id = 1;
  Label label = Label::HC;
  double sampling_rate_hz = kDefaultSamplingRateHz;
  std::vector<Sample> samples;

  friend bool operator==(const Trial&, const Trial&) = default;
};

/// Throws SignalError unless the trial satisfies the data-model invariants:
/// non-empty, strictly increasing timestamps, button in {0,1}, pressure >= 0,
/// task id in [1, 8], positive sampling rate.
void validate_trial(const Trial& trial);

class SignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure carrying the 1-based line number and the offending field.
class ParseError : public SignalError {
 public:
  ParseError(std::string path, std::size_t line, std::string field, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

enum class Field { T, X, Y, Button, Azimuth, Altitude, Pressure };

using ColumnOrder = std::array<Field, 7>;

inline constexpr ColumnOrder kDefaultColumnOrder{Field::T,       Field::X,        Field::Y,
                                                 Field::Button,  Field::Azimuth,  Field::Altitude,
                                                 Field::Pressure};

std::string_view field_name(Field f);
/// Parses "t,x,y,button,azimuth,altitude,pressure" (any permutation).
ColumnOrder parse_column_order(std::string_view spec);

/// Metadata the text format does not carry.
struct TrialMeta {
  std::string subject_id;
  int task_id = 1;
  Label label = Label::HC;
  double sampling_rate_hz = kDefaultSamplingRateHz;
};

/// Text format: first line is the sample count, then one line per sample
/// with seven whitespace-separated integers in `order`.
Trial parse_trial_text(std::string_view text, const ColumnOrder& order = kDefaultColumnOrder,
                       const TrialMeta& meta = {}, std::string_view source = "<memory>");
Trial parse_trial_file(const std::filesystem::path& path,
                       const ColumnOrder& order = kDefaultColumnOrder, const TrialMeta& meta = {});

/// Canonical serialization: ASCII, LF, single spaces, default column order.
std::string format_trial_text(const Trial& trial);
void write_trial_file(const Trial& trial, const std::filesystem::path& path);

struct ManifestRecord {
  std::string subject_id;
  int task_id = 1;
  Label label = Label::HC;
  std::string path;  // relative paths resolve against the manifest directory
  double sampling_rate_hz = kDefaultSamplingRateHz;
};

struct CohortManifest {
  std::vector<ManifestRecord> records;
  std::size_t count(Label l) const;
};

CohortManifest parse_manifest_json(std::string_view json_text);
std::string format_manifest_json(const CohortManifest& manifest);
CohortManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

struct Cohort {
  std::vector<Trial> trials;

  /// Trials of one task, in manifest order.
  std::vector<Trial> task(int task_id) const;
  /// Sorted distinct task ids present.
  std::vector<int> task_ids() const;
};

/// Loads every trial referenced by the manifest. Duplicate (subject, task)
/// keys and missing files are errors; an empty manifest yields an empty cohort.
Cohort load_cohort(const std::filesystem::path& manifest_path,
                   const ColumnOrder& order = kDefaultColumnOrder);

}  // namespace inkpark
