#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/matrix.hpp"
#include "inkpark/signal_io.hpp"
#include "inkpark/summary.hpp"

namespace inkpark {

inline constexpr std::array<const char*, 11> kSummaryStatNames{
    "mean", "median", "variance", "std", "max", "min", "p1", "p99", "p_range", "skewness", "kurtosis"};

/// Values in kSummaryStatNames order.
std::array<double, 11> summary_values(const SummarySet& s);

struct FeatureSpec {
  std::string name;    // "<source>.<stat>", unique
  std::string source;  // kinematic key, e.g. "first10.signed_vel_x"
  std::string stat;    // summary statistic, or "value" for scalars
  std::optional<double> sentinel;  // value that stands for "undefined"
};

struct FeatureRegistry {
  std::string version;
  std::vector<FeatureSpec> features;

  std::size_t size() const { return features.size(); }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
};

inline constexpr std::string_view kRegistryVersion = "inkpark-features/1";
inline constexpr std::size_t kRegistryFeatureCount = 549;

/// The fixed feature layout used by extraction.
const FeatureRegistry& default_registry();

/// One trial's features aligned to the registry; present[i] is false for
/// features that are undefined on this trial (no angle anchors, no strokes).
struct FeatureRow {
  std::vector<double> values;
  std::vector<bool> present;
};

/// Throws KinematicsError for trials too short to host every feature.
FeatureRow extract_features(const Trial& trial, const FeatureRegistry& registry = default_registry());

struct ImputedCell {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0;
};

struct FeatureMatrix {
  std::string registry_version;
  int task_id = 0;
  std::vector<std::string> names;
  Matrix values;
  std::vector<int> labels;  // +1 PD, -1 HC
  std::vector<std::string> subjects;
  std::vector<ImputedCell> imputed;  // provenance of filled-in cells

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
  FeatureMatrix select_rows(std::span<const std::size_t> idx) const;
  FeatureMatrix select_columns(std::span<const std::size_t> idx) const;
};

/// One row per trial, in input order. Absent cells are imputed with the
/// column median over present, non-sentinel values (0 if none). Throws on an
/// empty cohort or mixed task ids.
FeatureMatrix build_feature_matrix(std::span<const Trial> trials,
                                   const FeatureRegistry& registry = default_registry(),
                                   unsigned jobs = 1);

/// CSV: header = feature names, then "label" and "subject_id". Numbers use
/// the shortest representation that round-trips.
std::string format_feature_csv(const FeatureMatrix& m);
FeatureMatrix parse_feature_csv(std::string_view text);
void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

/// JSON sidecar listing imputed cells by subject and feature name.
std::string format_provenance_json(const FeatureMatrix& m);

std::string format_double(double v);

}  // namespace inkpark
