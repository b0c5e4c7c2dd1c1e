#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/evaluation.hpp"
#include "json.hpp"

namespace inkpark {

inline constexpr std::string_view kReportFormat = "inkpark-report/1";

nlohmann::json pipeline_config_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::json kernel_json(const KernelSpec& k);
KernelSpec kernel_from_json(const nlohmann::json& j);

nlohmann::json task_result_json(const TaskResult& r);
TaskResult task_result_from_json(const nlohmann::json& j);

nlohmann::json ensemble_result_json(const EnsembleResult& e);

/// Recounts the confusion matrix from the per-subject predictions and
/// compares it (and the metrics) with the stored values.
bool self_check(const TaskResult& r);

struct EvaluationReport {
  std::string kind;  // "evaluate", "ensemble", "select", "train"
  std::string registry_version;
  nlohmann::json config = nlohmann::json::object();  // full run configuration
  std::vector<TaskResult> tasks;
  std::optional<EnsembleResult> ensemble;
  std::vector<std::string> warnings;
};

/// Keys are sorted, so equal reports serialize to equal bytes. Throws
/// EvaluationError if a self-check fails.
nlohmann::json report_json(const EvaluationReport& r);
std::string format_report(const EvaluationReport& r);

/// Reads the task results back (ensemble members are not re-read).
EvaluationReport parse_report(std::string_view text);

}  // namespace inkpark
