#include "inkpark/report.hpp"

namespace inkpark {

using nlohmann::json;

nlohmann::json pipeline_config_json(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"selection", std::string(selection_mode_name(c.selection))},
          {"selection_scope", std::string(selection_scope_name(c.scope))},
          {"k_percent", c.k_percent},
          {"sffs_max_size", c.sffs_max_size},
          {"search_budget", c.search_budget},
          {"forest_trees", c.forest_trees},
          {"inner_folds", c.inner_folds},
          {"exclude_features", c.exclude_features}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("selection")) c.selection = parse_selection_mode(j.at("selection").get<std::string>());
  if (j.contains("selection_scope")) c.scope = parse_selection_scope(j.at("selection_scope").get<std::string>());
  c.k_percent = j.value("k_percent", c.k_percent);
  c.sffs_max_size = j.value("sffs_max_size", c.sffs_max_size);
  c.search_budget = j.value("search_budget", c.search_budget);
  c.forest_trees = j.value("forest_trees", c.forest_trees);
  c.inner_folds = j.value("inner_folds", c.inner_folds);
  c.exclude_features = j.value("exclude_features", c.exclude_features);
  validate_pipeline_config(c);
  return c;
}

nlohmann::json kernel_json(const KernelSpec& k) {
  return {{"family", std::string(kernel_family_name(k.family))}, {"gamma", k.gamma}, {"coef0", k.coef0}};
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  KernelSpec k;
  k.family = parse_kernel_family(j.at("family").get<std::string>());
  k.gamma = j.at("gamma").get<double>();
  k.coef0 = j.at("coef0").get<double>();
  return k;
}

namespace {

json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
}

ConfusionCounts counts_from_json(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("tn").get<std::size_t>(), j.at("fp").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

json metrics_json(const Metrics& m) {
  json flags = json::array();
  if (m.precision_undefined) flags.push_back("precision_undefined");
  if (m.recall_undefined) flags.push_back("recall_undefined");
  if (m.f1_undefined) flags.push_back("f1_undefined");
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"flags", flags}};
}

json trace_json(const SelectionTrace& t, const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto& s : t.steps) {
    json subset = json::array();
    for (std::size_t f : s.subset) subset.push_back(names.at(f));
    out.push_back({{"action", std::string(sffs_action_name(s.action))},
                   {"feature", names.at(s.feature)},
                   {"j", s.j},
                   {"size", s.size()},
                   {"subset", subset}});
  }
  return out;
}

}  // namespace

nlohmann::json task_result_json(const TaskResult& r) {
  json preds = json::array();
  for (const auto& p : r.predictions)
    preds.push_back({{"subject", p.subject},
                     {"truth", p.truth},
                     {"predicted", p.predicted},
                     {"decision", p.decision},
                     {"fold", p.fold}});
  json folds = json::array();
  for (const auto& f : r.folds)
    folds.push_back({{"fold", f.fold},
                     {"seed", f.seed},
                     {"test_subjects", f.test_subjects},
                     {"features", f.features},
                     {"kernel", kernel_json(f.kernel)},
                     {"c", f.c},
                     {"search_score", f.search_score},
                     {"failed_trials", f.failed_trials},
                     {"single_class", f.single_class},
                     {"trace", trace_json(f.trace, r.feature_names)}});
  json out{{"task_id", r.task_id},
           {"cv", r.cv},
           {"k", r.k},
           {"counts", counts_json(r.counts)},
           {"metrics", metrics_json(r.metrics)},
           {"predictions", preds},
           {"folds", folds},
           {"single_class_folds", r.single_class_folds}};
  if (!r.global_features.empty()) out["global_features"] = r.global_features;
  return out;
}

TaskResult task_result_from_json(const nlohmann::json& j) {
  TaskResult r;
  r.task_id = j.at("task_id").get<int>();
  r.cv = j.at("cv").get<std::string>();
  r.k = j.value("k", std::size_t{0});
  r.counts = counts_from_json(j.at("counts"));
  for (const auto& p : j.at("predictions"))
    r.predictions.push_back({p.at("subject").get<std::string>(), p.at("truth").get<int>(),
                             p.at("predicted").get<int>(), p.at("decision").get<double>(),
                             p.value("fold", std::size_t{0})});
  r.metrics = compute_metrics(r.counts);
  r.single_class_folds = j.value("single_class_folds", std::size_t{0});
  r.global_features = j.value("global_features", std::vector<std::string>{});
  // Fold records are kept for audit only and are not read back.
  return r;
}

nlohmann::json ensemble_result_json(const EnsembleResult& e) {
  json members = json::array();
  for (const auto& m : e.members)
    members.push_back({{"task_id", m.task_id}, {"accuracy", m.accuracy}, {"weight", m.weight}});
  return {{"mode", std::string(ensemble_mode_name(e.mode))},
          {"weights", std::string(weight_mode_name(e.weights))},
          {"tie_rule", "sum == 0 -> +1 (PD)"},
          {"members", members},
          {"result", task_result_json(e.result)}};
}

bool self_check(const TaskResult& r) {
  std::vector<int> truth, pred;
  for (const auto& p : r.predictions) {
    truth.push_back(p.truth);
    pred.push_back(p.predicted);
  }
  const ConfusionCounts c = confusion_from(truth, pred);
  if (!(c == r.counts)) return false;
  return c.total() > 0 && compute_metrics(c) == r.metrics;
}

nlohmann::json report_json(const EvaluationReport& r) {
  json tasks = json::array();
  json fold_seeds = json::object();
  for (const auto& t : r.tasks) {
    if (!self_check(t)) throw EvaluationError("self-check failed for task " + std::to_string(t.task_id));
    tasks.push_back(task_result_json(t));
    json seeds = json::array();
    for (const auto& f : t.folds) seeds.push_back(f.seed);
    fold_seeds[std::to_string(t.task_id)] = seeds;
  }
  json out{{"format", std::string(kReportFormat)},
           {"kind", r.kind},
           {"registry_version", r.registry_version},
           {"config", r.config},
           {"seeds", {{"run", r.config.value("seed", json(nullptr))}, {"folds", fold_seeds}}},
           {"tasks", tasks},
           {"warnings", r.warnings},
           {"self_check", "passed"}};
  if (r.ensemble) {
    if (!self_check(r.ensemble->result)) throw EvaluationError("self-check failed for the ensemble");
    out["ensemble"] = ensemble_result_json(*r.ensemble);
  }
  return out;
}

std::string format_report(const EvaluationReport& r) { return report_json(r).dump(2) + "\n"; }

EvaluationReport parse_report(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != kReportFormat)
      throw EvaluationError("not an inkpark report (format '" + j.value("format", std::string()) + "')");
    EvaluationReport r;
    r.kind = j.at("kind").get<std::string>();
    r.registry_version = j.value("registry_version", std::string());
    r.config = j.value("config", json::object());
    r.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& t : j.at("tasks")) r.tasks.push_back(task_result_from_json(t));
    return r;
  } catch (const json::exception& e) {
    throw EvaluationError(std::string("report JSON: ") + e.what());
  }
}

}  // namespace inkpark
