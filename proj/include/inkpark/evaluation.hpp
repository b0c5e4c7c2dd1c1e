#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/forest.hpp"
#include "inkpark/matrix.hpp"
#include "inkpark/preprocess.hpp"
#include "inkpark/search.hpp"
#include "inkpark/sffs.hpp"
#include "inkpark/svm.hpp"

namespace inkpark {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- metrics ---------------------------------------------------------------

/// Positive class is PD (+1).
struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion_from(std::span<const int> truth, std::span<const int> predicted);

/// Percentages. A zero denominator yields 0 and sets the matching flag.
struct Metrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Throws EvaluationError when the total is 0.
Metrics compute_metrics(const ConfusionCounts& c);

// ---- pipeline --------------------------------------------------------------

enum class SelectionMode { None, TopK, Sffs, TopKThenSffs };
enum class SelectionScope { PerFold, Global };

std::string_view selection_mode_name(SelectionMode m);
SelectionMode parse_selection_mode(std::string_view s);
std::string_view selection_scope_name(SelectionScope s);
SelectionScope parse_selection_scope(std::string_view s);

struct PipelineConfig {
  std::uint64_t seed = 0;
  SelectionMode selection = SelectionMode::TopKThenSffs;
  SelectionScope scope = SelectionScope::PerFold;
  double k_percent = 10.0;
  std::size_t sffs_max_size = 10;
  std::size_t search_budget = 100;
  std::size_t forest_trees = 200;
  std::size_t inner_folds = 5;
  std::vector<std::string> exclude_features;  // never offered to selection or training
};

void validate_pipeline_config(const PipelineConfig& c);

/// What fitting code may see: the training partition of one fold and nothing
/// else. The held-out rows are only ever handed to FittedPipeline::predict.
class FoldContext {
 public:
  FoldContext(Matrix x, std::vector<int> labels, std::vector<std::string> subjects,
              std::vector<std::string> names, std::uint64_t seed)
      : x_(std::move(x)), labels_(std::move(labels)), subjects_(std::move(subjects)),
        names_(std::move(names)), seed_(seed) {}

  const Matrix& x() const { return x_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& subjects() const { return subjects_; }
  const std::vector<std::string>& names() const { return names_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Matrix x_;
  std::vector<int> labels_;
  std::vector<std::string> subjects_;
  std::vector<std::string> names_;
  std::uint64_t seed_;
};

struct SelectionOutcome {
  std::vector<std::size_t> features;  // column indices, in selection order
  std::vector<std::size_t> topk;      // after the top-k filter (if run)
  SelectionTrace trace;
  double sffs_j = 0.0;
};

/// Runs the configured selection on z-scored training rows. Excluded features
/// are never candidates.
SelectionOutcome select_features(const FoldContext& ctx, const PipelineConfig& config, unsigned jobs = 1);

struct FittedPipeline {
  std::vector<std::size_t> features;  // column indices into the full matrix
  ZScoreParams zscore;                // over `features`
  std::optional<SvmModel> model;
  KernelSpec kernel;
  double c = 1.0;
  double search_score = 0.0;
  std::size_t search_trial = 0;
  std::size_t failed_trials = 0;
  std::optional<int> constant_label;  // training labels were single-class
  SelectionOutcome selection;

  SvmPrediction predict(std::span<const double> full_row) const;
};

/// Fits z-score, selection (unless `fixed_features` is given), search and
/// the final SVM on the context's rows only.
FittedPipeline fit_pipeline(const FoldContext& ctx, const PipelineConfig& config, unsigned jobs = 1,
                            const std::vector<std::size_t>* fixed_features = nullptr);

// ---- harnesses -------------------------------------------------------------

struct SubjectPrediction {
  std::string subject;
  int truth = 1;
  int predicted = 1;
  double decision = 0.0;
  std::size_t fold = 0;
};

struct FoldRecord {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> test_subjects;
  std::vector<std::string> features;
  KernelSpec kernel;
  double c = 1.0;
  double search_score = 0.0;
  std::size_t failed_trials = 0;
  bool single_class = false;
  SelectionTrace trace;
};

struct TaskResult {
  int task_id = 0;
  std::string cv;  // "loocv", "kfold", "ensemble"
  std::size_t k = 0;
  std::vector<std::string> feature_names;  // columns of the evaluated matrix
  std::vector<SubjectPrediction> predictions;  // input row order
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<FoldRecord> folds;
  std::vector<std::string> global_features;  // global scope only
  std::size_t single_class_folds = 0;
};

struct Dataset {
  int task_id = 0;
  std::vector<std::string> names;
  Matrix x;
  std::vector<int> labels;
  std::vector<std::string> subjects;
};

/// One fold per row (subject). Needs at least 3 rows.
TaskResult loocv_evaluate(const Dataset& data, const PipelineConfig& config, unsigned jobs = 1);

/// Stratified, seeded k-fold. Throws if a training fold lacks a class.
TaskResult kfold_evaluate(const Dataset& data, std::size_t k, const PipelineConfig& config, unsigned jobs = 1);

// ---- ensemble --------------------------------------------------------------

enum class EnsembleMode { Top3, Top5, All };
enum class WeightMode { Accuracy, Uniform };

std::string_view ensemble_mode_name(EnsembleMode m);
EnsembleMode parse_ensemble_mode(std::string_view s);
std::string_view weight_mode_name(WeightMode m);
WeightMode parse_weight_mode(std::string_view s);

/// sign(sum w_i f_i), with 0 -> +1. Weights must be >= 0.
int weighted_vote(std::span<const int> outputs, std::span<const double> weights);

struct EnsembleMember {
  int task_id = 0;
  double accuracy = 0.0;  // percent
  double weight = 0.0;
};

struct EnsembleResult {
  EnsembleMode mode = EnsembleMode::All;
  WeightMode weights = WeightMode::Accuracy;
  std::vector<EnsembleMember> members;  // chosen members, by descending accuracy
  TaskResult result;
};

/// Indices of the members used by `mode`: best accuracy first, lower task id on ties.
std::vector<std::size_t> choose_members(std::span<const TaskResult> results, EnsembleMode mode);

/// Votes per subject of the first member; every member must predict every subject.
EnsembleResult ensemble_vote(std::span<const TaskResult> results, EnsembleMode mode,
                             WeightMode weights = WeightMode::Accuracy);

}  // namespace inkpark
