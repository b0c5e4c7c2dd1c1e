#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "inkpark/forest.hpp"
#include "inkpark/matrix.hpp"

namespace inkpark {

/// J(subset); subsets are sorted pool indices. Must be deterministic.
using SubsetEvaluator = std::function<double(std::span<const std::size_t>)>;

struct SffsStep {
  enum class Action { Add, Remove };
  Action action = Action::Add;
  std::size_t feature = 0;
  double j = 0.0;
  std::vector<std::size_t> subset;  // after the step, sorted

  std::size_t size() const { return subset.size(); }
};

struct SelectionTrace {
  std::vector<SffsStep> steps;
};

struct SffsResult {
  std::vector<std::size_t> subset;  // sorted
  double j = 0.0;
  SelectionTrace trace;
  std::size_t evaluations = 0;  // distinct subsets scored
};

/// Sequential floating forward selection over pool indices [0, pool_size).
/// Adds the best candidate (lowest index on ties) while it beats the best J
/// seen at the new size; after each add, removes features while removal beats
/// both the current J and the best J seen at the smaller size. The feature
/// just added is not a removal candidate on the first backward step.
SffsResult sffs(std::size_t pool_size, const SubsetEvaluator& j, std::size_t max_subset_size,
                unsigned jobs = 1);

/// Greedy forward selection without the floating step; always runs to
/// min(max_subset_size, pool_size) features. Returns the best (J, subset) on its path.
SffsResult greedy_forward(std::size_t pool_size, const SubsetEvaluator& j, std::size_t max_subset_size);

/// Default J: stratified k-fold CV accuracy of an RBF SVM with C = 1 and
/// gamma = 1 / |subset| on the chosen columns of x. x must outlive the evaluator.
SubsetEvaluator inner_cv_evaluator(const Matrix& x, std::span<const int> y, std::uint64_t seed,
                                   std::size_t folds = 5);

std::string_view sffs_action_name(SffsStep::Action a);

/// One JSON object per line: {"step", "action", "feature", "j", "size", "subset"}.
/// Feature names are used when given.
std::string format_trace_jsonl(const SelectionTrace& trace, std::span<const std::string> names = {});

}  // namespace inkpark
