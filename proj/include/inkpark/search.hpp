#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "inkpark/matrix.hpp"
#include "inkpark/svm.hpp"

namespace inkpark {

/// Stratified fold assignment: each class is shuffled with `seed` and dealt
/// round-robin, continuing the deal across classes. Returns fold id per row.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// Accuracy (fraction) of an SVM under stratified k-fold CV on a precomputed
/// Gram matrix. A training fold with one class predicts that class.
double cv_accuracy_gram(const Matrix& gram, std::span<const int> y, std::span<const std::size_t> folds,
                        double c, const SvmOptions& options = {});

/// Same on raw rows; folds come from stratified_folds(y, k, seed).
double inner_cv_accuracy(const Matrix& x, std::span<const int> y, double c, const KernelSpec& spec,
                         std::size_t k, std::uint64_t seed, const SvmOptions& options = {});

struct SearchSpace {
  double c_min = 0.01, c_max = 100.0;
  double gamma_min = 0.01, gamma_max = 100.0;
  std::vector<KernelFamily> families{KernelFamily::Linear, KernelFamily::Rbf, KernelFamily::Sigmoid};
  std::size_t budget = 100;
  std::uint64_t seed = 0;
  std::size_t inner_folds = 5;
};

void validate_search_space(const SearchSpace& s);

struct SearchTrial {
  std::size_t index = 0;
  KernelSpec kernel;
  double c = 1.0;
  double score = 0.0;  // inner-CV accuracy, fraction
  bool failed = false; // SMO did not converge
  std::string error;
};

struct SearchResult {
  KernelSpec kernel;
  double c = 1.0;
  double score = 0.0;
  std::size_t best_index = 0;
  std::vector<SearchTrial> history;
};

/// Trial t draws (family, C, gamma) from derive_seed(seed, {t}); the sigmoid
/// slope is gamma and its offset 0. Best = highest score, earliest on ties.
using TrialEvaluator = std::function<double(const KernelSpec&, double c)>;
SearchResult hyperparameter_search(const SearchSpace& space, const TrialEvaluator& evaluate,
                                   unsigned jobs = 1);

/// Default evaluator: stratified inner CV accuracy on (x, y).
SearchResult hyperparameter_search(const Matrix& x, std::span<const int> y, const SearchSpace& space,
                                   unsigned jobs = 1);

/// The (family, C, gamma) draw of trial t.
SearchTrial draw_trial(const SearchSpace& space, std::size_t t);

}  // namespace inkpark
