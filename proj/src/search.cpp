#include "inkpark/search.hpp"

#include <algorithm>
#include <cmath>

#include "inkpark/parallel.hpp"
#include "inkpark/rng.hpp"

namespace inkpark {

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be >= 2");
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t deal = 0;
  // Positive class first, then negative, so the layout does not depend on row order of classes.
  for (int cls : {1, -1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) idx.push_back(i);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(cls + 1)}));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t i : idx) fold[i] = deal++ % k;
  }
  return fold;
}

double cv_accuracy_gram(const Matrix& gram, std::span<const int> y, std::span<const std::size_t> folds,
                        double c, const SvmOptions& options) {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("cv_accuracy: no rows");
  const std::size_t k = *std::max_element(folds.begin(), folds.end()) + 1;
  std::size_t correct = 0;
  std::vector<std::size_t> train, test;
  for (std::size_t f = 0; f < k; ++f) {
    train.clear();
    test.clear();
    for (std::size_t i = 0; i < n; ++i) (folds[i] == f ? test : train).push_back(i);
    if (test.empty() || train.empty()) continue;
    std::vector<int> ytr;
    int pos = 0;
    for (std::size_t i : train) {
      ytr.push_back(y[i]);
      pos += y[i] > 0;
    }
    if (pos == 0 || pos == static_cast<int>(train.size())) {
      const int only = ytr.front();
      for (std::size_t i : test) correct += y[i] == only;
      continue;
    }
    Matrix g(train.size(), train.size());
    for (std::size_t a = 0; a < train.size(); ++a)
      for (std::size_t b = 0; b < train.size(); ++b) g(a, b) = gram(train[a], train[b]);
    const SvmDual dual = solve_svm_dual(g, ytr, c, options);
    for (std::size_t t : test) {
      double d = dual.bias;
      for (std::size_t a = 0; a < train.size(); ++a)
        if (dual.alpha[a] > 0) d += dual.alpha[a] * ytr[a] * gram(train[a], t);
      correct += (d >= 0 ? 1 : -1) == y[t];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double inner_cv_accuracy(const Matrix& x, std::span<const int> y, double c, const KernelSpec& spec,
                         std::size_t k, std::uint64_t seed, const SvmOptions& options) {
  const auto folds = stratified_folds(y, k, seed);
  return cv_accuracy_gram(gram_matrix(spec, x), y, folds, c, options);
}

void validate_search_space(const SearchSpace& s) {
  if (!(s.c_min > 0 && s.c_max >= s.c_min)) throw std::invalid_argument("search: bad C range");
  if (!(s.gamma_min > 0 && s.gamma_max >= s.gamma_min)) throw std::invalid_argument("search: bad gamma range");
  if (s.families.empty()) throw std::invalid_argument("search: no kernel families");
  if (s.budget < 1) throw std::invalid_argument("search: budget must be >= 1");
  if (s.inner_folds < 2) throw std::invalid_argument("search: inner folds must be >= 2");
}

SearchTrial draw_trial(const SearchSpace& space, std::size_t t) {
  Rng rng(derive_seed(space.seed, {0x5ea7c4ULL, t}));
  SearchTrial trial;
  trial.index = t;
  trial.kernel.family = space.families[rng.below(space.families.size())];
  trial.c = std::clamp(rng.log_uniform(space.c_min, space.c_max), space.c_min, space.c_max);
  trial.kernel.gamma = std::clamp(rng.log_uniform(space.gamma_min, space.gamma_max), space.gamma_min,
                                  space.gamma_max);
  trial.kernel.coef0 = 0.0;
  return trial;
}

SearchResult hyperparameter_search(const SearchSpace& space, const TrialEvaluator& evaluate, unsigned jobs) {
  validate_search_space(space);
  std::vector<SearchTrial> history(space.budget);
  parallel_for(space.budget, jobs, [&](std::size_t t) {
    SearchTrial trial = draw_trial(space, t);
    try {
      trial.score = evaluate(trial.kernel, trial.c);
    } catch (const SvmConvergenceError& e) {
      trial.failed = true;
      trial.error = e.what();
    } catch (const std::exception& e) {
      throw std::runtime_error("search trial " + std::to_string(t) + ": " + e.what());
    }
    history[t] = trial;
  });
  SearchResult out;
  bool found = false;
  for (const auto& tr : history) {
    if (tr.failed) continue;
    if (!found || tr.score > out.score) {
      found = true;
      out.kernel = tr.kernel;
      out.c = tr.c;
      out.score = tr.score;
      out.best_index = tr.index;
    }
  }
  if (!found) throw SvmConvergenceError("search: every trial failed to converge");
  out.history = std::move(history);
  return out;
}

SearchResult hyperparameter_search(const Matrix& x, std::span<const int> y, const SearchSpace& space,
                                   unsigned jobs) {
  validate_search_space(space);
  const auto folds = stratified_folds(y, space.inner_folds, space.seed);
  // Linear Gram is shared by every linear trial; the others depend on gamma.
  const Matrix linear = gram_matrix({KernelFamily::Linear, 1.0, 0.0}, x);
  return hyperparameter_search(
      space,
      [&](const KernelSpec& spec, double c) {
        if (spec.family == KernelFamily::Linear) return cv_accuracy_gram(linear, y, folds, c);
        Matrix g(x.rows(), x.rows());
        if (spec.family == KernelFamily::Sigmoid) {
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = std::tanh(spec.gamma * linear(i, j) + spec.coef0);
        } else {
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j)
              g(i, j) = std::exp(-spec.gamma * std::max(0.0, linear(i, i) + linear(j, j) - 2.0 * linear(i, j)));
        }
        return cv_accuracy_gram(g, y, folds, c);
      },
      jobs);
}

}  // namespace inkpark
