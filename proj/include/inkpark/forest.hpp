#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "inkpark/matrix.hpp"

namespace inkpark {

class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ForestConfig {
  std::size_t n_trees = 200;
  std::size_t max_features = 0;  // 0 = ceil(sqrt(M))
  std::size_t min_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct FeatureImportance {
  std::size_t index = 0;  // column in the input matrix
  std::string name;
  double importance = 0.0;
};

/// Sorted by importance descending, ties by column index.
struct ImportanceRanking {
  std::vector<FeatureImportance> features;
  bool any_split = false;

  std::vector<double> by_column() const;
};

/// Gini-importance ranking from a CART forest. Bootstrap multiplicities are
/// Poisson(1) draws keyed by (seed, tree, row key), so the result does not
/// depend on row order. Row keys default to a hash of each row and its label.
ImportanceRanking rf_gini_ranking(const Matrix& x, std::span<const int> labels, const ForestConfig& config,
                                  std::span<const std::string> names = {},
                                  std::span<const std::uint64_t> row_keys = {}, unsigned jobs = 1);

/// The first ceil(k/100 * M) entries of the ranking, as column indices.
std::vector<std::size_t> top_k_percent(const ImportanceRanking& ranking, double k_percent);

std::size_t top_k_count(std::size_t m, double k_percent);

}  // namespace inkpark
