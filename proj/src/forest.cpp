#include "inkpark/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "inkpark/parallel.hpp"
#include "inkpark/rng.hpp"

namespace inkpark {

std::vector<double> ImportanceRanking::by_column() const {
  std::vector<double> out(features.size(), 0.0);
  for (const auto& f : features) out.at(f.index) = f.importance;
  return out;
}

namespace {

// Weighted Gini of a node times its weight: w * (1 - p^2 - q^2).
double weighted_gini(double pos, double neg) {
  const double w = pos + neg;
  if (w <= 0) return 0.0;
  return w - (pos * pos + neg * neg) / w;
}

std::uint32_t poisson1(Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-1.0), cdf = p;
  std::uint32_t k = 0;
  while (u >= cdf && k < 64) {
    ++k;
    p /= k;
    cdf += p;
  }
  return k;
}

struct Entry {
  double value;
  double weight;
  int label;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, std::span<const double> w, const ForestConfig& cfg,
              std::size_t mtry, std::uint64_t tree_seed)
      : x_(x), y_(y), w_(w), cfg_(cfg), mtry_(mtry), seed_(tree_seed), gain_(x.cols(), 0.0) {}

  std::vector<double> build() {
    std::vector<std::size_t> root;
    for (std::size_t i = 0; i < x_.rows(); ++i)
      if (w_[i] > 0) root.push_back(i);
    // Explicit stack; node ids follow pre-order so they do not depend on row order.
    struct Pending {
      std::vector<std::size_t> rows;
      std::uint64_t id;
    };
    std::vector<Pending> stack;
    stack.push_back({std::move(root), 0});
    std::uint64_t next_id = 1;
    while (!stack.empty()) {
      Pending node = std::move(stack.back());
      stack.pop_back();
      std::vector<std::size_t> left, right;
      if (!split(node.rows, node.id, left, right)) continue;
      const std::uint64_t lid = next_id++, rid = next_id++;
      stack.push_back({std::move(right), rid});
      stack.push_back({std::move(left), lid});
    }
    return gain_;
  }

 private:
  bool split(const std::vector<std::size_t>& rows, std::uint64_t id, std::vector<std::size_t>& left,
             std::vector<std::size_t>& right) {
    double pos = 0, neg = 0;
    for (std::size_t r : rows) (y_[r] > 0 ? pos : neg) += w_[r];
    if (pos == 0 || neg == 0) return false;
    if (pos + neg < 2.0 * static_cast<double>(cfg_.min_leaf)) return false;
    const double parent = weighted_gini(pos, neg);

    // Feature sample for this node, seeded by (tree, node id).
    const std::size_t m = x_.cols();
    std::vector<std::size_t> feats(m);
    std::iota(feats.begin(), feats.end(), 0);
    Rng rng(derive_seed(seed_, {id}));
    for (std::size_t i = 0; i < mtry_; ++i) std::swap(feats[i], feats[i + rng.below(m - i)]);
    feats.resize(mtry_);
    std::sort(feats.begin(), feats.end());

    bool found = false;
    double best_gain = 0, best_thr = 0;
    std::size_t best_feat = 0;
    std::vector<Entry> entries(rows.size());
    for (std::size_t f : feats) {
      for (std::size_t i = 0; i < rows.size(); ++i) entries[i] = {x_(rows[i], f), w_[rows[i]], y_[rows[i]]};
      std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
      double lp = 0, ln = 0;
      for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        (entries[i].label > 0 ? lp : ln) += entries[i].weight;
        if (entries[i].value == entries[i + 1].value) continue;
        const double lw = lp + ln, rw = pos + neg - lw;
        if (lw < static_cast<double>(cfg_.min_leaf) || rw < static_cast<double>(cfg_.min_leaf)) continue;
        const double g = parent - weighted_gini(lp, ln) - weighted_gini(pos - lp, neg - ln);
        const double thr = entries[i].value + (entries[i + 1].value - entries[i].value) / 2.0;
        // Features are scanned in ascending order and thresholds ascending, so
        // a strict comparison keeps the lowest index / threshold on ties.
        if (!found || g > best_gain) {
          found = true;
          best_gain = g;
          best_thr = thr;
          best_feat = f;
        }
      }
    }
    if (!found) return false;
    gain_[best_feat] += std::max(0.0, best_gain);
    for (std::size_t r : rows) (x_(r, best_feat) <= best_thr ? left : right).push_back(r);
    return true;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::span<const double> w_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  std::uint64_t seed_;
  std::vector<double> gain_;
};

std::uint64_t row_hash(std::span<const double> row, int label) {
  std::string bytes(row.size() * sizeof(double) + sizeof(int), '\0');
  std::memcpy(bytes.data(), row.data(), row.size() * sizeof(double));
  std::memcpy(bytes.data() + row.size() * sizeof(double), &label, sizeof(int));
  return hash_key(bytes);
}

}  // namespace

ImportanceRanking rf_gini_ranking(const Matrix& x, std::span<const int> labels, const ForestConfig& config,
                                  std::span<const std::string> names, std::span<const std::uint64_t> row_keys,
                                  unsigned jobs) {
  const std::size_t n = x.rows(), m = x.cols();
  if (labels.size() != n) throw SelectionError("rf_gini_ranking: row/label count mismatch");
  if (config.n_trees < 1) throw SelectionError("rf_gini_ranking: n_trees must be >= 1");
  if (config.min_leaf < 1) throw SelectionError("rf_gini_ranking: min_leaf must be >= 1");
  if (m == 0) throw SelectionError("rf_gini_ranking: no features");
  if (n < 4) throw SelectionError("rf_gini_ranking: needs at least 4 rows");
  if (!names.empty() && names.size() != m) throw SelectionError("rf_gini_ranking: name count mismatch");
  if (!row_keys.empty() && row_keys.size() != n) throw SelectionError("rf_gini_ranking: row key count mismatch");
  bool pos = false, neg = false;
  for (int v : labels) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw SelectionError("rf_gini_ranking: labels must be +1 or -1");
  }
  if (!pos || !neg) throw SelectionError("rf_gini_ranking: single-class labels");

  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = row_keys.empty() ? row_hash(x.row(i), labels[i]) : row_keys[i];
  const std::size_t mtry =
      config.max_features == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))))
                               : std::min(config.max_features, m);

  std::vector<std::vector<double>> per_tree(config.n_trees);
  parallel_for(config.n_trees, jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, {t});
    std::vector<double> w(n, 1.0);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(tree_seed, {0xb007ULL, keys[i]}));
        w[i] = poisson1(rng);
      }
    }
    per_tree[t] = TreeBuilder(x, labels, w, config, mtry, tree_seed).build();
  });

  std::vector<double> total(m, 0.0);
  for (const auto& g : per_tree) {
    double s = 0;
    for (double v : g) s += v;
    if (s <= 0) continue;
    for (std::size_t f = 0; f < m; ++f) total[f] += g[f] / s;
  }
  double s = 0;
  for (double v : total) s += v;

  ImportanceRanking out;
  out.any_split = s > 0;
  for (std::size_t f = 0; f < m; ++f)
    out.features.push_back({f, names.empty() ? "f" + std::to_string(f) : names[f], s > 0 ? total[f] / s : 0.0});
  std::stable_sort(out.features.begin(), out.features.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
  return out;
}

std::size_t top_k_count(std::size_t m, double k_percent) {
  if (!(k_percent > 0 && k_percent <= 100)) throw SelectionError("top_k_percent: k must be in (0, 100]");
  const double raw = k_percent * static_cast<double>(m) / 100.0;
  // Guard against 0.1 * 30 = 3.0000000000000004 style rounding.
  const auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(count, m == 0 ? 0 : 1, m);
}

std::vector<std::size_t> top_k_percent(const ImportanceRanking& ranking, double k_percent) {
  const std::size_t count = top_k_count(ranking.features.size(), k_percent);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(ranking.features[i].index);
  return out;
}

}  // namespace inkpark
