#include "inkpark/sffs.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>

#include "inkpark/parallel.hpp"
#include "inkpark/search.hpp"
#include "inkpark/svm.hpp"
#include "json.hpp"

namespace inkpark {

namespace {

constexpr double kNone = -std::numeric_limits<double>::infinity();

class CachedJ {
 public:
  CachedJ(const SubsetEvaluator& j, unsigned jobs) : j_(j), jobs_(jobs) {}

  // Scores each subset; fresh ones are evaluated concurrently.
  std::vector<double> score(const std::vector<std::vector<std::size_t>>& subsets) {
    std::vector<double> out(subsets.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      auto it = cache_.find(subsets[i]);
      if (it != cache_.end()) out[i] = it->second;
      else todo.push_back(i);
    }
    parallel_for(todo.size(), jobs_, [&](std::size_t t) { out[todo[t]] = j_(subsets[todo[t]]); });
    for (std::size_t i : todo) cache_.emplace(subsets[i], out[i]);
    return out;
  }

  std::size_t size() const { return cache_.size(); }

 private:
  const SubsetEvaluator& j_;
  unsigned jobs_;
  std::map<std::vector<std::size_t>, double> cache_;
};

std::vector<std::size_t> with(const std::vector<std::size_t>& s, std::size_t f) {
  std::vector<std::size_t> out = s;
  out.insert(std::upper_bound(out.begin(), out.end(), f), f);
  return out;
}

std::vector<std::size_t> without(const std::vector<std::size_t>& s, std::size_t f) {
  std::vector<std::size_t> out;
  for (std::size_t v : s)
    if (v != f) out.push_back(v);
  return out;
}

void check_args(std::size_t pool_size, std::size_t max_subset_size) {
  if (pool_size == 0) throw SelectionError("sffs: empty feature pool");
  if (max_subset_size < 1) throw SelectionError("sffs: max_subset_size must be >= 1");
}

}  // namespace

std::string_view sffs_action_name(SffsStep::Action a) { return a == SffsStep::Action::Add ? "add" : "remove"; }

SffsResult sffs(std::size_t pool_size, const SubsetEvaluator& j, std::size_t max_subset_size, unsigned jobs) {
  check_args(pool_size, max_subset_size);
  const std::size_t cap = std::min(pool_size, max_subset_size);
  CachedJ cj(j, jobs);
  std::vector<double> best(cap + 1, kNone);
  std::vector<std::vector<std::size_t>> best_subset(cap + 1);
  SffsResult out;
  std::vector<std::size_t> x;
  double jx = kNone;

  while (x.size() < cap) {
    std::vector<std::size_t> cand;
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t f = 0; f < pool_size; ++f)
      if (!std::binary_search(x.begin(), x.end(), f)) {
        cand.push_back(f);
        subsets.push_back(with(x, f));
      }
    const auto scores = cj.score(subsets);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[arg]) arg = i;
    const std::size_t k = x.size() + 1;
    if (!(scores[arg] > best[k])) break;
    x = subsets[arg];
    jx = scores[arg];
    best[k] = jx;
    best_subset[k] = x;
    out.trace.steps.push_back({SffsStep::Action::Add, cand[arg], jx, x});

    // Conditional exclusion.
    const std::size_t just_added = cand[arg];
    bool first = true;
    while (x.size() > 2) {
      std::vector<std::size_t> rem;
      std::vector<std::vector<std::size_t>> reduced;
      for (std::size_t f : x) {
        if (first && f == just_added) continue;
        rem.push_back(f);
        reduced.push_back(without(x, f));
      }
      const auto rs = cj.score(reduced);
      std::size_t r = 0;
      for (std::size_t i = 1; i < rs.size(); ++i)
        if (rs[i] > rs[r]) r = i;
      const std::size_t kk = x.size() - 1;
      if (!(rs[r] > jx && rs[r] > best[kk])) break;
      x = reduced[r];
      jx = rs[r];
      best[kk] = jx;
      best_subset[kk] = x;
      out.trace.steps.push_back({SffsStep::Action::Remove, rem[r], jx, x});
      first = false;
    }
  }

  // Best J ever seen; ascending size keeps the smaller subset on ties.
  for (std::size_t k = 1; k <= cap; ++k) {
    if (best[k] == kNone) continue;
    if (out.subset.empty() || best[k] > out.j) {
      out.j = best[k];
      out.subset = best_subset[k];
    }
  }
  out.evaluations = cj.size();
  return out;
}

SffsResult greedy_forward(std::size_t pool_size, const SubsetEvaluator& j, std::size_t max_subset_size) {
  check_args(pool_size, max_subset_size);
  const std::size_t cap = std::min(pool_size, max_subset_size);
  SffsResult out;
  std::vector<std::size_t> x;
  bool have = false;
  while (x.size() < cap) {
    double best = kNone;
    std::size_t arg = 0;
    std::vector<std::size_t> best_s;
    for (std::size_t f = 0; f < pool_size; ++f) {
      if (std::binary_search(x.begin(), x.end(), f)) continue;
      auto s = with(x, f);
      const double v = j(s);
      ++out.evaluations;
      if (v > best) best = v, arg = f, best_s = std::move(s);
    }
    x = best_s;
    out.trace.steps.push_back({SffsStep::Action::Add, arg, best, x});
    if (!have || best > out.j) {
      have = true;
      out.j = best;
      out.subset = x;
    }
  }
  return out;
}

SubsetEvaluator inner_cv_evaluator(const Matrix& x, std::span<const int> y, std::uint64_t seed,
                                   std::size_t folds) {
  auto fold_ids = std::make_shared<std::vector<std::size_t>>(stratified_folds(y, folds, seed));
  auto labels = std::make_shared<std::vector<int>>(y.begin(), y.end());
  return [&x, fold_ids, labels](std::span<const std::size_t> subset) {
    if (subset.empty()) throw SelectionError("inner_cv_evaluator: empty subset");
    const std::size_t n = x.rows();
    const double gamma = 1.0 / static_cast<double>(subset.size());
    Matrix g(n, n);
    for (std::size_t a = 0; a < n; ++a) {
      g(a, a) = 1.0;
      for (std::size_t b = a + 1; b < n; ++b) {
        double d2 = 0;
        for (std::size_t f : subset) {
          const double d = x(a, f) - x(b, f);
          d2 += d * d;
        }
        g(a, b) = g(b, a) = std::exp(-gamma * d2);
      }
    }
    return cv_accuracy_gram(g, *labels, *fold_ids, 1.0);
  };
}

std::string format_trace_jsonl(const SelectionTrace& trace, std::span<const std::string> names) {
  auto name = [&](std::size_t f) -> nlohmann::json {
    if (names.empty()) return f;
    return names[f];
  };
  std::string out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    nlohmann::json subset = nlohmann::json::array();
    for (std::size_t f : s.subset) subset.push_back(name(f));
    nlohmann::json line{{"step", i},
                        {"action", std::string(sffs_action_name(s.action))},
                        {"feature", name(s.feature)},
                        {"j", s.j},
                        {"size", s.size()},
                        {"subset", subset}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace inkpark
