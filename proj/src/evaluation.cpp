#include "inkpark/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "inkpark/parallel.hpp"
#include "inkpark/rng.hpp"

namespace inkpark {

// ---- metrics ---------------------------------------------------------------

ConfusionCounts confusion_from(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw EvaluationError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] > 0, p = predicted[i] > 0;
    if (t && p) ++c.tp;
    else if (!t && !p) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw EvaluationError("compute_metrics: no predictions");
  auto pct = [](std::size_t num, std::size_t den) {
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.accuracy = pct(c.tp + c.tn, c.total());
  if (c.tp + c.fp == 0) m.precision_undefined = true;
  else m.precision = pct(c.tp, c.tp + c.fp);
  if (c.tp + c.fn == 0) m.recall_undefined = true;
  else m.recall = pct(c.tp, c.tp + c.fn);
  if (2 * c.tp + c.fp + c.fn == 0) m.f1_undefined = true;
  else m.f1 = pct(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return m;
}

// ---- names -----------------------------------------------------------------

std::string_view selection_mode_name(SelectionMode m) {
  switch (m) {
    case SelectionMode::None: return "none";
    case SelectionMode::TopK: return "topk";
    case SelectionMode::Sffs: return "sffs";
    case SelectionMode::TopKThenSffs: return "topk_then_sffs";
  }
  return "?";
}

SelectionMode parse_selection_mode(std::string_view s) {
  for (auto m : {SelectionMode::None, SelectionMode::TopK, SelectionMode::Sffs, SelectionMode::TopKThenSffs})
    if (s == selection_mode_name(m)) return m;
  throw EvaluationError("unknown selection mode '" + std::string(s) + "'");
}

std::string_view selection_scope_name(SelectionScope s) {
  return s == SelectionScope::PerFold ? "per_fold" : "global";
}

SelectionScope parse_selection_scope(std::string_view s) {
  if (s == "per_fold" || s == "per-fold") return SelectionScope::PerFold;
  if (s == "global") return SelectionScope::Global;
  throw EvaluationError("unknown selection scope '" + std::string(s) + "'");
}

std::string_view ensemble_mode_name(EnsembleMode m) {
  switch (m) {
    case EnsembleMode::Top3: return "top3";
    case EnsembleMode::Top5: return "top5";
    case EnsembleMode::All: return "all";
  }
  return "?";
}

EnsembleMode parse_ensemble_mode(std::string_view s) {
  for (auto m : {EnsembleMode::Top3, EnsembleMode::Top5, EnsembleMode::All})
    if (s == ensemble_mode_name(m)) return m;
  throw EvaluationError("unknown ensemble mode '" + std::string(s) + "'");
}

std::string_view weight_mode_name(WeightMode m) { return m == WeightMode::Accuracy ? "accuracy" : "uniform"; }

WeightMode parse_weight_mode(std::string_view s) {
  if (s == "accuracy") return WeightMode::Accuracy;
  if (s == "uniform") return WeightMode::Uniform;
  throw EvaluationError("unknown weight mode '" + std::string(s) + "'");
}

void validate_pipeline_config(const PipelineConfig& c) {
  if (!(c.k_percent > 0 && c.k_percent <= 100)) throw EvaluationError("k_percent must be in (0, 100]");
  if (c.sffs_max_size < 1) throw EvaluationError("sffs max size must be >= 1");
  if (c.search_budget < 1) throw EvaluationError("search budget must be >= 1");
  if (c.forest_trees < 1) throw EvaluationError("forest trees must be >= 1");
  if (c.inner_folds < 2) throw EvaluationError("inner folds must be >= 2");
}

// ---- pipeline --------------------------------------------------------------

namespace {

enum SeedSlot : std::uint64_t { kForestSlot = 1, kSffsSlot = 2, kSearchSlot = 3 };

std::vector<std::size_t> candidate_columns(const FoldContext& ctx, const PipelineConfig& config) {
  std::set<std::string> excluded(config.exclude_features.begin(), config.exclude_features.end());
  for (const auto& e : excluded)
    if (std::find(ctx.names().begin(), ctx.names().end(), e) == ctx.names().end())
      throw EvaluationError("excluded feature '" + e + "' is not a column");
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < ctx.x().cols(); ++c)
    if (!excluded.count(ctx.names()[c])) out.push_back(c);
  if (out.empty()) throw EvaluationError("no candidate features left after exclusions");
  return out;
}

std::vector<std::string> pick(const std::vector<std::string>& v, std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

bool single_class(const std::vector<int>& y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

}  // namespace

SelectionOutcome select_features(const FoldContext& ctx, const PipelineConfig& config, unsigned jobs) {
  validate_pipeline_config(config);
  const auto cand = candidate_columns(ctx, config);
  SelectionOutcome out;
  if (config.selection == SelectionMode::None) {
    out.features = cand;
    return out;
  }
  const Matrix xc = ctx.x().select_columns(cand);
  const Matrix z = apply_zscore(xc, fit_zscore(xc));
  const auto cand_names = pick(ctx.names(), cand);

  // Positions within `cand` offered to SFFS.
  std::vector<std::size_t> pool(cand.size());
  std::iota(pool.begin(), pool.end(), 0);
  if (config.selection == SelectionMode::TopK || config.selection == SelectionMode::TopKThenSffs) {
    ForestConfig fc;
    fc.n_trees = config.forest_trees;
    fc.seed = derive_seed(ctx.seed(), {kForestSlot});
    std::vector<std::uint64_t> keys;
    for (const auto& s : ctx.subjects()) keys.push_back(hash_key(s));
    const auto ranking = rf_gini_ranking(z, ctx.labels(), fc, cand_names, keys, jobs);
    pool = top_k_percent(ranking, config.k_percent);
    for (std::size_t p : pool) out.topk.push_back(cand[p]);
    if (config.selection == SelectionMode::TopK) {
      out.features = out.topk;
      return out;
    }
  }
  const Matrix zp = z.select_columns(pool);
  const auto j = inner_cv_evaluator(zp, ctx.labels(), derive_seed(ctx.seed(), {kSffsSlot}), config.inner_folds);
  SffsResult r = sffs(pool.size(), j, config.sffs_max_size, jobs);
  // Report columns of the full matrix rather than pool positions.
  for (auto& step : r.trace.steps) {
    step.feature = cand[pool[step.feature]];
    for (auto& f : step.subset) f = cand[pool[f]];
  }
  for (std::size_t p : r.subset) out.features.push_back(cand[pool[p]]);
  std::sort(out.features.begin(), out.features.end());
  out.trace = std::move(r.trace);
  out.sffs_j = r.j;
  return out;
}

SvmPrediction FittedPipeline::predict(std::span<const double> full_row) const {
  if (constant_label) return {*constant_label, static_cast<double>(*constant_label)};
  std::vector<double> sel;
  sel.reserve(features.size());
  for (std::size_t f : features) sel.push_back(full_row[f]);
  Matrix one(0, sel.size());
  one.append_row(sel);
  const Matrix z = apply_zscore(one, zscore);
  return inkpark::predict(*model, z.row(0));
}

FittedPipeline fit_pipeline(const FoldContext& ctx, const PipelineConfig& config, unsigned jobs,
                            const std::vector<std::size_t>* fixed_features) {
  validate_pipeline_config(config);
  if (ctx.x().rows() != ctx.labels().size()) throw EvaluationError("fold: row/label count mismatch");
  FittedPipeline fp;
  if (ctx.labels().empty()) throw EvaluationError("fold: empty training partition");
  if (single_class(ctx.labels())) {
    // Nothing to learn; fall back to the only label seen.
    fp.constant_label = ctx.labels().front();
    if (fixed_features) fp.features = *fixed_features;
    return fp;
  }
  if (fixed_features) {
    fp.features = *fixed_features;
  } else {
    fp.selection = select_features(ctx, config, jobs);
    fp.features = fp.selection.features;
  }
  const Matrix xs = ctx.x().select_columns(fp.features);
  fp.zscore = fit_zscore(xs, pick(ctx.names(), fp.features));
  const Matrix z = apply_zscore(xs, fp.zscore);

  SearchSpace space;
  space.budget = config.search_budget;
  space.seed = derive_seed(ctx.seed(), {kSearchSlot});
  space.inner_folds = config.inner_folds;
  const SearchResult sr = hyperparameter_search(z, ctx.labels(), space, jobs);
  for (const auto& t : sr.history) fp.failed_trials += t.failed;

  // Best trial first; if its final fit does not converge, fall back down the list.
  std::vector<const SearchTrial*> order;
  for (const auto& t : sr.history)
    if (!t.failed) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const SearchTrial* a, const SearchTrial* b) { return a->score > b->score; });
  for (const SearchTrial* t : order) {
    try {
      fp.model = train_svm(z, ctx.labels(), t->c, t->kernel);
    } catch (const SvmConvergenceError&) {
      ++fp.failed_trials;
      continue;
    }
    fp.kernel = t->kernel;
    fp.c = t->c;
    fp.search_score = t->score;
    fp.search_trial = t->index;
    return fp;
  }
  throw SvmConvergenceError("no searched configuration could be trained on the full fold");
}

// ---- harnesses -------------------------------------------------------------

namespace {

void check_dataset(const Dataset& d) {
  if (d.x.rows() != d.labels.size() || d.x.rows() != d.subjects.size())
    throw EvaluationError("dataset: rows, labels and subjects differ in length");
  if (d.names.size() != d.x.cols()) throw EvaluationError("dataset: names do not match columns");
  for (int v : d.labels)
    if (v != 1 && v != -1) throw EvaluationError("dataset: labels must be +1 or -1");
  std::set<std::string> seen;
  for (const auto& s : d.subjects)
    if (!seen.insert(s).second) throw EvaluationError("dataset: duplicate subject '" + s + "'");
}

FoldContext train_context(const Dataset& d, std::span<const std::size_t> train, std::uint64_t seed) {
  std::vector<int> y;
  std::vector<std::string> s;
  for (std::size_t i : train) {
    y.push_back(d.labels[i]);
    s.push_back(d.subjects[i]);
  }
  return FoldContext(d.x.select_rows(train), std::move(y), std::move(s), d.names, seed);
}

TaskResult run_folds(const Dataset& d, const std::vector<std::size_t>& fold_of, std::size_t n_folds,
                     const PipelineConfig& config, unsigned jobs, std::string cv) {
  TaskResult res;
  res.task_id = d.task_id;
  res.cv = std::move(cv);
  res.k = n_folds;
  res.feature_names = d.names;

  std::vector<std::size_t> global;
  const std::vector<std::size_t>* fixed = nullptr;
  if (config.scope == SelectionScope::Global && config.selection != SelectionMode::None) {
    std::vector<std::size_t> all(d.x.rows());
    std::iota(all.begin(), all.end(), 0);
    const FoldContext ctx = train_context(d, all, derive_seed(config.seed, {0x610ba1ULL}));
    global = select_features(ctx, config, jobs).features;
    fixed = &global;
    res.global_features = pick(d.names, global);
  }

  std::vector<FittedPipeline> fitted(n_folds);
  std::vector<std::uint64_t> seeds(n_folds);
  parallel_for(n_folds, jobs, [&](std::size_t f) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != f) train.push_back(i);
    seeds[f] = derive_seed(config.seed, {f});
    fitted[f] = fit_pipeline(train_context(d, train, seeds[f]), config, 1, fixed);
  });

  res.folds.resize(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldRecord& rec = res.folds[f];
    const FittedPipeline& p = fitted[f];
    rec.fold = f;
    rec.seed = seeds[f];
    rec.features = pick(d.names, p.features);
    rec.kernel = p.kernel;
    rec.c = p.c;
    rec.search_score = p.search_score;
    rec.failed_trials = p.failed_trials;
    rec.single_class = p.constant_label.has_value();
    rec.trace = p.selection.trace;
    res.single_class_folds += rec.single_class;
  }
  std::vector<int> truth, pred;
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    const std::size_t f = fold_of[i];
    const SvmPrediction p = fitted[f].predict(d.x.row(i));
    res.folds[f].test_subjects.push_back(d.subjects[i]);
    res.predictions.push_back({d.subjects[i], d.labels[i], p.label, p.decision, f});
    truth.push_back(d.labels[i]);
    pred.push_back(p.label);
  }
  res.counts = confusion_from(truth, pred);
  res.metrics = compute_metrics(res.counts);
  return res;
}

}  // namespace

TaskResult loocv_evaluate(const Dataset& data, const PipelineConfig& config, unsigned jobs) {
  validate_pipeline_config(config);
  check_dataset(data);
  if (data.x.rows() < 3) throw EvaluationError("loocv needs at least 3 rows");
  std::vector<std::size_t> fold_of(data.x.rows());
  std::iota(fold_of.begin(), fold_of.end(), 0);
  return run_folds(data, fold_of, data.x.rows(), config, jobs, "loocv");
}

TaskResult kfold_evaluate(const Dataset& data, std::size_t k, const PipelineConfig& config, unsigned jobs) {
  validate_pipeline_config(config);
  check_dataset(data);
  if (k < 2) throw EvaluationError("k-fold needs k >= 2");
  if (k > data.x.rows()) throw EvaluationError("k-fold: k exceeds the number of rows");
  const auto fold_of = stratified_folds(data.labels, k, derive_seed(config.seed, {0xf01dULL}));
  for (std::size_t f = 0; f < k; ++f) {
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != f) (data.labels[i] > 0 ? pos : neg) = true;
    if (!pos || !neg) throw EvaluationError("k-fold: training fold " + std::to_string(f) + " lacks a class");
  }
  return run_folds(data, fold_of, k, config, jobs, "kfold");
}

// ---- ensemble --------------------------------------------------------------

int weighted_vote(std::span<const int> outputs, std::span<const double> weights) {
  if (outputs.size() != weights.size()) throw EvaluationError("vote: outputs and weights differ in length");
  long double pos = 0, neg = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!(weights[i] >= 0)) throw EvaluationError("vote: weights must be >= 0");
    (outputs[i] > 0 ? pos : neg) += weights[i];
  }
  // sums within rounding of each other count as the tie, so rescaled weights vote the same
  if (std::abs(pos - neg) <= 1e-12L * (pos + neg)) return 1;
  return pos > neg ? 1 : -1;
}

namespace {

std::size_t correct(const TaskResult& r) { return r.counts.tp + r.counts.tn; }

}  // namespace

std::vector<std::size_t> choose_members(std::span<const TaskResult> results, EnsembleMode mode) {
  const std::size_t want = mode == EnsembleMode::Top3 ? 3 : mode == EnsembleMode::Top5 ? 5 : results.size();
  if (results.empty()) throw EvaluationError("ensemble: no member results");
  if (results.size() < want)
    throw EvaluationError("ensemble: mode " + std::string(ensemble_mode_name(mode)) + " needs " +
                          std::to_string(want) + " members, got " + std::to_string(results.size()));
  std::set<int> ids;
  for (const auto& r : results) {
    if (r.counts.total() == 0) throw EvaluationError("ensemble: member without predictions");
    if (!ids.insert(r.task_id).second)
      throw EvaluationError("ensemble: task " + std::to_string(r.task_id) + " given twice");
  }
  std::vector<std::size_t> idx(results.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    // Accuracy as exact fractions.
    const auto lhs = correct(results[a]) * results[b].counts.total();
    const auto rhs = correct(results[b]) * results[a].counts.total();
    if (lhs != rhs) return lhs > rhs;
    return results[a].task_id < results[b].task_id;
  });
  idx.resize(want);
  return idx;
}

EnsembleResult ensemble_vote(std::span<const TaskResult> results, EnsembleMode mode, WeightMode weights) {
  const auto chosen = choose_members(results, mode);
  EnsembleResult out;
  out.mode = mode;
  out.weights = weights;

  std::vector<std::map<std::string, int>> votes;
  bool same_total = true;
  for (std::size_t i : chosen) {
    const TaskResult& r = results[i];
    const double acc = compute_metrics(r.counts).accuracy;
    out.members.push_back({r.task_id, acc, weights == WeightMode::Uniform ? 1.0 : acc / 100.0});
    std::map<std::string, int> m;
    for (const auto& p : r.predictions) m[p.subject] = p.predicted;
    votes.push_back(std::move(m));
    same_total = same_total && r.counts.total() == results[chosen.front()].counts.total();
  }

  const TaskResult& ref = results[chosen.front()];
  for (std::size_t m = 0; m < chosen.size(); ++m)
    if (votes[m].size() != ref.predictions.size())
      throw EvaluationError("ensemble: task " + std::to_string(results[chosen[m]].task_id) +
                            " covers a different subject set");
  out.result.task_id = 0;
  out.result.cv = "ensemble";
  std::vector<int> truth, pred;
  std::vector<int> outputs(chosen.size());
  for (const auto& p : ref.predictions) {
    for (std::size_t m = 0; m < chosen.size(); ++m) {
      auto it = votes[m].find(p.subject);
      if (it == votes[m].end())
        throw EvaluationError("ensemble: subject '" + p.subject + "' missing from task " +
                              std::to_string(results[chosen[m]].task_id));
      outputs[m] = it->second;
    }
    double sum = 0;
    for (std::size_t m = 0; m < chosen.size(); ++m) sum += out.members[m].weight * outputs[m];
    int label;
    if (weights == WeightMode::Accuracy && same_total) {
      // Common denominator: vote on the integer correct counts so ties are exact.
      long long s = 0;
      for (std::size_t m = 0; m < chosen.size(); ++m)
        s += static_cast<long long>(correct(results[chosen[m]])) * outputs[m];
      label = s >= 0 ? 1 : -1;
    } else {
      std::vector<double> w;
      for (const auto& mem : out.members) w.push_back(mem.weight);
      label = weighted_vote(outputs, w);
    }
    out.result.predictions.push_back({p.subject, p.truth, label, sum, 0});
    truth.push_back(p.truth);
    pred.push_back(label);
  }
  out.result.counts = confusion_from(truth, pred);
  out.result.metrics = compute_metrics(out.result.counts);
  return out;
}

}  // namespace inkpark
