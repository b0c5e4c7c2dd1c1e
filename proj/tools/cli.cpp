#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "inkpark/evaluation.hpp"
#include "inkpark/kinematics.hpp"
#include "inkpark/parallel.hpp"
#include "inkpark/report.hpp"
#include "inkpark/signal_io.hpp"
#include "inkpark/stats_agg.hpp"
#include "inkpark/synth_cohort.hpp"
#include "json.hpp"

namespace inkpark {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  if (!fs::exists(p)) throw CliError("file not found: " + p.string());
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CliError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot write " + p.string());
  out << text;
}

std::uint64_t parse_seed(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw CliError(std::string(what) + ": not an unsigned integer seed: '" + s + "'");
  return v;
}

// --seed wins, then INKPARK_SEED, then 0.
struct SeedOption {
  std::string flag;
  std::uint64_t resolve(std::string& source) const {
    if (!flag.empty()) {
      source = "flag";
      return parse_seed(flag, "--seed");
    }
    if (const char* env = std::getenv("INKPARK_SEED"); env && *env) {
      source = "env";
      return parse_seed(env, "INKPARK_SEED");
    }
    source = "default";
    return 0;
  }
};

struct PipelineFlags {
  SeedOption seed;
  std::string selection = "topk_then_sffs";
  std::string scope = "per_fold";
  double k_percent = 10.0;
  std::size_t sffs_max = 10;
  std::size_t budget = 100;
  std::size_t trees = 200;
  std::size_t inner_folds = 5;
  std::vector<std::string> exclude;

  void add_to(CLI::App* app, bool with_scope) {
    app->add_option("--seed", seed.flag, "Run seed (default: $INKPARK_SEED, else 0)");
    app->add_option("--selection", selection, "none | topk | sffs | topk_then_sffs")->capture_default_str();
    if (with_scope)
      app->add_option("--selection-scope", scope, "per_fold | global (global leaks the held-out row)")
          ->capture_default_str();
    app->add_option("--k-percent", k_percent, "Top-k% kept by the forest filter")->capture_default_str();
    app->add_option("--sffs-max", sffs_max, "Largest subset SFFS may grow")->capture_default_str();
    app->add_option("--budget", budget, "Hyperparameter search trials")->capture_default_str();
    app->add_option("--trees", trees, "Random forest size")->capture_default_str();
    app->add_option("--inner-folds", inner_folds, "Inner CV folds for SFFS and search")->capture_default_str();
    app->add_option("--exclude", exclude, "Feature names never used for training");
  }

  PipelineConfig config(std::string& seed_source) const {
    PipelineConfig c;
    c.seed = seed.resolve(seed_source);
    c.selection = parse_selection_mode(selection);
    c.scope = parse_selection_scope(scope);
    c.k_percent = k_percent;
    c.sffs_max_size = sffs_max;
    c.search_budget = budget;
    c.forest_trees = trees;
    c.inner_folds = inner_folds;
    c.exclude_features = exclude;
    validate_pipeline_config(c);
    return c;
  }
};

Dataset load_dataset(const fs::path& p) {
  if (!fs::exists(p)) throw CliError("file not found: " + p.string());
  FeatureMatrix m = read_feature_csv(p);
  return {m.task_id, m.names, std::move(m.values), std::move(m.labels), std::move(m.subjects)};
}

std::string registry_tag(const std::vector<std::string>& names) {
  return names == default_registry().names() ? std::string(kRegistryVersion) : std::string("custom");
}

// Writes the document to --out, or to stdout when no path was given.
void emit(const std::string& text, const std::string& out_path, std::ostream& out, const json& summary) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
    out << summary.dump() << "\n";
  }
}

unsigned jobs_or_default(unsigned jobs) { return jobs == 0 ? default_jobs() : jobs; }

// ---- subcommands -------------------------------------------------------------

struct SynthArgs {
  std::string preset = "separable";
  std::string config_path;
  std::size_t n_pd = 40, n_hc = 40;
  std::vector<int> tasks;
  SeedOption seed;
  double rate = kDefaultSamplingRateHz;
  std::string out;
};

int run_synth(const SynthArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  CohortSpec spec;
  if (!a.config_path.empty()) spec = parse_cohort_spec_json(read_file(a.config_path));
  if (a.config_path.empty() || cmd.count("--preset") > 0) spec.severity = severity_preset(a.preset);
  if (a.config_path.empty() || cmd.count("--n-pd")) spec.n_pd = a.n_pd;
  if (a.config_path.empty() || cmd.count("--n-hc")) spec.n_hc = a.n_hc;
  if (a.config_path.empty() || cmd.count("--rate")) spec.sampling_rate_hz = a.rate;
  if (!a.tasks.empty()) {
    spec.tasks.clear();
    for (int t : a.tasks) spec.tasks.push_back(task_template(t));
  }
  std::string source;
  if (a.config_path.empty() || !a.seed.flag.empty() || std::getenv("INKPARK_SEED")) spec.seed = a.seed.resolve(source);
  validate_cohort_spec(spec);

  const GeneratedCohort cohort = generate_cohort(spec);
  write_cohort(cohort, a.out);
  write_file(fs::path(a.out) / "cohort_spec.json", format_cohort_spec_json(spec));
  err << "wrote " << cohort.trials.size() << " trials to " << a.out << "\n";
  out << json{{"manifest", (fs::path(a.out) / "manifest.json").string()},
              {"trials", cohort.trials.size()},
              {"n_pd", spec.n_pd},
              {"n_hc", spec.n_hc},
              {"seed", spec.seed}}
             .dump()
      << "\n";
  return 0;
}

struct ExtractArgs {
  std::string manifest;
  std::string out;
  std::string columns;
  std::vector<int> tasks;
  unsigned jobs = 0;
};

int run_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::exists(a.manifest)) throw CliError("file not found: " + a.manifest);
  const ColumnOrder order = a.columns.empty() ? kDefaultColumnOrder : parse_column_order(a.columns);
  const Cohort cohort = load_cohort(a.manifest, order);
  if (cohort.trials.empty()) throw CliError("manifest lists no trials");
  fs::create_directories(a.out);
  json files = json::array();
  for (int id : cohort.task_ids()) {
    if (!a.tasks.empty() && std::find(a.tasks.begin(), a.tasks.end(), id) == a.tasks.end()) continue;
    const auto trials = cohort.task(id);
    const FeatureMatrix m = build_feature_matrix(trials, default_registry(), jobs_or_default(a.jobs));
    const fs::path csv = fs::path(a.out) / ("task" + std::to_string(id) + ".csv");
    write_feature_csv(m, csv);
    write_file(fs::path(a.out) / ("task" + std::to_string(id) + ".provenance.json"), format_provenance_json(m));
    err << "task " << id << ": " << m.rows() << " rows, " << m.cols() << " features, " << m.imputed.size()
        << " imputed cells\n";
    files.push_back({{"task_id", id}, {"path", csv.string()}, {"rows", m.rows()}, {"imputed", m.imputed.size()}});
  }
  out << json{{"registry_version", std::string(kRegistryVersion)}, {"files", files}}.dump() << "\n";
  return 0;
}

json base_config(const std::string& command, const PipelineConfig& c, const std::string& seed_source) {
  json j = pipeline_config_json(c);
  j["command"] = command;
  j["seed_source"] = seed_source;
  return j;
}

json trace_names_json(const SelectionTrace& t, const std::vector<std::string>& names) {
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

std::vector<std::string> names_of(const std::vector<std::string>& names, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(names.at(i));
  return out;
}

struct FeatureArgs {
  std::string features;
  std::string out;
  std::string trace_out;
  unsigned jobs = 0;
  PipelineFlags pipeline;
};

int run_select(const FeatureArgs& a, std::ostream& out, std::ostream& err) {
  std::string seed_source;
  const PipelineConfig cfg = a.pipeline.config(seed_source);
  const Dataset d = load_dataset(a.features);
  const FoldContext ctx(d.x, d.labels, d.subjects, d.names, cfg.seed);
  const SelectionOutcome sel = select_features(ctx, cfg, jobs_or_default(a.jobs));

  json config = base_config("select", cfg, seed_source);
  config["features_path"] = a.features;
  json doc{{"format", std::string(kReportFormat)},
           {"kind", "select"},
           {"registry_version", registry_tag(d.names)},
           {"config", config},
           {"seeds", {{"run", cfg.seed}}},
           {"task_id", d.task_id},
           {"selection",
            {{"features", names_of(d.names, sel.features)},
             {"topk", names_of(d.names, sel.topk)},
             {"sffs_j", sel.sffs_j},
             {"trace", trace_names_json(sel.trace, d.names)}}}};
  if (!a.trace_out.empty()) write_file(a.trace_out, format_trace_jsonl(sel.trace, d.names));
  err << "selected " << sel.features.size() << " features\n";
  emit(doc.dump(2) + "\n", a.out, out,
       {{"report", a.out}, {"task_id", d.task_id}, {"features", names_of(d.names, sel.features)}});
  return 0;
}

int run_train(const FeatureArgs& a, std::ostream& out, std::ostream& err) {
  std::string seed_source;
  const PipelineConfig cfg = a.pipeline.config(seed_source);
  const Dataset d = load_dataset(a.features);
  const FoldContext ctx(d.x, d.labels, d.subjects, d.names, cfg.seed);
  const FittedPipeline p = fit_pipeline(ctx, cfg, jobs_or_default(a.jobs));
  if (p.constant_label) throw CliError("training data holds a single class");

  json config = base_config("train", cfg, seed_source);
  config["features_path"] = a.features;
  json doc{{"format", "inkpark-model/1"},
           {"kind", "train"},
           {"registry_version", registry_tag(d.names)},
           {"config", config},
           {"seeds", {{"run", cfg.seed}}},
           {"task_id", d.task_id},
           {"features", names_of(d.names, p.features)},
           {"zscore", json::parse(format_zscore_json(p.zscore))},
           {"svm", json::parse(format_svm_json(*p.model))},
           {"search",
            {{"kernel", kernel_json(p.kernel)},
             {"c", p.c},
             {"score", p.search_score},
             {"trial", p.search_trial},
             {"failed_trials", p.failed_trials}}},
           {"trace", trace_names_json(p.selection.trace, d.names)}};
  err << "trained " << kernel_family_name(p.kernel.family) << " SVM on " << p.features.size()
      << " features, inner CV accuracy " << p.search_score << "\n";
  emit(doc.dump(2) + "\n", a.out, out,
       {{"model", a.out}, {"task_id", d.task_id}, {"search_score", p.search_score}});
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> features;
  std::string out;
  std::string cv = "loocv";
  std::size_t k = 10;
  std::string ensemble = "none";
  std::string weights = "accuracy";
  unsigned jobs = 0;
  PipelineFlags pipeline;
};

const char* kGlobalCaveat =
    "selection_scope=global: features were selected on all rows, including every fold's held-out "
    "subject; the accuracy estimate is optimistically biased";

json summary_of(const EvaluationReport& r, const std::string& path) {
  json tasks = json::array();
  for (const auto& t : r.tasks) tasks.push_back({{"task_id", t.task_id}, {"accuracy", t.metrics.accuracy}});
  json s{{"report", path}, {"tasks", tasks}};
  if (r.ensemble) s["ensemble_accuracy"] = r.ensemble->result.metrics.accuracy;
  return s;
}

int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  std::string seed_source;
  const PipelineConfig cfg = a.pipeline.config(seed_source);
  if (a.cv != "loocv" && a.cv != "kfold") throw CliError("--cv must be loocv or kfold");
  if (a.ensemble != "none") parse_ensemble_mode(a.ensemble);
  const WeightMode wm = parse_weight_mode(a.weights);

  EvaluationReport rep;
  rep.kind = "evaluate";
  rep.config = base_config("evaluate", cfg, seed_source);
  rep.config["cv"] = a.cv;
  rep.config["k"] = a.cv == "kfold" ? json(a.k) : json(nullptr);
  rep.config["ensemble"] = a.ensemble;
  rep.config["weights"] = a.weights;
  rep.config["features_paths"] = a.features;
  for (const auto& path : a.features) {
    const Dataset d = load_dataset(path);
    if (rep.registry_version.empty()) rep.registry_version = registry_tag(d.names);
    err << "task " << d.task_id << ": " << d.x.rows() << " rows, " << a.cv << "\n";
    rep.tasks.push_back(a.cv == "loocv" ? loocv_evaluate(d, cfg, jobs_or_default(a.jobs))
                                        : kfold_evaluate(d, a.k, cfg, jobs_or_default(a.jobs)));
    err << "task " << d.task_id << ": accuracy " << rep.tasks.back().metrics.accuracy << "%\n";
  }
  if (a.ensemble != "none") rep.ensemble = ensemble_vote(rep.tasks, parse_ensemble_mode(a.ensemble), wm);
  if (cfg.scope == SelectionScope::Global) {
    rep.warnings.push_back(kGlobalCaveat);
    err << "warning: " << kGlobalCaveat << "\n";
  }
  emit(format_report(rep), a.out, out, summary_of(rep, a.out));
  return 0;
}

struct EnsembleArgs {
  std::vector<std::string> reports;
  std::string mode = "top3";
  std::string weights = "accuracy";
  std::string out;
};

int run_ensemble(const EnsembleArgs& a, std::ostream& out, std::ostream& err) {
  EvaluationReport rep;
  rep.kind = "ensemble";
  json member_configs = json::array();
  std::vector<TaskResult> tasks;
  for (const auto& path : a.reports) {
    EvaluationReport r = parse_report(read_file(path));
    if (rep.registry_version.empty()) rep.registry_version = r.registry_version;
    member_configs.push_back(r.config);
    for (auto& t : r.tasks) tasks.push_back(std::move(t));
  }
  rep.ensemble = ensemble_vote(tasks, parse_ensemble_mode(a.mode), parse_weight_mode(a.weights));
  rep.config = {{"command", "ensemble"},
                {"mode", a.mode},
                {"weights", a.weights},
                {"reports", a.reports},
                {"member_configs", member_configs},
                {"seed", nullptr}};
  for (const auto& m : rep.ensemble->members)
    err << "member task " << m.task_id << ": accuracy " << m.accuracy << "%, weight " << m.weight << "\n";
  err << "ensemble accuracy " << rep.ensemble->result.metrics.accuracy << "%\n";
  emit(format_report(rep), a.out, out, summary_of(rep, a.out));
  return 0;
}

int run_report(const std::vector<std::string>& reports, std::ostream& out) {
  out << "report\tkind\ttask\tcv\tn\taccuracy\tprecision\trecall\tf1\n";
  auto row = [&](const std::string& path, const std::string& kind, const json& t) {
    const auto& c = t.at("counts");
    const auto n = c.at("tp").get<std::size_t>() + c.at("tn").get<std::size_t>() + c.at("fp").get<std::size_t>() +
                   c.at("fn").get<std::size_t>();
    const auto& m = t.at("metrics");
    out << path << '\t' << kind << '\t' << t.at("task_id").get<int>() << '\t' << t.at("cv").get<std::string>()
        << '\t' << n << '\t' << format_double(m.at("accuracy").get<double>()) << '\t'
        << format_double(m.at("precision").get<double>()) << '\t' << format_double(m.at("recall").get<double>())
        << '\t' << format_double(m.at("f1").get<double>()) << '\n';
  };
  for (const auto& path : reports) {
    const json j = json::parse(read_file(path));
    if (j.value("format", std::string()) != kReportFormat) throw CliError(path + ": not an inkpark report");
    const std::string kind = j.at("kind").get<std::string>();
    for (const auto& t : j.at("tasks")) row(path, kind, t);
    if (j.contains("ensemble")) row(path, "ensemble:" + j.at("ensemble").at("mode").get<std::string>(),
                                    j.at("ensemble").at("result"));
  }
  return 0;
}

bool is_validation_error(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const SvmConvergenceError&) {
    return false;
  } catch (const CliError&) {
    return true;
  } catch (const std::invalid_argument&) {
    return true;
  } catch (const SignalError&) {
    return true;
  } catch (const KinematicsError&) {
    return true;
  } catch (const PreprocessError&) {
    return true;
  } catch (const SelectionError&) {
    return true;
  } catch (const EvaluationError&) {
    return true;
  } catch (const SvmError&) {
    return true;
  } catch (const nlohmann::json::exception&) {
    return true;
  } catch (const std::filesystem::filesystem_error&) {
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"inkpark: handwriting kinematics, feature selection and SVM evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a seeded synthetic cohort");
  c_synth->add_option("--preset", synth.preset, "separable | hard | none")->capture_default_str();
  c_synth->add_option("--spec,--config", synth.config_path, "Cohort spec JSON (flags given explicitly override it)");
  c_synth->add_option("--n-pd", synth.n_pd, "PD subjects")->capture_default_str();
  c_synth->add_option("--n-hc", synth.n_hc, "HC subjects")->capture_default_str();
  c_synth->add_option("--tasks", synth.tasks, "Task ids (default 1..8)")->delimiter(',');
  c_synth->add_option("--seed", synth.seed.flag, "Seed (default: $INKPARK_SEED, else 0)");
  c_synth->add_option("--rate", synth.rate, "Sampling rate in Hz")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Extract per-task feature CSVs from a manifest");
  c_extract->add_option("--manifest", extract.manifest, "Cohort manifest JSON")->required();
  c_extract->add_option("--out", extract.out, "Output directory")->required();
  c_extract->add_option("--columns", extract.columns, "Trial file column order, e.g. t,x,y,button,azimuth,altitude,pressure");
  c_extract->add_option("--tasks", extract.tasks, "Only these task ids")->delimiter(',');
  c_extract->add_option("--jobs", extract.jobs, "Worker threads (0 = all cores)");

  FeatureArgs select;
  auto* c_select = app.add_subcommand("select", "Run feature selection on one feature CSV");
  c_select->add_option("--features", select.features, "Feature CSV")->required();
  c_select->add_option("--out", select.out, "Report path (default: stdout)");
  c_select->add_option("--trace-out", select.trace_out, "SFFS trace as JSON lines");
  c_select->add_option("--jobs", select.jobs, "Worker threads (0 = all cores)");
  select.pipeline.add_to(c_select, false);

  FeatureArgs train;
  auto* c_train = app.add_subcommand("train", "Fit the full pipeline on one feature CSV");
  c_train->add_option("--features", train.features, "Feature CSV")->required();
  c_train->add_option("--out", train.out, "Model path (default: stdout)");
  c_train->add_option("--jobs", train.jobs, "Worker threads (0 = all cores)");
  train.pipeline.add_to(c_train, false);

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Cross-validate the pipeline on feature CSVs");
  c_eval->add_option("--features", evaluate.features, "Feature CSVs, one per task")->required()->expected(1, -1);
  c_eval->add_option("--out", evaluate.out, "Report path (default: stdout)");
  c_eval->add_option("--cv", evaluate.cv, "loocv | kfold")->capture_default_str();
  c_eval->add_option("--k", evaluate.k, "Folds for --cv kfold")->capture_default_str();
  c_eval->add_option("--ensemble", evaluate.ensemble, "none | top3 | top5 | all")->capture_default_str();
  c_eval->add_option("--weights", evaluate.weights, "accuracy | uniform")->capture_default_str();
  c_eval->add_option("--jobs", evaluate.jobs, "Worker threads (0 = all cores)");
  evaluate.pipeline.add_to(c_eval, true);

  EnsembleArgs ens;
  auto* c_ens = app.add_subcommand("ensemble", "Weighted vote over evaluate reports");
  c_ens->add_option("--reports", ens.reports, "Evaluate reports")->required()->expected(1, -1);
  c_ens->add_option("--mode", ens.mode, "top3 | top5 | all")->capture_default_str();
  c_ens->add_option("--weights", ens.weights, "accuracy | uniform")->capture_default_str();
  c_ens->add_option("--out", ens.out, "Report path (default: stdout)");

  std::vector<std::string> report_paths;
  auto* c_report = app.add_subcommand("report", "Tabulate metrics from reports (TSV on stdout)");
  c_report->add_option("--reports", report_paths, "Reports")->required()->expected(1, -1);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 1;
  }

  try {
    if (*c_synth) return run_synth(synth, *c_synth, out, err);
    if (*c_extract) return run_extract(extract, out, err);
    if (*c_select) return run_select(select, out, err);
    if (*c_train) return run_train(train, out, err);
    if (*c_eval) return run_evaluate(evaluate, out, err);
    if (*c_ens) return run_ensemble(ens, out, err);
    if (*c_report) return run_report(report_paths, out);
  } catch (const std::exception& e) {
    const bool validation = is_validation_error(std::current_exception());
    err << "error: " << e.what() << "\n";
    return validation ? 1 : 2;
  } catch (...) {
    err << "error: unknown failure\n";
    return 2;
  }
  err << "error: no subcommand\n";
  return 1;
}

}  // namespace inkpark
