#include "agibench/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <variant>

#include <json.hpp>

#include "agibench/rocket.hpp"
#include "csv.hpp"

namespace agibench {

using ojson = nlohmann::ordered_json;

std::size_t SampleTable::positives() const {
  return static_cast<std::size_t>(std::count(label.begin(), label.end(), std::uint8_t{1}));
}

namespace {

struct Prepared {
  SampleTable samples;
  // Tabular and anomaly: one row per sample. Sequence: one row per window.
  FeatureMatrix features;
  std::vector<std::vector<std::size_t>> sequence;  // per sample, rows of `features`
};

Prepared prepare(const RunConfig& config, const CohortStore& cohort, int threads) {
  Prepared p;
  const WindowSet ws = build_windows(cohort, config.resolution_hours);
  p.samples.windows = ws.windows.size();
  p.samples.excluded_gap = ws.excluded_gap;
  auto add_sample = [&](const Window& w, bool label) {
    p.samples.participant.push_back(*w.participant);
    p.samples.start.push_back(w.start);
    p.samples.label.push_back(label ? 1 : 0);
  };
  if (config.formulation == Formulation::sequence_binary) {
    const auto seqs = make_sequences(ws, config.sequence_n);
    p.samples.excluded_history = ws.labeled_count() - seqs.size();
    std::vector<std::size_t> all(ws.windows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    p.features = extract_features(ws, all, config.context, threads);
    for (const auto& s : seqs) {
      add_sample(ws.windows[s.last()], s.label);
      p.sequence.push_back(s.windows);
    }
  } else {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ws.windows.size(); ++i) {
      if (ws.windows[i].has_label) idx.push_back(i);
    }
    p.features = extract_features(ws, idx, config.context, threads);
    for (auto i : idx) add_sample(ws.windows[i], ws.windows[i].label_next);
  }
  const std::size_t pos = p.samples.positives();
  if (pos == 0 || pos == p.samples.size()) {
    fail(ErrorKind::data, "single-class-cohort",
         "the cohort yields " + std::to_string(p.samples.size()) + " samples with " + std::to_string(pos) +
             " positives; both classes are required");
  }
  return p;
}

Labels take_labels(const Labels& labels, std::span<const std::size_t> idx) {
  Labels out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

struct Fitted {
  FittedClassifier model;
  std::size_t rows = 0;
  std::uint64_t train_hash = 0;
};

std::uint64_t hash_training(const Matrix& x, std::span<const std::uint8_t> y) {
  std::uint64_t h = hash_values(x.data());
  return fnv1a(std::string_view(reinterpret_cast<const char*>(y.data()), y.size()), h);
}

Fitted fit_supervised(const RunConfig& config, const ClassifierSpec& spec, const Matrix& x, const Labels& y,
                      std::uint64_t seed, int threads) {
  switch (config.imbalance) {
    case Imbalance::class_weights: {
      const auto w = sample_weights(y, class_weights(y));
      return {fit_classifier(spec, x, y, w), x.rows(), hash_training(x, y)};
    }
    case Imbalance::smote: {
      const auto s = smote_oversample(x, y, config.smote_k, seed, threads);
      return {fit_classifier(spec, s.rows, s.labels), s.rows.rows(), hash_training(s.rows, s.labels)};
    }
    case Imbalance::none: break;
  }
  return {fit_classifier(spec, x, y), x.rows(), hash_training(x, y)};
}

using ModelChoice = std::variant<ClassifierSpec, AnomalySpec>;

struct FoldOutput {
  FoldResult result;
  std::vector<double> scores;
  std::vector<std::uint8_t> predicted;
};

std::vector<Matrix> build_series(const Matrix& z, const std::vector<std::vector<std::size_t>>& seq,
                                 std::span<const std::size_t> samples) {
  std::vector<Matrix> out;
  out.reserve(samples.size());
  for (auto s : samples) out.push_back(z.select_rows(seq[s]));
  return out;
}

void fill_fold_metrics(FoldResult& r, std::span<const double> scores, std::span<const std::uint8_t> predicted,
                       const Labels& y) {
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) (predicted[i] ? tp : fn)++;
    else (predicted[i] ? fp : tn)++;
  }
  r.test_positives = tp + fn;
  if (tp + fn > 0) r.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (tn + fp > 0) r.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
  if (tp + fn > 0) r.auc_pr = auc_pr(scores, y);
  if (tp + fn > 0 && tn + fp > 0) r.auc_roc = auc_roc(scores, y);
}

FoldOutput evaluate_fold(const RunConfig& config, const Prepared& p, const ModelChoice& choice, const Fold& fold,
                         const KernelBank* bank, std::uint64_t seed, int threads) {
  FoldOutput out;
  out.result.tag = fold.tag;
  out.result.train_samples = fold.train.size();
  out.result.test_samples = fold.test.size();
  const Labels ytr = take_labels(p.samples.label, fold.train);
  const Labels yte = take_labels(p.samples.label, fold.test);

  if (const auto* anomaly = std::get_if<AnomalySpec>(&choice)) {
    std::vector<std::size_t> normal;
    for (auto i : fold.train) {
      if (!p.samples.label[i]) normal.push_back(i);
    }
    const PreprocessorState pre = fit_preprocessor(p.features.select_rows(normal));
    const Matrix xn = apply_preprocessor(pre, p.features.select_rows(normal));
    const Matrix xte = apply_preprocessor(pre, p.features.select_rows(fold.test));
    AnomalyModel model;
    switch (anomaly->kind) {
      case AnomalyKind::isolation_forest: model = fit_iforest(xn, anomaly->forest, seed, threads); break;
      case AnomalyKind::local_outlier_factor: model = fit_lof(xn, anomaly->lof_k, threads); break;
      case AnomalyKind::one_class_kernel: model = fit_one_class_kernel(xn, anomaly->one_class, threads); break;
    }
    const AnomalyScores s = anomaly_score(model, xte, threads);
    out.scores = s.scores;
    out.predicted = s.flagged;
    out.result.threshold = s.threshold;
    out.result.train_rows_fitted = xn.rows();
    out.result.train_hash = hash_training(xn, take_labels(p.samples.label, normal));
    out.result.preprocessor_hash = pre.hash();
    for (auto c : pre.all_missing) out.result.all_missing.push_back(p.features.names[c]);
    out.result.model_hash = fnv1a(format_double(model.threshold));
    for (double v : anomaly_raw_scores(model, xn, threads)) out.result.model_hash = fnv1a(format_double(v), out.result.model_hash);
  } else {
    const auto& spec = std::get<ClassifierSpec>(choice);
    Matrix xtr, xte;
    PreprocessorState pre;
    if (bank) {
      std::vector<std::size_t> windows;
      for (auto s : fold.train) windows.insert(windows.end(), p.sequence[s].begin(), p.sequence[s].end());
      std::sort(windows.begin(), windows.end());
      windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
      pre = fit_preprocessor(p.features.select_rows(windows));
      const Matrix z = apply_preprocessor(pre, p.features);
      xtr = rocket_transform_batch(*bank, build_series(z, p.sequence, fold.train), threads);
      xte = rocket_transform_batch(*bank, build_series(z, p.sequence, fold.test), threads);
    } else {
      const FeatureMatrix train = p.features.select_rows(fold.train);
      pre = fit_preprocessor(train);
      xtr = apply_preprocessor(pre, train);
      xte = apply_preprocessor(pre, p.features.select_rows(fold.test));
    }
    Fitted fitted = fit_supervised(config, spec, xtr, ytr, seed, threads);
    fitted.model.fold = fold.tag;
    out.scores = predict_proba(fitted.model, xte);
    out.predicted.resize(out.scores.size());
    for (std::size_t i = 0; i < out.scores.size(); ++i) out.predicted[i] = out.scores[i] > config.threshold;
    out.result.threshold = config.threshold;
    out.result.train_rows_fitted = fitted.rows;
    out.result.train_hash = fitted.train_hash;
    out.result.preprocessor_hash = pre.hash();
    for (auto c : pre.all_missing) out.result.all_missing.push_back(p.features.names[c]);
    out.result.model_hash = model_hash(fitted.model);
  }
  fill_fold_metrics(out.result, out.scores, out.predicted, yte);
  return out;
}

std::string choice_name(const RunConfig& config, const ModelChoice& c) {
  if (const auto* a = std::get_if<AnomalySpec>(&c)) return std::string(anomaly_name(a->kind));
  const std::string base(classifier_name(std::get<ClassifierSpec>(c).kind));
  return config.formulation == Formulation::sequence_binary ? "rocket+" + base : base;
}

std::string choice_spec(const RunConfig& config, const ModelChoice& c) {
  if (const auto* a = std::get_if<AnomalySpec>(&c)) {
    switch (a->kind) {
      case AnomalyKind::isolation_forest:
        return "kind=isolation-forest;trees=" + std::to_string(a->forest.trees) +
               ";subsample=" + std::to_string(a->forest.subsample);
      case AnomalyKind::local_outlier_factor: return "kind=local-outlier-factor;k=" + std::to_string(a->lof_k);
      case AnomalyKind::one_class_kernel:
        return "kind=one-class-kernel;nu=" + format_double(a->one_class.nu) +
               ";gamma=" + (a->one_class.gamma > 0 ? format_double(a->one_class.gamma) : std::string("1/d"));
    }
  }
  std::string s = std::get<ClassifierSpec>(c).canonical();
  if (config.formulation == Formulation::sequence_binary) {
    s = "kernels=" + std::to_string(config.sequence_kernels) + ";n=" + std::to_string(config.sequence_n) + ";" + s;
  }
  return s;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const CohortStore& cohort, int threads) {
  ExperimentResult result;
  result.config = config;
  const Prepared p = prepare(config, cohort, threads);
  result.samples = p.samples;
  result.feature_names = p.features.names;

  std::optional<KernelBank> bank;
  if (config.formulation == Formulation::sequence_binary) {
    bank = KernelBank::generate(derive_seed(config.seed, fnv1a("kernel-bank")), config.sequence_kernels,
                                config.sequence_n, p.features.cols());
  }

  std::vector<ModelChoice> choices;
  for (const auto& c : config.classifiers) choices.emplace_back(c);
  for (const auto& a : config.anomalies) choices.emplace_back(a);

  std::vector<SplitPlan> plans;
  for (auto scheme : config.splits) {
    plans.push_back(make_splits(scheme, p.samples.label, p.samples.participant, config.seed,
                                config.group_by_participant));
  }

  struct Task {
    std::size_t choice, plan, fold;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < choices.size(); ++c) {
    for (std::size_t s = 0; s < plans.size(); ++s) {
      for (std::size_t f = 0; f < plans[s].folds.size(); ++f) tasks.push_back({c, s, f});
    }
  }
  std::vector<FoldOutput> outputs(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const int outer = std::max(1, threads);
  const int inner = tasks.size() > 1 && outer > 1 ? 1 : outer;
  const auto nt = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(outer) if (outer > 1)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    const Fold& fold = plans[task.plan].folds[task.fold];
    const std::string name = choice_name(config, choices[task.choice]);
    const std::uint64_t seed =
        derive_seed(config.seed, fnv1a(name + "/" + std::string(split_name(plans[task.plan].scheme)) + "/" + fold.tag));
    try {
      outputs[static_cast<std::size_t>(t)] =
          evaluate_fold(config, p, choices[task.choice], fold, bank ? &*bank : nullptr, seed, inner);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!errors[t]) continue;
    const std::string where = choice_name(config, choices[tasks[t].choice]) + " " +
                              std::string(split_name(plans[tasks[t].plan].scheme)) + " fold " +
                              plans[tasks[t].plan].folds[tasks[t].fold].tag;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), where + ": " + e.what());
    }
  }

  std::size_t t = 0;
  for (std::size_t c = 0; c < choices.size(); ++c) {
    for (std::size_t s = 0; s < plans.size(); ++s) {
      ModelReport r;
      r.model = choice_name(config, choices[c]);
      r.scheme = plans[s].scheme;
      r.spec = choice_spec(config, choices[c]);
      r.scores.assign(p.samples.size(), 0.0);
      r.predicted.assign(p.samples.size(), 0);
      r.fold_of.assign(p.samples.size(), 0);
      for (std::size_t f = 0; f < plans[s].folds.size(); ++f, ++t) {
        const auto& test = plans[s].folds[f].test;
        for (std::size_t i = 0; i < test.size(); ++i) {
          r.scores[test[i]] = outputs[t].scores[i];
          r.predicted[test[i]] = outputs[t].predicted[i];
          r.fold_of[test[i]] = f;
        }
        r.folds.push_back(std::move(outputs[t].result));
      }
      r.auc_roc = auc_roc(r.scores, p.samples.label);
      r.auc_pr = auc_pr(r.scores, p.samples.label);
      const auto ones = std::vector<double>(r.predicted.begin(), r.predicted.end());
      const SensSpec ss = sensitivity_specificity(ones, p.samples.label, 0.5);
      r.sensitivity = ss.sensitivity;
      r.specificity = ss.specificity;
      result.reports.push_back(std::move(r));
    }
  }

  if (config.formulation == Formulation::tabular_binary) {
    std::vector<std::size_t> all(p.samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const PreprocessorState pre = fit_preprocessor(p.features);
    const Matrix x = apply_preprocessor(pre, p.features);
    for (const auto& spec : config.classifiers) {
      Fitted fitted = fit_supervised(config, spec, x, p.samples.label,
                                     derive_seed(config.seed, fnv1a(std::string(classifier_name(spec.kind)) + "/all")),
                                     threads);
      fitted.model.fold = "all";
      fitted.model.feature_names = p.features.names;
      result.artifacts.push_back({std::move(fitted.model), pre, config.resolution_hours, hex64(config.hash())});
    }
  }
  return result;
}

// ---- writers ----------------------------------------------------------------

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, "write-failed", "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::data, "write-failed", "error writing " + path.string());
}

std::string stem(const ModelReport& r) { return r.model + "-" + std::string(split_name(r.scheme)); }

ojson provenance(const RunConfig& config) {
  ojson j;
  j["tool"] = "agibench";
  j["version"] = kToolVersion;
  j["config_hash"] = hex64(config.hash());
  j["seed"] = config.seed;
  if (config.synthetic) {
    j["data"] = {{"source", "synthetic"},
                 {"participants", config.synthetic->participants},
                 {"days", config.synthetic->days},
                 {"seed", config.synthetic->seed},
                 {"agitation_rate", config.synthetic->agitation_rate},
                 {"precursor_strength", config.synthetic->precursor_strength}};
  } else if (config.data) {
    j["data"] = {{"source", "files"},
                 {"activity", config.data->activity},
                 {"physiology", config.data->physiology},
                 {"labels", config.data->labels},
                 {"sleep", config.data->sleep},
                 {"schema", config.schema_path}};
  }
  return j;
}

std::string report_json(const ExperimentResult& res, const ModelReport& r) {
  const RunConfig& c = res.config;
  ojson j;
  j["model"] = r.model;
  j["scheme"] = split_name(r.scheme);
  j["formulation"] = formulation_name(c.formulation);
  j["resolution_hours"] = c.resolution_hours;
  if (c.formulation == Formulation::sequence_binary) {
    j["sequence_n"] = c.sequence_n;
    j["kernels"] = c.sequence_kernels;
  }
  j["context"] = {{"day_quarter", c.context.day_quarter}, {"agitation_now", c.context.agitation_now}};
  j["imbalance"] = imbalance_name(c.imbalance);
  j["spec"] = r.spec;
  j["spec_hash"] = hex64(fnv1a(r.spec));
  j["samples"] = res.samples.size();
  j["positives"] = res.samples.positives();
  j["excluded"] = {{"gap_windows", res.samples.excluded_gap}, {"short_history", res.samples.excluded_history}};
  j["grouped_by_participant"] = r.scheme == SplitScheme::lopo || c.group_by_participant;
  if (r.scheme == SplitScheme::stratified_5_fold && !c.group_by_participant) {
    j["note"] = "sample-level folds: windows of one participant can fall in both training and test folds";
  }
  j["pooled"] = {{"auc_roc", r.auc_roc},
                 {"auc_pr", r.auc_pr},
                 {"sensitivity", r.sensitivity},
                 {"specificity", r.specificity}};
  j["threshold"] = c.formulation == Formulation::anomaly ? ojson("95th percentile of training scores per fold")
                                                         : ojson(c.threshold);
  auto folds = ojson::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.tag},
                     {"train_samples", f.train_samples},
                     {"train_rows_fitted", f.train_rows_fitted},
                     {"test_samples", f.test_samples},
                     {"test_positives", f.test_positives},
                     {"auc_roc", opt(f.auc_roc)},
                     {"auc_pr", opt(f.auc_pr)},
                     {"sensitivity", opt(f.sensitivity)},
                     {"specificity", opt(f.specificity)},
                     {"threshold", f.threshold},
                     {"all_missing_features", f.all_missing},
                     {"preprocessor_hash", hex64(f.preprocessor_hash)},
                     {"train_hash", hex64(f.train_hash)},
                     {"model_hash", hex64(f.model_hash)}});
  }
  j["folds"] = std::move(folds);
  j["provenance"] = provenance(c);
  return j.dump(2) + "\n";
}

}  // namespace

std::vector<std::string> write_experiment(const ExperimentResult& res, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::data, "write-failed", "cannot create output directory " + dir);
  const fs::path root(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(root / name, text);
    files.push_back(name);
  };

  std::string fold_csv = "model,scheme,fold,train_samples,test_samples,test_positives,auc_roc,auc_pr,sensitivity,specificity\n";
  for (const auto& r : res.reports) {
    emit("report-" + stem(r) + ".json", report_json(res, r));

    std::string scores = "participant,window_start,label,fold,score,predicted\n";
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      scores += csv::quote(res.samples.participant[i]) + "," + format_timestamp(res.samples.start[i]) + "," +
                std::to_string(res.samples.label[i]) + "," + csv::quote(r.folds[r.fold_of[i]].tag) + "," +
                format_double(r.scores[i]) + "," + std::to_string(r.predicted[i]) + "\n";
    }
    emit("scores-" + stem(r) + ".csv", scores);

    std::string curves = "curve,threshold,x,y\n";
    for (const auto& pt : roc_curve(r.scores, res.samples.label)) {
      curves += "roc," + format_double(pt.threshold) + "," + format_double(pt.x) + "," + format_double(pt.y) + "\n";
    }
    for (const auto& pt : pr_curve(r.scores, res.samples.label)) {
      curves += "pr," + format_double(pt.threshold) + "," + format_double(pt.x) + "," + format_double(pt.y) + "\n";
    }
    emit("curves-" + stem(r) + ".csv", curves);

    for (const auto& f : r.folds) {
      fold_csv += csv::quote(r.model) + "," + std::string(split_name(r.scheme)) + "," + csv::quote(f.tag) + "," +
                  std::to_string(f.train_samples) + "," + std::to_string(f.test_samples) + "," +
                  std::to_string(f.test_positives) + "," + opt_csv(f.auc_roc) + "," + opt_csv(f.auc_pr) + "," +
                  opt_csv(f.sensitivity) + "," + opt_csv(f.specificity) + "\n";
    }
  }
  emit("fold-metrics.csv", fold_csv);
  for (const auto& a : res.artifacts) {
    emit("artifact-" + std::string(classifier_name(a.classifier.spec.kind)) + ".json", artifact_to_json(a));
  }
  emit("summary.txt", summary_table(res));

  ojson m = provenance(res.config);
  m["config"] = split(res.config.canonical(), '\n');
  if (!m["config"].empty() && m["config"].back() == "") m["config"].erase(m["config"].size() - 1);
  m["seeds"] = {{"run", res.config.seed},
                {"split", res.config.seed},
                {"kernel_bank", derive_seed(res.config.seed, fnv1a("kernel-bank"))}};
  if (res.config.synthetic) m["seeds"]["synthetic"] = res.config.synthetic->seed;
  m["samples"] = {{"windows", res.samples.windows},
                  {"labeled", res.samples.size()},
                  {"positives", res.samples.positives()},
                  {"excluded_gap", res.samples.excluded_gap},
                  {"excluded_history", res.samples.excluded_history}};
  m["outputs"] = files;
  write_text(root / "manifest.json", m.dump(2) + "\n");
  files.push_back("manifest.json");
  return files;
}

std::string summary_table(const ExperimentResult& res) {
  std::size_t w_model = 5, w_scheme = 6;
  for (const auto& r : res.reports) {
    w_model = std::max(w_model, r.model.size());
    w_scheme = std::max(w_scheme, split_name(r.scheme).size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("model", w_model) + "  " + pad("scheme", w_scheme) + "  AUC-ROC  AUC-PR   Sens     Spec\n";
  for (const auto& r : res.reports) {
    out += pad(r.model, w_model) + "  " + pad(std::string(split_name(r.scheme)), w_scheme) + "  " + fmt4(r.auc_roc) +
           "   " + fmt4(r.auc_pr) + "   " + fmt4(r.sensitivity) + "   " + fmt4(r.specificity) + "\n";
  }
  out += "samples " + std::to_string(res.samples.size()) + ", positives " + std::to_string(res.samples.positives()) +
         ", resolution " + std::to_string(res.config.resolution_hours) + "h, formulation " +
         std::string(formulation_name(res.config.formulation)) + "\n";
  return out;
}

// ---- explain ----------------------------------------------------------------

namespace {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  k = std::min(k, n);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

ExplainResult run_explain(const RunConfig& config, const CohortStore& cohort, const ModelArtifact& artifact,
                          std::size_t top_m, int threads) {
  if (config.formulation != Formulation::tabular_binary) {
    fail(ErrorKind::config, "bad-formulation", "explain works on tabular-binary configs");
  }
  if (top_m < 1) fail(ErrorKind::config, "bad-top-m", "top_m must be at least 1");
  const Prepared p = prepare(config, cohort, threads);
  if (artifact.classifier.feature_names != p.features.names || artifact.resolution_hours != config.resolution_hours) {
    fail(ErrorKind::model, "artifact-mismatch",
         "artifact was trained on " + std::to_string(artifact.classifier.feature_names.size()) + " features at " +
             std::to_string(artifact.resolution_hours) + "h; config yields " + std::to_string(p.features.cols()) +
             " features at " + std::to_string(config.resolution_hours) + "h");
  }
  ExplainResult out;
  out.model = std::string(classifier_name(artifact.classifier.spec.kind));
  out.model_hash = model_hash(artifact.classifier);
  out.feature_names = p.features.names;
  out.samples = p.samples;
  out.top_m = std::min(top_m, p.features.cols());
  const Matrix x = apply_preprocessor(artifact.preprocessor, p.features);
  const BatchPredictor predict = [&artifact](const Matrix& rows) { return predict_proba(artifact.classifier, rows); };

  out.background = sample_indices(x.rows(), config.explain.background, derive_seed(config.seed, fnv1a("background")));
  out.instances = sample_indices(x.rows(), config.explain.instances, derive_seed(config.seed, fnv1a("instances")));
  out.instance_values = x.select_rows(out.instances);
  out.attributions = explain_instances(predict, out.instance_values, x.select_rows(out.background),
                                       {config.explain.permutations, derive_seed(config.seed, fnv1a("shapley"))},
                                       threads);
  out.importance = permutation_importance(predict, x, p.samples.label, config.explain.repeats,
                                          derive_seed(config.seed, fnv1a("permutation")), threads);
  out.ranking = summary_rank(out.attributions.values, out.instance_values, out.feature_names);
  return out;
}

std::vector<std::string> write_explain(const ExplainResult& r, const RunConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::data, "write-failed", "cannot create output directory " + dir);
  const fs::path root(dir);

  ojson j;
  j["model"] = r.model;
  j["model_hash"] = hex64(r.model_hash);
  j["top_m"] = r.top_m;
  j["background_mean_output"] = r.attributions.background_mean;
  j["permutations"] = config.explain.permutations;
  j["importance_repeats"] = r.importance.repeats;
  j["baseline_auc_roc"] = r.importance.baseline_auc;
  auto bg = ojson::array();
  for (auto i : r.background) {
    bg.push_back({{"participant", r.samples.participant[i]}, {"window_start", format_timestamp(r.samples.start[i])}});
  }
  j["background"] = {{"rows", bg.size()}, {"selection", "uniform without replacement"}, {"samples", bg}};
  auto feats = ojson::array();
  for (const auto& f : r.ranking) {
    feats.push_back({{"feature", f.name},
                     {"rank", f.rank},
                     {"mean_abs_attribution", f.mean_abs},
                     {"value_direction", f.direction},
                     {"permutation_auc_drop_mean", r.importance.mean_drop[f.feature]},
                     {"permutation_auc_drop_std", r.importance.std_drop[f.feature]}});
  }
  j["features"] = std::move(feats);
  double worst = 0.0;
  auto inst = ojson::array();
  for (std::size_t k = 0; k < r.instances.size(); ++k) {
    const auto i = r.instances[k];
    const auto phi = r.attributions.values.row(k);
    const double sum = std::accumulate(phi.begin(), phi.end(), 0.0);
    worst = std::max(worst, std::abs(sum - (r.attributions.output[k] - r.attributions.background_mean)));
    const auto vals = r.instance_values.row(k);
    inst.push_back({{"participant", r.samples.participant[i]},
                    {"window_start", format_timestamp(r.samples.start[i])},
                    {"label", r.samples.label[i]},
                    {"output", r.attributions.output[k]},
                    {"attributions", std::vector<double>(phi.begin(), phi.end())},
                    {"values", std::vector<double>(vals.begin(), vals.end())}});
  }
  j["local_accuracy_max_error"] = worst;
  j["feature_names"] = r.feature_names;
  j["instances"] = std::move(inst);
  j["provenance"] = provenance(config);

  std::vector<std::string> files;
  write_text(root / "attribution.json", j.dump(2) + "\n");
  files.push_back("attribution.json");
  std::string summary = "feature,rank,mean_abs_attribution,value_direction\n";
  for (std::size_t k = 0; k < r.top_m; ++k) {
    const auto& f = r.ranking[k];
    summary += f.name + "," + std::to_string(f.rank) + "," + format_double(f.mean_abs) + "," +
               format_double(f.direction) + "\n";
  }
  write_text(root / "shap-summary.csv", summary);
  files.push_back("shap-summary.csv");
  std::string imp = "feature,auc_drop_mean,auc_drop_std\n";
  for (std::size_t f = 0; f < r.feature_names.size(); ++f) {
    imp += r.feature_names[f] + "," + format_double(r.importance.mean_drop[f]) + "," +
           format_double(r.importance.std_drop[f]) + "\n";
  }
  write_text(root / "permutation-importance.csv", imp);
  files.push_back("permutation-importance.csv");
  return files;
}

}  // namespace agibench
