#include "agibench/config.hpp"

#include <algorithm>
#include <filesystem>

namespace agibench {

std::string_view formulation_name(Formulation f) noexcept {
  switch (f) {
    case Formulation::tabular_binary: return "tabular-binary";
    case Formulation::sequence_binary: return "sequence-binary";
    case Formulation::anomaly: return "anomaly";
  }
  return "unknown";
}

std::string_view imbalance_name(Imbalance i) noexcept {
  switch (i) {
    case Imbalance::none: return "none";
    case Imbalance::class_weights: return "class-weights";
    case Imbalance::smote: return "smote";
  }
  return "unknown";
}

namespace {

const std::vector<std::string> kGbdtParams = {"rounds", "learning_rate", "max_depth", "max_leaves",
                                              "bins",   "lambda",        "min_child_hessian",
                                              "min_child_samples"};

std::vector<std::string> build_keys() {
  std::vector<std::string> keys = {"data.activity",
                                   "data.physiology",
                                   "data.labels",
                                   "data.sleep",
                                   "data.schema",
                                   "synthetic.participants",
                                   "synthetic.days",
                                   "synthetic.seed",
                                   "synthetic.agitation_rate",
                                   "synthetic.precursor_strength",
                                   "resolution_hours",
                                   "formulation",
                                   "sequence.n",
                                   "sequence.kernels",
                                   "context.day_quarter",
                                   "context.agitation_now",
                                   "models",
                                   "imbalance",
                                   "smote.k",
                                   "split",
                                   "split.group_by_participant",
                                   "seed",
                                   "workers",
                                   "output_dir",
                                   "threshold",
                                   "logistic.l2",
                                   "logistic.max_iterations",
                                   "logistic.tolerance",
                                   "isolation-forest.trees",
                                   "isolation-forest.subsample",
                                   "local-outlier-factor.k",
                                   "one-class-kernel.nu",
                                   "one-class-kernel.gamma",
                                   "explain.background",
                                   "explain.permutations",
                                   "explain.repeats",
                                   "explain.instances"};
  for (const char* model : {"gbdt-exact", "gbdt-hist"}) {
    for (const auto& p : kGbdtParams) keys.push_back(std::string(model) + "." + p);
  }
  return keys;
}

long long int_in(const KvFile& kv, const std::string& key, long long lo, long long hi, long long fallback) {
  const auto v = kv.get_int(key);
  if (!v) return fallback;
  if (*v < lo || *v > hi) {
    kv.fail_at(key, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
  }
  return *v;
}

double real_in(const KvFile& kv, const std::string& key, double lo, double hi, double fallback, bool open_lo = false) {
  const auto v = kv.get_double(key);
  if (!v) return fallback;
  if (!(open_lo ? *v > lo : *v >= lo) || !(*v <= hi)) {
    kv.fail_at(key, std::string("must be in ") + (open_lo ? "(" : "[") + format_double(lo) + ", " +
                        format_double(hi) + "]");
  }
  return *v;
}

std::string path_relative_to(const std::string& value, const std::string& config_path) {
  if (value.empty() || config_path.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (std::filesystem::path(config_path).parent_path() / p).lexically_normal().string();
}

bool has_prefix(const KvFile& kv, std::string_view prefix) {
  return std::any_of(kv.entries().begin(), kv.entries().end(),
                     [&](const auto& e) { return e.first.rfind(prefix, 0) == 0; });
}

void apply_gbdt_overrides(const KvFile& kv, const std::string& model, GbdtParams& g) {
  const std::string p = model + ".";
  g.rounds = static_cast<int>(int_in(kv, p + "rounds", 1, 100000, g.rounds));
  g.learning_rate = real_in(kv, p + "learning_rate", 0.0, 1.0, g.learning_rate, true);
  g.max_depth = static_cast<int>(int_in(kv, p + "max_depth", 0, 64, g.max_depth));
  g.max_leaves = static_cast<int>(int_in(kv, p + "max_leaves", 2, 1 << 16, g.max_leaves));
  g.bins = static_cast<int>(int_in(kv, p + "bins", 2, 255, g.bins));
  g.lambda = real_in(kv, p + "lambda", 0.0, 1e12, g.lambda);
  g.min_child_hessian = real_in(kv, p + "min_child_hessian", 0.0, 1e12, g.min_child_hessian);
  g.min_child_samples = static_cast<int>(int_in(kv, p + "min_child_samples", 1, 1 << 30, g.min_child_samples));
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = build_keys();
  return keys;
}

std::vector<std::string> RunConfig::model_names() const {
  std::vector<std::string> out;
  for (const auto& c : classifiers) {
    out.push_back(formulation == Formulation::sequence_binary ? "rocket+" + std::string(classifier_name(c.kind))
                                                              : std::string(classifier_name(c.kind)));
  }
  for (const auto& a : anomalies) out.emplace_back(anomaly_name(a.kind));
  return out;
}

RunConfig parse_run_config(const KvFile& kv) {
  kv.require_known(config_keys());
  RunConfig c;
  c.source = kv.source();

  const bool has_data = has_prefix(kv, "data.");
  const bool has_synth = has_prefix(kv, "synthetic.");
  if (has_data && has_synth) {
    kv.fail_at("data.activity", "give either data.* paths or synthetic.* settings, not both");
  }
  if (!has_data && !has_synth) {
    fail(ErrorKind::config, "parse-error", kv.source() + ": config needs data.* paths or synthetic.* settings");
  }
  if (has_data) {
    CohortPaths paths;
    for (const char* key : {"data.activity", "data.physiology", "data.labels"}) {
      if (!kv.contains(key)) {
        fail(ErrorKind::config, "parse-error", kv.source() + ": missing required key `" + key + "`");
      }
    }
    paths.activity = path_relative_to(*kv.get_string("data.activity"), kv.source());
    paths.physiology = path_relative_to(*kv.get_string("data.physiology"), kv.source());
    paths.labels = path_relative_to(*kv.get_string("data.labels"), kv.source());
    paths.sleep = path_relative_to(kv.get_string("data.sleep").value_or(""), kv.source());
    c.schema_path = path_relative_to(kv.get_string("data.schema").value_or(""), kv.source());
    c.data = paths;
  } else {
    SyntheticSpec s;
    s.participants = static_cast<int>(int_in(kv, "synthetic.participants", 1, 100000, s.participants));
    s.days = static_cast<int>(int_in(kv, "synthetic.days", 1, 100000, s.days));
    s.seed = static_cast<std::uint64_t>(int_in(kv, "synthetic.seed", 0, INT64_MAX, static_cast<long long>(s.seed)));
    s.agitation_rate = real_in(kv, "synthetic.agitation_rate", 0.0, 1.0, s.agitation_rate);
    s.precursor_strength = real_in(kv, "synthetic.precursor_strength", 0.0, 100.0, s.precursor_strength);
    c.synthetic = s;
  }

  if (const auto r = kv.get_int("resolution_hours")) {
    if (*r != 6 && *r != 12 && *r != 24) kv.fail_at("resolution_hours", "resolution must be one of 6, 12, 24");
    c.resolution_hours = static_cast<int>(*r);
  }
  if (const auto f = kv.get_string("formulation")) {
    if (*f == "tabular-binary") c.formulation = Formulation::tabular_binary;
    else if (*f == "sequence-binary") c.formulation = Formulation::sequence_binary;
    else if (*f == "anomaly") c.formulation = Formulation::anomaly;
    else kv.fail_at("formulation", "must be one of tabular-binary, sequence-binary, anomaly");
  }
  if (c.formulation != Formulation::sequence_binary) {
    for (const char* key : {"sequence.n", "sequence.kernels"}) {
      if (kv.contains(key)) kv.fail_at(key, "only valid with formulation = sequence-binary");
    }
  }
  c.sequence_n = static_cast<std::size_t>(int_in(kv, "sequence.n", 1, 64, 1));
  c.sequence_kernels = static_cast<std::size_t>(int_in(kv, "sequence.kernels", 1, 10000, 1000));
  c.context.day_quarter = kv.get_bool("context.day_quarter").value_or(false);
  c.context.agitation_now = kv.get_bool("context.agitation_now").value_or(false);

  const auto models = kv.get_list("models");
  if (!models) fail(ErrorKind::config, "parse-error", kv.source() + ": missing required key `models`");
  std::vector<std::string> seen;
  for (const auto& m : *models) {
    if (std::find(seen.begin(), seen.end(), m) != seen.end()) kv.fail_at("models", "model `" + m + "` listed twice");
    seen.push_back(m);
    if (c.formulation == Formulation::anomaly) {
      const auto kind = parse_anomaly_kind(m);
      if (!kind) kv.fail_at("models", "`" + m + "` is not an anomaly model (isolation-forest, local-outlier-factor, one-class-kernel)");
      c.anomalies.push_back({*kind, {}, 20, {}});
    } else {
      const auto kind = parse_classifier_kind(m);
      if (!kind) kv.fail_at("models", "`" + m + "` is not a classifier (logistic, gaussian-nb, gbdt-exact, gbdt-hist)");
      c.classifiers.push_back(ClassifierSpec::preset(*kind));
    }
  }
  // Hyperparameters must belong to a selected model.
  for (const auto& [key, entry] : kv.entries()) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string head = key.substr(0, dot);
    if (parse_classifier_kind(head) || parse_anomaly_kind(head)) {
      if (std::find(seen.begin(), seen.end(), head) == seen.end()) {
        kv.fail_at(key, "hyperparameter for `" + head + "`, which is not in `models`");
      }
    }
  }

  if (const auto imb = kv.get_list("imbalance")) {
    const bool wants_smote = std::find(imb->begin(), imb->end(), "smote") != imb->end();
    const bool wants_weights = std::find(imb->begin(), imb->end(), "class-weights") != imb->end();
    if (wants_smote && wants_weights) {
      kv.fail_at("imbalance", "smote and class-weights are mutually exclusive; choose one");
    }
    for (const auto& v : *imb) {
      if (v != "none" && v != "smote" && v != "class-weights") {
        kv.fail_at("imbalance", "must be one of none, class-weights, smote");
      }
    }
    if (imb->size() != 1) kv.fail_at("imbalance", "give exactly one strategy");
    c.imbalance = wants_smote ? Imbalance::smote : wants_weights ? Imbalance::class_weights : Imbalance::none;
  }
  if (c.formulation == Formulation::anomaly && c.imbalance != Imbalance::none) {
    kv.fail_at("imbalance", "anomaly models train on normal windows only; imbalance must be none");
  }
  if (kv.contains("smote.k") && c.imbalance != Imbalance::smote) kv.fail_at("smote.k", "only valid with imbalance = smote");
  c.smote_k = static_cast<std::size_t>(int_in(kv, "smote.k", 1, 1000, 5));

  if (const auto sp = kv.get_list("split")) {
    c.splits.clear();
    for (const auto& s : *sp) {
      const auto scheme = parse_split_scheme(s);
      if (!scheme) kv.fail_at("split", "must be stratified-5-fold and/or lopo");
      if (std::find(c.splits.begin(), c.splits.end(), *scheme) != c.splits.end()) kv.fail_at("split", "scheme listed twice");
      c.splits.push_back(*scheme);
    }
  }
  c.group_by_participant = kv.get_bool("split.group_by_participant").value_or(false);
  c.seed = static_cast<std::uint64_t>(int_in(kv, "seed", 0, INT64_MAX, 0));
  c.workers = static_cast<int>(int_in(kv, "workers", 1, 1024, 1));
  c.output_dir = path_relative_to(kv.get_string("output_dir").value_or(""), kv.source());
  if (c.output_dir.empty()) fail(ErrorKind::config, "parse-error", kv.source() + ": missing required key `output_dir`");
  c.threshold = real_in(kv, "threshold", 0.0, 1.0, 0.5);

  for (auto& spec : c.classifiers) {
    const std::string name(classifier_name(spec.kind));
    if (spec.kind == ClassifierKind::logistic) {
      spec.l2 = real_in(kv, "logistic.l2", 0.0, 1e12, spec.l2);
      spec.max_iterations = static_cast<int>(int_in(kv, "logistic.max_iterations", 1, 100000000, spec.max_iterations));
      spec.tolerance = real_in(kv, "logistic.tolerance", 0.0, 1.0, spec.tolerance, true);
    } else if (spec.kind == ClassifierKind::gbdt_exact || spec.kind == ClassifierKind::gbdt_hist) {
      apply_gbdt_overrides(kv, name, spec.gbdt);
    }
    spec.class_weighting = c.imbalance == Imbalance::class_weights;
    spec.seed = c.seed;
  }
  for (auto& a : c.anomalies) {
    if (a.kind == AnomalyKind::isolation_forest) {
      a.forest.trees = static_cast<std::size_t>(int_in(kv, "isolation-forest.trees", 1, 100000, 100));
      a.forest.subsample = static_cast<std::size_t>(int_in(kv, "isolation-forest.subsample", 2, 1 << 24, 256));
    } else if (a.kind == AnomalyKind::local_outlier_factor) {
      a.lof_k = static_cast<std::size_t>(int_in(kv, "local-outlier-factor.k", 1, 100000, 20));
    } else {
      a.one_class.nu = real_in(kv, "one-class-kernel.nu", 0.0, 1.0, 0.1, true);
      a.one_class.gamma = real_in(kv, "one-class-kernel.gamma", 0.0, 1e12, 0.0, true);
    }
  }

  c.explain.background = static_cast<std::size_t>(int_in(kv, "explain.background", 1, 100000, 100));
  c.explain.permutations = static_cast<std::size_t>(int_in(kv, "explain.permutations", 1, 100000, 128));
  c.explain.repeats = static_cast<std::size_t>(int_in(kv, "explain.repeats", 1, 100000, 10));
  c.explain.instances = static_cast<std::size_t>(int_in(kv, "explain.instances", 1, 1000000, 100));
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(KvFile::load(path)); }

std::string RunConfig::canonical() const {
  std::string s;
  auto line = [&s](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
  if (data) {
    line("data.activity", data->activity);
    line("data.physiology", data->physiology);
    line("data.labels", data->labels);
    line("data.sleep", data->sleep);
    line("data.schema", schema_path);
  }
  if (synthetic) {
    line("synthetic.participants", std::to_string(synthetic->participants));
    line("synthetic.days", std::to_string(synthetic->days));
    line("synthetic.seed", std::to_string(synthetic->seed));
    line("synthetic.agitation_rate", format_double(synthetic->agitation_rate));
    line("synthetic.precursor_strength", format_double(synthetic->precursor_strength));
  }
  line("resolution_hours", std::to_string(resolution_hours));
  line("formulation", std::string(formulation_name(formulation)));
  if (formulation == Formulation::sequence_binary) {
    line("sequence.n", std::to_string(sequence_n));
    line("sequence.kernels", std::to_string(sequence_kernels));
  }
  line("context.day_quarter", context.day_quarter ? "true" : "false");
  line("context.agitation_now", context.agitation_now ? "true" : "false");
  for (const auto& cl : classifiers) line("model", cl.canonical());
  for (const auto& a : anomalies) {
    std::string v = "kind=" + std::string(anomaly_name(a.kind));
    if (a.kind == AnomalyKind::isolation_forest) {
      v += ";trees=" + std::to_string(a.forest.trees) + ";subsample=" + std::to_string(a.forest.subsample);
    } else if (a.kind == AnomalyKind::local_outlier_factor) {
      v += ";k=" + std::to_string(a.lof_k);
    } else {
      v += ";nu=" + format_double(a.one_class.nu) + ";gamma=" + format_double(a.one_class.gamma);
    }
    line("model", v);
  }
  line("imbalance", std::string(imbalance_name(imbalance)));
  if (imbalance == Imbalance::smote) line("smote.k", std::to_string(smote_k));
  std::string sp;
  for (auto scheme : splits) sp += (sp.empty() ? "" : ",") + std::string(split_name(scheme));
  line("split", sp);
  line("split.group_by_participant", group_by_participant ? "true" : "false");
  line("seed", std::to_string(seed));
  line("threshold", format_double(threshold));
  line("explain.background", std::to_string(explain.background));
  line("explain.permutations", std::to_string(explain.permutations));
  line("explain.repeats", std::to_string(explain.repeats));
  line("explain.instances", std::to_string(explain.instances));
  return s;
}

CohortStore load_config_cohort(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic).cohort;
  if (!config.data) fail(ErrorKind::config, "no-data", "config names no data source");
  const SchemaMap schema = config.schema_path.empty() ? SchemaMap{} : SchemaMap::load(config.schema_path);
  return load_cohort(*config.data, schema);
}

}  // namespace agibench
