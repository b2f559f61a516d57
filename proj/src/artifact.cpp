#include "agibench/artifact.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace agibench {

using ojson = nlohmann::ordered_json;

namespace {

ojson spec_json(const ClassifierSpec& s) {
  return ojson{{"kind", classifier_name(s.kind)},
               {"l2", s.l2},
               {"max_iterations", s.max_iterations},
               {"tolerance", s.tolerance},
               {"rounds", s.gbdt.rounds},
               {"learning_rate", s.gbdt.learning_rate},
               {"max_depth", s.gbdt.max_depth},
               {"max_leaves", s.gbdt.max_leaves},
               {"bins", s.gbdt.bins},
               {"lambda", s.gbdt.lambda},
               {"min_child_hessian", s.gbdt.min_child_hessian},
               {"min_child_samples", s.gbdt.min_child_samples},
               {"class_weighting", s.class_weighting},
               {"seed", s.seed}};
}

ClassifierSpec spec_from(const nlohmann::json& j) {
  ClassifierSpec s;
  const auto kind = parse_classifier_kind(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::model, "artifact-mismatch", "unknown classifier kind in artifact");
  s.kind = *kind;
  s.l2 = j.at("l2").get<double>();
  s.max_iterations = j.at("max_iterations").get<int>();
  s.tolerance = j.at("tolerance").get<double>();
  s.gbdt.rounds = j.at("rounds").get<int>();
  s.gbdt.learning_rate = j.at("learning_rate").get<double>();
  s.gbdt.max_depth = j.at("max_depth").get<int>();
  s.gbdt.max_leaves = j.at("max_leaves").get<int>();
  s.gbdt.bins = j.at("bins").get<int>();
  s.gbdt.lambda = j.at("lambda").get<double>();
  s.gbdt.min_child_hessian = j.at("min_child_hessian").get<double>();
  s.gbdt.min_child_samples = j.at("min_child_samples").get<int>();
  s.class_weighting = j.at("class_weighting").get<bool>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

ojson params_json(const FittedClassifier& m) {
  return std::visit(
      [](const auto& p) -> ojson {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"coef", p.coef}, {"intercept", p.intercept}, {"iterations", p.iterations},
                  {"gradient_norm", p.gradient_norm}};
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          return {{"mean", {p.mean[0], p.mean[1]}},
                  {"variance", {p.variance[0], p.variance[1]}},
                  {"log_prior", {p.log_prior[0], p.log_prior[1]}}};
        } else {
          auto trees = ojson::array();
          for (const auto& t : p.trees) {
            ojson feature = ojson::array(), threshold = ojson::array(), left = ojson::array(), right = ojson::array(),
                  value = ojson::array();
            for (const auto& n : t.nodes) {
              feature.push_back(n.feature);
              threshold.push_back(n.threshold);
              left.push_back(n.left);
              right.push_back(n.right);
              value.push_back(n.value);
            }
            trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                             {"value", value}});
          }
          return {{"base_score", p.base_score}, {"trees", trees}};
        }
      },
      m.params);
}

void params_from(const nlohmann::json& j, FittedClassifier& m) {
  switch (m.spec.kind) {
    case ClassifierKind::logistic: {
      LogisticModel p;
      p.coef = j.at("coef").get<std::vector<double>>();
      p.intercept = j.at("intercept").get<double>();
      p.iterations = j.at("iterations").get<int>();
      p.gradient_norm = j.at("gradient_norm").get<double>();
      m.params = p;
      break;
    }
    case ClassifierKind::gaussian_nb: {
      NaiveBayesModel p;
      for (int c = 0; c < 2; ++c) {
        p.mean[c] = j.at("mean").at(c).get<std::vector<double>>();
        p.variance[c] = j.at("variance").at(c).get<std::vector<double>>();
        p.log_prior[c] = j.at("log_prior").at(c).get<double>();
      }
      m.params = p;
      break;
    }
    default: {
      GbdtModel p;
      p.base_score = j.at("base_score").get<double>();
      for (const auto& t : j.at("trees")) {
        Tree tree;
        const auto& f = t.at("feature");
        tree.nodes.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
          auto& n = tree.nodes[i];
          n.feature = f.at(i).get<int>();
          n.threshold = t.at("threshold").at(i).get<double>();
          n.left = t.at("left").at(i).get<int>();
          n.right = t.at("right").at(i).get<int>();
          n.value = t.at("value").at(i).get<double>();
        }
        p.trees.push_back(std::move(tree));
      }
      m.params = p;
    }
  }
}

}  // namespace

std::string artifact_to_json(const ModelArtifact& a) {
  ojson j;
  j["format"] = "agibench-model";
  j["version"] = 1;
  j["config_hash"] = a.config_hash;
  j["resolution_hours"] = a.resolution_hours;
  j["feature_names"] = a.classifier.feature_names;
  j["fold"] = a.classifier.fold;
  j["spec"] = spec_json(a.classifier.spec);
  j["spec_hash"] = hex64(a.classifier.spec.hash());
  j["model_hash"] = hex64(model_hash(a.classifier));
  const auto& p = a.preprocessor;
  j["preprocessor"] = {{"impute_mean", p.impute_mean}, {"mean", p.mean}, {"scale", p.scale},
                       {"min", p.min},                 {"max", p.max},   {"all_missing", p.all_missing},
                       {"hash", hex64(p.hash())}};
  j["params"] = params_json(a.classifier);
  return j.dump(1) + "\n";
}

ModelArtifact artifact_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "agibench-model" || j.at("version") != 1) {
      fail(ErrorKind::model, "artifact-mismatch", "not a version-1 model artifact");
    }
    ModelArtifact a;
    a.config_hash = j.at("config_hash").get<std::string>();
    a.resolution_hours = j.at("resolution_hours").get<int>();
    auto& c = a.classifier;
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    c.feature_count = c.feature_names.size();
    c.fold = j.at("fold").get<std::string>();
    c.spec = spec_from(j.at("spec"));
    params_from(j.at("params"), c);
    const auto& p = j.at("preprocessor");
    auto& s = a.preprocessor;
    s.impute_mean = p.at("impute_mean").get<std::vector<double>>();
    s.mean = p.at("mean").get<std::vector<double>>();
    s.scale = p.at("scale").get<std::vector<double>>();
    s.min = p.at("min").get<std::vector<double>>();
    s.max = p.at("max").get<std::vector<double>>();
    s.all_missing = p.at("all_missing").get<std::vector<std::size_t>>();
    if (s.width() != c.feature_count || hex64(model_hash(c)) != j.at("model_hash").get<std::string>()) {
      fail(ErrorKind::model, "artifact-mismatch", "artifact is internally inconsistent");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::model, "artifact-mismatch", std::string("malformed model artifact: ") + e.what());
  }
}

void write_artifact(const ModelArtifact& artifact, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::data, "write-failed", "cannot write " + path);
  out << artifact_to_json(artifact);
}

ModelArtifact read_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::model, "artifact-missing", "cannot open model artifact " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return artifact_from_json(ss.str());
}

}  // namespace agibench
