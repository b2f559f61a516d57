#include "agibench/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "agibench/features.hpp"
#include "agibench/neighbors.hpp"

namespace agibench {

std::string_view classifier_name(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::logistic: return "logistic";
    case ClassifierKind::gaussian_nb: return "gaussian-nb";
    case ClassifierKind::gbdt_exact: return "gbdt-exact";
    case ClassifierKind::gbdt_hist: return "gbdt-hist";
  }
  return "unknown";
}

std::optional<ClassifierKind> parse_classifier_kind(std::string_view name) {
  for (auto k : {ClassifierKind::logistic, ClassifierKind::gaussian_nb, ClassifierKind::gbdt_exact,
                 ClassifierKind::gbdt_hist}) {
    if (classifier_name(k) == name) return k;
  }
  return std::nullopt;
}

ClassifierSpec ClassifierSpec::preset(ClassifierKind kind) {
  ClassifierSpec s;
  s.kind = kind;
  if (kind == ClassifierKind::gbdt_hist) {
    s.gbdt.max_depth = 0;
    s.gbdt.max_leaves = 31;
    s.gbdt.min_child_samples = 20;
  }
  return s;
}

std::string ClassifierSpec::canonical() const {
  std::string s = "kind=" + std::string(classifier_name(kind));
  s += ";l2=" + format_double(l2) + ";max_iterations=" + std::to_string(max_iterations) +
       ";tolerance=" + format_double(tolerance);
  s += ";rounds=" + std::to_string(gbdt.rounds) + ";learning_rate=" + format_double(gbdt.learning_rate) +
       ";max_depth=" + std::to_string(gbdt.max_depth) + ";max_leaves=" + std::to_string(gbdt.max_leaves) +
       ";bins=" + std::to_string(gbdt.bins) + ";lambda=" + format_double(gbdt.lambda) +
       ";min_child_hessian=" + format_double(gbdt.min_child_hessian) +
       ";min_child_samples=" + std::to_string(gbdt.min_child_samples);
  s += ";class_weighting=" + std::string(class_weighting ? "true" : "false") + ";seed=" + std::to_string(seed);
  return s;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ClassWeights class_weights(std::span<const std::uint8_t> labels) {
  std::size_t pos = 0;
  for (auto y : labels) pos += y != 0;
  const std::size_t n = labels.size();
  if (pos == 0 || pos == n) fail(ErrorKind::model, "single-class-training-set", "both classes must be present");
  const double N = static_cast<double>(n);
  return {N / (2.0 * static_cast<double>(n - pos)), N / (2.0 * static_cast<double>(pos))};
}

std::vector<double> sample_weights(std::span<const std::uint8_t> labels, const ClassWeights& w) {
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] ? w.positive : w.negative;
  return out;
}

SmoteResult smote_oversample(const Matrix& rows, std::span<const std::uint8_t> labels, std::size_t k,
                             std::uint64_t seed, int threads) {
  if (rows.rows() != labels.size()) fail(ErrorKind::model, "arity-mismatch", "rows and labels differ in length");
  if (k < 1) fail(ErrorKind::config, "bad-smote-k", "k must be at least 1");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) fail(ErrorKind::model, "single-class-training-set", "SMOTE needs both classes");
  const bool minority_is_positive = pos.size() <= neg.size();
  const auto& minority = minority_is_positive ? pos : neg;
  const std::size_t target = std::max(pos.size(), neg.size());
  const std::size_t needed = target - minority.size();

  SmoteResult out;
  out.rows = rows;
  out.labels.assign(labels.begin(), labels.end());
  Rng rng(seed);
  const std::uint8_t minority_label = minority_is_positive ? 1 : 0;
  std::vector<double> synth(rows.cols());

  if (minority.size() < 2) {
    out.warnings.push_back("too-few-minority: " + std::to_string(minority.size()) +
                           " minority row(s); duplicating instead of interpolating");
    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t parent = minority[rng.index(minority.size())];
      out.rows.append_row(rows.row(parent));
      out.labels.push_back(minority_label);
      out.parent.push_back(parent);
      out.neighbor.push_back(parent);
    }
    out.synthetic = needed;
    return out;
  }

  const Matrix mrows = rows.select_rows(minority);
  const std::size_t keff = std::min(k, minority.size() - 1);
  const NeighborLists nn = knn_self(mrows, keff, threads);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t p = rng.index(minority.size());
    const std::size_t q = nn.indices_of(p)[rng.index(keff)];
    const double lambda = rng.uniform();
    const auto a = mrows.row(p);
    const auto b = mrows.row(q);
    for (std::size_t c = 0; c < synth.size(); ++c) synth[c] = a[c] + lambda * (b[c] - a[c]);
    out.rows.append_row(synth);
    out.labels.push_back(minority_label);
    out.parent.push_back(minority[p]);
    out.neighbor.push_back(minority[q]);
  }
  out.synthetic = needed;
  return out;
}

namespace {

struct LogisticObjective {
  const Matrix& x;
  std::span<const std::uint8_t> y;
  std::span<const double> w;
  double total_weight;
  double l2;

  // Returns the objective and writes its gradient (coefficients then intercept).
  double evaluate(const std::vector<double>& theta, std::vector<double>& grad) const {
    const std::size_t d = x.cols();
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = x.row(i);
      double z = theta[d];
      for (std::size_t c = 0; c < d; ++c) z += theta[c] * row[c];
      const double wi = w.empty() ? 1.0 : w[i];
      const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      loss += wi * (softplus - (y[i] ? z : 0.0));
      const double r = wi * (sigmoid(z) - (y[i] ? 1.0 : 0.0));
      for (std::size_t c = 0; c < d; ++c) grad[c] += r * row[c];
      grad[d] += r;
    }
    loss /= total_weight;
    double penalty = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      grad[c] = grad[c] / total_weight + l2 * theta[c];
      penalty += theta[c] * theta[c];
    }
    grad[d] /= total_weight;
    return loss + 0.5 * l2 * penalty;
  }
};

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_training_inputs(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights) {
  if (rows.rows() != labels.size()) fail(ErrorKind::model, "arity-mismatch", "rows and labels differ in length");
  if (!weights.empty() && weights.size() != labels.size()) {
    fail(ErrorKind::model, "arity-mismatch", "weights and labels differ in length");
  }
  if (rows.rows() < 2) fail(ErrorKind::model, "too-few-rows", "need at least 2 training rows");
  std::size_t pos = 0;
  for (auto y : labels) pos += y != 0;
  if (pos == 0 || pos == labels.size()) fail(ErrorKind::model, "single-class", "both classes must be present");
  for (double v : rows.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::model, "non-finite-feature", "training rows contain NaN or infinity");
  }
}

}  // namespace

LogisticModel fit_logistic(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                           double l2, int max_iterations, double tolerance) {
  const std::size_t d = rows.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += weights.empty() ? 1.0 : weights[i];
  const LogisticObjective obj{rows, labels, weights, total, l2};

  std::vector<double> theta(d + 1, 0.0), grad(d + 1), next(d + 1), next_grad(d + 1);
  double f = obj.evaluate(theta, grad);
  double step = 1.0;
  LogisticModel m;
  int it = 0;
  double gnorm = norm2(grad);
  for (; it < max_iterations && gnorm > tolerance; ++it) {
    const double g2 = gnorm * gnorm;
    double t = step;
    double fn = 0.0;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t c = 0; c <= d; ++c) next[c] = theta[c] - t * grad[c];
      fn = obj.evaluate(next, next_grad);
      if (fn <= f - 1e-4 * t * g2) break;
      t *= 0.5;
    }
    // Barzilai-Borwein estimate seeds the next backtracking search.
    double sy = 0.0, ss = 0.0;
    for (std::size_t c = 0; c <= d; ++c) {
      const double s = next[c] - theta[c];
      sy += s * (next_grad[c] - grad[c]);
      ss += s * s;
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(t * 2.0, 1e10);
    if (fn > f) break;  // no descent possible at machine precision
    theta.swap(next);
    grad.swap(next_grad);
    f = fn;
    gnorm = norm2(grad);
  }
  m.coef.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
  m.intercept = theta[d];
  m.iterations = it;
  m.gradient_norm = gnorm;
  return m;
}

NaiveBayesModel fit_gaussian_nb(const Matrix& rows, std::span<const std::uint8_t> labels, bool uniform_priors) {
  const std::size_t d = rows.cols();
  NaiveBayesModel m;
  std::array<std::size_t, 2> count{};
  for (int c = 0; c < 2; ++c) {
    m.mean[c].assign(d, 0.0);
    m.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const int c = labels[i] ? 1 : 0;
    ++count[c];
    for (std::size_t f = 0; f < d; ++f) m.mean[c][f] += rows(i, f);
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : m.mean[c]) v /= static_cast<double>(count[c]);
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const int c = labels[i] ? 1 : 0;
    for (std::size_t f = 0; f < d; ++f) {
      const double dv = rows(i, f) - m.mean[c][f];
      m.variance[c][f] += dv * dv;
    }
  }
  // Smoothing: 1e-9 times the largest per-feature variance over all rows.
  double max_var = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    double mu = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) mu += rows(i, f);
    mu /= static_cast<double>(rows.rows());
    double ss = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) ss += (rows(i, f) - mu) * (rows(i, f) - mu);
    max_var = std::max(max_var, ss / static_cast<double>(rows.rows()));
  }
  const double eps = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
  for (int c = 0; c < 2; ++c) {
    for (auto& v : m.variance[c]) v = v / static_cast<double>(count[c]) + eps;
  }
  const double n = static_cast<double>(rows.rows());
  for (int c = 0; c < 2; ++c) {
    m.log_prior[c] = uniform_priors ? std::log(0.5) : std::log(static_cast<double>(count[c]) / n);
  }
  return m;
}

double Tree::predict(std::span<const double> row) const noexcept {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

double GbdtModel::raw_score(std::span<const double> row) const noexcept {
  double s = base_score;
  for (const auto& t : trees) s += t.predict(row);
  return s;
}

double FittedClassifier::predict_one(std::span<const double> row) const {
  if (row.size() != feature_count) {
    fail(ErrorKind::model, "arity-mismatch",
         "row has " + std::to_string(row.size()) + " features, model expects " + std::to_string(feature_count));
  }
  if (const auto* lr = std::get_if<LogisticModel>(&params)) {
    double z = lr->intercept;
    for (std::size_t c = 0; c < row.size(); ++c) z += lr->coef[c] * row[c];
    return sigmoid(z);
  }
  if (const auto* nb = std::get_if<NaiveBayesModel>(&params)) {
    std::array<double, 2> ll = nb->log_prior;
    for (int c = 0; c < 2; ++c) {
      for (std::size_t f = 0; f < row.size(); ++f) {
        const double var = nb->variance[c][f];
        const double dv = row[f] - nb->mean[c][f];
        ll[c] += -0.5 * std::log(2.0 * std::numbers::pi * var) - dv * dv / (2.0 * var);
      }
    }
    return sigmoid(ll[1] - ll[0]);
  }
  return sigmoid(std::get<GbdtModel>(params).raw_score(row));
}

FittedClassifier fit_classifier(const ClassifierSpec& spec, const Matrix& rows, std::span<const std::uint8_t> labels,
                                std::span<const double> weights) {
  check_training_inputs(rows, labels, weights);
  FittedClassifier m;
  m.spec = spec;
  m.feature_count = rows.cols();
  switch (spec.kind) {
    case ClassifierKind::logistic:
      m.params = fit_logistic(rows, labels, weights, spec.l2, spec.max_iterations, spec.tolerance);
      break;
    case ClassifierKind::gaussian_nb:
      m.params = fit_gaussian_nb(rows, labels, spec.class_weighting);
      break;
    case ClassifierKind::gbdt_exact:
      m.params = fit_gbdt_exact(rows, labels, weights, spec.gbdt);
      break;
    case ClassifierKind::gbdt_hist:
      m.params = fit_gbdt_hist(rows, labels, weights, spec.gbdt);
      break;
  }
  return m;
}

std::vector<double> predict_proba(const FittedClassifier& model, const Matrix& rows) {
  if (!rows.empty() && rows.cols() != model.feature_count) {
    fail(ErrorKind::model, "arity-mismatch",
         "rows have " + std::to_string(rows.cols()) + " features, model expects " +
             std::to_string(model.feature_count));
  }
  std::vector<double> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = model.predict_one(rows.row(i));
  return out;
}

std::uint64_t model_hash(const FittedClassifier& model) {
  std::uint64_t h = fnv1a(model.spec.canonical());
  std::visit(
      [&h](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          h = hash_values(p.coef, h);
          h = hash_values(std::span<const double>(&p.intercept, 1), h);
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          for (int c = 0; c < 2; ++c) {
            h = hash_values(p.mean[c], h);
            h = hash_values(p.variance[c], h);
          }
          h = hash_values(p.log_prior, h);
        } else {
          h = hash_values(std::span<const double>(&p.base_score, 1), h);
          for (const auto& t : p.trees) {
            for (const auto& n : t.nodes) {
              const double fields[] = {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                                       static_cast<double>(n.right), n.value};
              h = hash_values(fields, h);
            }
          }
        }
      },
      model.params);
  return h;
}

}  // namespace agibench
