// Second-order gradient boosting on the weighted logistic loss.
//
// Both learners share the split gain
//   0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda))
// and leaf value -G/(H+lambda) scaled by the learning rate. The exact learner
// grows depth-wise over presorted feature columns; the histogram learner
// grows leaf-wise over at most 255 quantile bins per feature.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "agibench/tabular.hpp"

namespace agibench {

namespace {

constexpr double kMinGain = 1e-10;

struct GradientPair {
  std::vector<double> g;
  std::vector<double> h;
};

double prior_log_odds(std::span<const std::uint8_t> y, std::span<const double> w) {
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    (y[i] ? pos : neg) += wi;
  }
  return std::log(pos / neg);
}

void compute_gradients(std::span<const double> scores, std::span<const std::uint8_t> y, std::span<const double> w,
                       GradientPair& out) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = sigmoid(scores[i]);
    const double wi = w.empty() ? 1.0 : w[i];
    out.g[i] = wi * (p - (y[i] ? 1.0 : 0.0));
    out.h[i] = std::max(wi * p * (1.0 - p), 1e-16);
  }
}

inline double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

double split_gain(double gl, double hl, double g, double h, double lambda) {
  return 0.5 * (leaf_objective(gl, hl, lambda) + leaf_objective(g - gl, h - hl, lambda) -
                leaf_objective(g, h, lambda));
}

double leaf_value(double g, double h, const GbdtParams& p) { return -g / (h + p.lambda) * p.learning_rate; }

}  // namespace

GbdtModel fit_gbdt_exact(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                         const GbdtParams& params) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();

  std::vector<std::vector<std::uint32_t>> order(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& o = order[f];
    std::iota(o.begin(), o.end(), 0U);
    std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return rows(a, f) < rows(b, f); });
  }

  GbdtModel model;
  model.base_score = prior_log_odds(labels, weights);
  std::vector<double> scores(n, model.base_score);
  GradientPair gp{std::vector<double>(n), std::vector<double>(n)};
  std::vector<int> node_of(n);

  struct NodeStat {
    double g = 0, h = 0;
    std::size_t count = 0;
  };
  struct Candidate {
    double gain = kMinGain;
    int feature = -1;
    double threshold = 0.0;
    NodeStat left;
  };
  struct Scan {
    double gl = 0, hl = 0;
    std::size_t cl = 0;
    double last = 0.0;
  };

  const auto min_samples = static_cast<std::size_t>(std::max(1, params.min_child_samples));
  for (int round = 0; round < params.rounds; ++round) {
    compute_gradients(scores, labels, weights, gp);
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<NodeStat> stats(1);
    for (std::size_t i = 0; i < n; ++i) {
      stats[0].g += gp.g[i];
      stats[0].h += gp.h[i];
    }
    stats[0].count = n;
    std::fill(node_of.begin(), node_of.end(), 0);

    std::vector<int> active{0};
    for (int depth = 0; !active.empty() && (params.max_depth <= 0 || depth < params.max_depth); ++depth) {
      std::vector<int> slot_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < active.size(); ++s) slot_of[static_cast<std::size_t>(active[s])] = static_cast<int>(s);
      std::vector<Candidate> best(active.size());
      std::vector<Scan> scan(active.size());

      for (std::size_t f = 0; f < d; ++f) {
        std::fill(scan.begin(), scan.end(), Scan{});
        for (const std::uint32_t i : order[f]) {
          const int slot = slot_of[static_cast<std::size_t>(node_of[i])];
          if (slot < 0) continue;
          Scan& sc = scan[static_cast<std::size_t>(slot)];
          const double v = rows(i, f);
          if (sc.cl > 0 && v != sc.last) {
            const NodeStat& st = stats[static_cast<std::size_t>(active[static_cast<std::size_t>(slot)])];
            const std::size_t cr = st.count - sc.cl;
            const double hr = st.h - sc.hl;
            if (sc.cl >= min_samples && cr >= min_samples && sc.hl >= params.min_child_hessian &&
                hr >= params.min_child_hessian) {
              const double gain = split_gain(sc.gl, sc.hl, st.g, st.h, params.lambda);
              Candidate& b = best[static_cast<std::size_t>(slot)];
              if (gain > b.gain) {
                double thr = 0.5 * (sc.last + v);
                if (!(thr < v)) thr = sc.last;
                b = {gain, static_cast<int>(f), thr, {sc.gl, sc.hl, sc.cl}};
              }
            }
          }
          sc.gl += gp.g[i];
          sc.hl += gp.h[i];
          ++sc.cl;
          sc.last = v;
        }
      }

      std::vector<int> next_active;
      for (std::size_t s = 0; s < active.size(); ++s) {
        const Candidate& b = best[s];
        if (b.feature < 0) continue;
        const auto id = static_cast<std::size_t>(active[s]);
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[id].feature = b.feature;
        tree.nodes[id].threshold = b.threshold;
        tree.nodes[id].left = left;
        tree.nodes[id].right = left + 1;
        const NodeStat parent = stats[id];
        stats.push_back(b.left);
        stats.push_back({parent.g - b.left.g, parent.h - b.left.h, parent.count - b.left.count});
        next_active.push_back(left);
        next_active.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
        if (node.feature >= 0) {
          node_of[i] = rows(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
        }
      }
      active.swap(next_active);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature < 0) tree.nodes[k].value = leaf_value(stats[k].g, stats[k].h, params);
    }
    for (std::size_t i = 0; i < n; ++i) scores[i] += tree.nodes[static_cast<std::size_t>(node_of[i])].value;
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace {

struct BinnedData {
  std::size_t n = 0;
  std::vector<std::vector<double>> edges;  // per feature, ascending upper bin bounds
  std::vector<std::size_t> offset;         // per feature, start in a flat histogram
  std::size_t total_bins = 0;
  std::vector<std::uint8_t> codes;         // feature-major, n per feature

  std::size_t bins(std::size_t f) const { return edges[f].size() + 1; }
  std::uint8_t code(std::size_t f, std::size_t i) const { return codes[f * n + i]; }
};

BinnedData bin_features(const Matrix& rows, int max_bins) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  const auto nb = static_cast<std::size_t>(std::clamp(max_bins, 2, 256));
  BinnedData b;
  b.n = n;
  b.edges.resize(d);
  b.offset.resize(d);
  b.codes.resize(d * n);
  std::vector<double> col(n);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t i = 0; i < n; ++i) col[i] = rows(i, f);
    std::sort(col.begin(), col.end());
    std::vector<double> uniq;
    std::vector<std::size_t> counts;
    for (double v : col) {
      if (uniq.empty() || v != uniq.back()) {
        uniq.push_back(v);
        counts.push_back(1);
      } else {
        ++counts.back();
      }
    }
    auto& e = b.edges[f];
    auto midpoint = [](double a, double c) {
      const double m = 0.5 * (a + c);
      return m < c ? m : a;
    };
    if (uniq.size() <= nb) {
      for (std::size_t u = 0; u + 1 < uniq.size(); ++u) e.push_back(midpoint(uniq[u], uniq[u + 1]));
    } else {
      // Close a bin once its share of rows reaches n / nb.
      std::size_t cum = 0;
      std::size_t next_bin = 1;
      for (std::size_t u = 0; u + 1 < uniq.size() && e.size() + 1 < nb; ++u) {
        cum += counts[u];
        if (static_cast<double>(cum) >= static_cast<double>(next_bin) * static_cast<double>(n) / static_cast<double>(nb)) {
          e.push_back(midpoint(uniq[u], uniq[u + 1]));
          while (static_cast<double>(next_bin) * static_cast<double>(n) / static_cast<double>(nb) <= static_cast<double>(cum)) {
            ++next_bin;
          }
        }
      }
    }
    b.offset[f] = b.total_bins;
    b.total_bins += e.size() + 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = rows(i, f);
      b.codes[f * n + i] =
          static_cast<std::uint8_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
    }
  }
  return b;
}

struct Histogram {
  std::vector<double> g, h;
  std::vector<std::uint32_t> c;
  explicit Histogram(std::size_t bins = 0) : g(bins, 0.0), h(bins, 0.0), c(bins, 0) {}
  void subtract(const Histogram& other) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] -= other.g[k];
      h[k] -= other.h[k];
      c[k] -= other.c[k];
    }
  }
};

struct Leaf {
  int node = 0;
  int depth = 0;
  std::vector<std::uint32_t> rows;
  double g = 0, h = 0;
  Histogram hist;
  double gain = 0.0;
  int feature = -1;
  std::size_t bin = 0;
};

void build_histogram(const BinnedData& b, const GradientPair& gp, Leaf& leaf) {
  leaf.hist = Histogram(b.total_bins);
  leaf.g = leaf.h = 0.0;
  for (const auto i : leaf.rows) {
    leaf.g += gp.g[i];
    leaf.h += gp.h[i];
  }
  const std::size_t d = b.edges.size();
  for (std::size_t f = 0; f < d; ++f) {
    const std::size_t off = b.offset[f];
    const std::uint8_t* codes = b.codes.data() + f * b.n;
    for (const auto i : leaf.rows) {
      const std::size_t k = off + codes[i];
      leaf.hist.g[k] += gp.g[i];
      leaf.hist.h[k] += gp.h[i];
      ++leaf.hist.c[k];
    }
  }
}

void find_best_split(const BinnedData& b, const GbdtParams& p, Leaf& leaf) {
  leaf.gain = kMinGain;
  leaf.feature = -1;
  if (p.max_depth > 0 && leaf.depth >= p.max_depth) return;
  const auto min_samples = static_cast<std::size_t>(std::max(1, p.min_child_samples));
  const std::size_t count = leaf.rows.size();
  for (std::size_t f = 0; f < b.edges.size(); ++f) {
    const std::size_t off = b.offset[f];
    double gl = 0, hl = 0;
    std::size_t cl = 0;
    for (std::size_t bin = 0; bin + 1 < b.bins(f); ++bin) {
      gl += leaf.hist.g[off + bin];
      hl += leaf.hist.h[off + bin];
      cl += leaf.hist.c[off + bin];
      if (cl < min_samples) continue;
      if (count - cl < min_samples) break;
      const double hr = leaf.h - hl;
      if (hl < p.min_child_hessian || hr < p.min_child_hessian) continue;
      const double gain = split_gain(gl, hl, leaf.g, leaf.h, p.lambda);
      if (gain > leaf.gain) {
        leaf.gain = gain;
        leaf.feature = static_cast<int>(f);
        leaf.bin = bin;
      }
    }
  }
}

}  // namespace

GbdtModel fit_gbdt_hist(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                        const GbdtParams& params) {
  const std::size_t n = rows.rows();
  const BinnedData binned = bin_features(rows, params.bins);
  GbdtModel model;
  model.base_score = prior_log_odds(labels, weights);
  std::vector<double> scores(n, model.base_score);
  GradientPair gp{std::vector<double>(n), std::vector<double>(n)};
  const auto max_leaves = static_cast<std::size_t>(std::max(2, params.max_leaves));

  for (int round = 0; round < params.rounds; ++round) {
    compute_gradients(scores, labels, weights, gp);
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves(1);
    leaves[0].rows.resize(n);
    std::iota(leaves[0].rows.begin(), leaves[0].rows.end(), 0U);
    build_histogram(binned, gp, leaves[0]);
    find_best_split(binned, params, leaves[0]);

    while (leaves.size() < max_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t l = 0; l < leaves.size(); ++l) {
        if (leaves[l].feature >= 0 && (pick == leaves.size() || leaves[l].gain > leaves[pick].gain)) pick = l;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      const auto f = static_cast<std::size_t>(parent.feature);
      Leaf left, right;
      left.depth = right.depth = parent.depth + 1;
      for (const auto i : parent.rows) {
        (binned.code(f, i) <= parent.bin ? left.rows : right.rows).push_back(i);
      }
      const int lnode = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& pn = tree.nodes[static_cast<std::size_t>(parent.node)];
      pn.feature = parent.feature;
      pn.threshold = binned.edges[f][parent.bin];
      pn.left = lnode;
      pn.right = lnode + 1;
      left.node = lnode;
      right.node = lnode + 1;

      // Build the smaller child, derive the larger by subtraction.
      Leaf& small = left.rows.size() <= right.rows.size() ? left : right;
      Leaf& large = left.rows.size() <= right.rows.size() ? right : left;
      build_histogram(binned, gp, small);
      large.hist = std::move(parent.hist);
      large.hist.subtract(small.hist);
      large.g = parent.g - small.g;
      large.h = parent.h - small.h;
      find_best_split(binned, params, left);
      find_best_split(binned, params, right);
      leaves[pick] = std::move(left);
      leaves.push_back(std::move(right));
    }
    for (const auto& leaf : leaves) {
      const double v = leaf_value(leaf.g, leaf.h, params);
      tree.nodes[static_cast<std::size_t>(leaf.node)].value = v;
      for (const auto i : leaf.rows) scores[i] += v;
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace agibench
