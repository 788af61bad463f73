#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"
#include "mmf/gbdt/binning.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::gbdt {

namespace {

using features::FeatureTable;

// Splits must improve the regularized objective by more than this.
constexpr double kMinGain = 1e-12;

double leaf_score(double g, double h, double l2) {
  const double d = h + l2;
  return d > 0.0 ? g * g / d : 0.0;
}

double leaf_value(double g, double h, double l2) {
  const double d = h + l2;
  return d > 0.0 ? g / d : 0.0;
}

struct Split {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;
  bool found() const { return feature >= 0; }
};

struct Node {
  int id = 0;
  int depth = 0;
  std::vector<std::uint32_t> rows;
  double g = 0.0, h = 0.0;
  Histogram hist;
  Split best;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& m, const std::vector<double>& g, const std::vector<double>& h,
              const std::vector<int>& feats, const GbdtConfig& cfg)
      : m_(m), g_(g), h_(h), feats_(feats), cfg_(cfg) {}

  Tree grow(std::vector<std::uint32_t> rows) {
    tree_.nodes.clear();
    Node root = make_node(std::move(rows), 0);
    build_hist(root);
    switch (cfg_.strategy) {
      case GrowthStrategy::level_wise: grow_level_wise(std::move(root)); break;
      case GrowthStrategy::leaf_wise: grow_leaf_wise(std::move(root)); break;
      case GrowthStrategy::oblivious: grow_oblivious(std::move(root)); break;
    }
    return std::move(tree_);
  }

 private:
  Node make_node(std::vector<std::uint32_t> rows, int depth) {
    Node n;
    n.id = static_cast<int>(tree_.nodes.size());
    n.depth = depth;
    n.rows = std::move(rows);
    for (auto r : n.rows) {
      n.g += g_[r];
      n.h += h_[r];
    }
    TreeNode t;
    t.value = static_cast<int>(n.rows.size()) >= cfg_.min_samples_leaf ? leaf_value(n.g, n.h, cfg_.l2_reg) : 0.0;
    tree_.nodes.push_back(t);
    return n;
  }

  void build_hist(Node& n) { build_histogram(m_, n.rows, g_, h_, feats_, n.hist); }

  // Gain of splitting after `bin` given cumulative left sums, or -inf when the
  // split violates min_samples_leaf.
  double split_gain(const Node& n, double gl, double hl, std::uint32_t nl) const {
    const auto nr = static_cast<std::uint32_t>(n.rows.size()) - nl;
    const auto min_leaf = static_cast<std::uint32_t>(cfg_.min_samples_leaf);
    if (nl < min_leaf || nr < min_leaf) return -HUGE_VAL;
    const double l2 = cfg_.l2_reg;
    return leaf_score(gl, hl, l2) + leaf_score(n.g - gl, n.h - hl, l2) - leaf_score(n.g, n.h, l2);
  }

  void find_best(Node& n) const {
    const int nf = static_cast<int>(feats_.size());
    std::vector<Split> per(nf);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nf; ++i) {
      const int f = feats_[i];
      const HistBin* hist = n.hist.data() + static_cast<std::size_t>(f) * kMaxBins;
      const int nb = m_.bins[f].count();
      double gl = 0.0, hl = 0.0;
      std::uint32_t nl = 0;
      Split best;
      for (int b = 0; b + 1 < nb; ++b) {
        gl += hist[b].g;
        hl += hist[b].h;
        nl += hist[b].n;
        const double gain = split_gain(n, gl, hl, nl);
        if (gain > kMinGain && gain > best.gain) best = Split{gain, f, b};
      }
      per[i] = best;
    }
    n.best = Split{};
    for (const auto& s : per)
      if (s.found() && s.gain > n.best.gain) n.best = s;
  }

  // Partitions the node, records the split and returns the two children with
  // histograms (smaller one built, larger one by subtraction).
  std::pair<Node, Node> split(Node& n, int feature, int bin, bool with_hist) {
    std::vector<std::uint32_t> lr, rr;
    const auto& codes = m_.codes[feature];
    for (auto r : n.rows) (codes[r] <= bin ? lr : rr).push_back(r);
    Node left = make_node(std::move(lr), n.depth + 1);
    Node right = make_node(std::move(rr), n.depth + 1);
    TreeNode& t = tree_.nodes[n.id];
    t.feature = feature;
    t.threshold = m_.bins[feature].threshold_after(bin);
    t.left = left.id;
    t.right = right.id;
    t.value = 0.0;
    if (with_hist) {
      Node& small = left.rows.size() <= right.rows.size() ? left : right;
      Node& large = left.rows.size() <= right.rows.size() ? right : left;
      build_hist(small);
      subtract_histogram(n.hist, small.hist, feats_, large.hist);
    }
    n.hist.clear();
    n.hist.shrink_to_fit();
    return {std::move(left), std::move(right)};
  }

  void grow_level_wise(Node root) {
    std::vector<Node> frontier;
    frontier.push_back(std::move(root));
    for (int d = 0; d < cfg_.max_depth && !frontier.empty(); ++d) {
      std::vector<Node> next;
      for (auto& n : frontier) {
        find_best(n);
        if (!n.best.found()) continue;
        auto [l, r] = split(n, n.best.feature, n.best.bin, d + 1 < cfg_.max_depth);
        next.push_back(std::move(l));
        next.push_back(std::move(r));
      }
      frontier = std::move(next);
    }
  }

  void grow_leaf_wise(Node root) {
    std::vector<Node> leaves;
    find_best(root);
    leaves.push_back(std::move(root));
    int count = 1;
    while (count < cfg_.max_leaves) {
      int pick = -1;
      for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
        const auto& s = leaves[i].best;
        if (!s.found()) continue;
        if (pick < 0 || s.gain > leaves[pick].best.gain ||
            (s.gain == leaves[pick].best.gain && leaves[i].id < leaves[pick].id))
          pick = i;
      }
      if (pick < 0) break;
      Node n = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + pick);
      auto [l, r] = split(n, n.best.feature, n.best.bin, true);
      find_best(l);
      find_best(r);
      leaves.push_back(std::move(l));
      leaves.push_back(std::move(r));
      ++count;
    }
  }

  void grow_oblivious(Node root) {
    std::vector<Node> frontier;
    frontier.push_back(std::move(root));
    for (int d = 0; d < cfg_.max_depth; ++d) {
      const int nf = static_cast<int>(feats_.size());
      std::vector<Split> per(nf);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < nf; ++i) {
        const int f = feats_[i];
        const int nb = m_.bins[f].count();
        std::vector<double> total(static_cast<std::size_t>(std::max(nb - 1, 0)), 0.0);
        for (const auto& n : frontier) {
          const HistBin* hist = n.hist.data() + static_cast<std::size_t>(f) * kMaxBins;
          double gl = 0.0, hl = 0.0;
          std::uint32_t nl = 0;
          for (int b = 0; b + 1 < nb; ++b) {
            gl += hist[b].g;
            hl += hist[b].h;
            nl += hist[b].n;
            const double gain = split_gain(n, gl, hl, nl);
            if (gain > 0.0) total[b] += gain;
          }
        }
        Split best;
        for (int b = 0; b + 1 < nb; ++b)
          if (total[b] > kMinGain && total[b] > best.gain) best = Split{total[b], f, b};
        per[i] = best;
      }
      Split best;
      for (const auto& s : per)
        if (s.found() && s.gain > best.gain) best = s;
      if (!best.found()) break;
      const bool with_hist = d + 1 < cfg_.max_depth;
      std::vector<Node> next;
      for (auto& n : frontier) {
        auto [l, r] = split(n, best.feature, best.bin, with_hist);
        next.push_back(std::move(l));
        next.push_back(std::move(r));
      }
      frontier = std::move(next);
    }
  }

  const BinnedMatrix& m_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const std::vector<int>& feats_;
  const GbdtConfig& cfg_;
  Tree tree_;
};

std::vector<const double*> column_pointers(const FeatureTable& table, const std::vector<std::string>& names) {
  std::vector<const double*> cols(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) cols[i] = table.column(table.index(names[i])).data();
  return cols;
}

void accumulate(const Tree& tree, double lr, const std::vector<const double*>& cols, std::vector<double>& f) {
  const auto n = static_cast<std::ptrdiff_t>(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) f[r] += lr * tree.evaluate(cols.data(), static_cast<std::size_t>(r));
}

// Mean with one correction pass, so a constant column returns its value.
double stable_mean(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v;
  const double n = static_cast<double>(y.size());
  const double m = s / n;
  double c = 0.0;
  for (double v : y) c += v - m;
  return m + c / n;
}

std::vector<std::uint32_t> sample_indices(std::size_t n, double frac, Rng& rng) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  if (frac >= 1.0) return idx;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frac * static_cast<double>(n))));
  shuffle(idx, rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<double> GbdtModel::predict(const FeatureTable& rows) const {
  const auto cols = column_pointers(rows, feature_names);
  std::vector<double> f(rows.rows(), base_prediction);
  for (const auto& t : trees) accumulate(t, config.learning_rate, cols, f);
  return f;
}

double GbdtModel::max_abs_leaf() const {
  double m = 0.0;
  for (const auto& t : trees)
    for (const auto& n : t.nodes)
      if (n.is_leaf()) m = std::max(m, std::abs(n.value));
  return m;
}

GbdtModel fit(const FeatureTable& train, const FeatureTable& valid, const GbdtConfig& cfg,
              std::optional<std::span<const double>> weights) {
  cfg.validate();
  if (train.rows() == 0) throw InvalidArgument("gbdt fit: empty training table");
  if (train.cols() == 0) throw InvalidArgument("gbdt fit: no feature columns");
  if (train.rows() > 0xFFFFFFFFu) throw InvalidArgument("gbdt fit: too many rows");
  const auto y = train.target();
  const std::size_t n = train.rows();

  std::vector<double> w(n, 1.0);
  if (weights) {
    if (weights->size() != n) throw InvalidArgument("gbdt fit: weights length differs from training rows");
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*weights)[i] > 0.0) || !std::isfinite((*weights)[i]))
        throw InvalidArgument("gbdt fit: weights must be positive and finite");
      w[i] = (*weights)[i];
    }
  }

  GbdtModel model;
  model.config = cfg;
  model.feature_names = train.columns();
  model.base_prediction = stable_mean(y);

  const bool has_valid = valid.rows() > 0;
  std::vector<const double*> vcols;
  std::span<const double> yv;
  if (has_valid) {
    vcols = column_pointers(valid, model.feature_names);
    yv = valid.target();
  }
  const auto tcols = column_pointers(train, model.feature_names);

  const BinnedMatrix m = bin_table(train);
  std::vector<double> f(n, model.base_prediction), fv(valid.rows(), model.base_prediction);
  std::vector<double> g(n);
  const bool subsampled = cfg.subsample_rows < 1.0 || cfg.subsample_cols < 1.0;

  double best = has_valid ? rmse(fv, yv) : rmse(f, y);
  std::size_t best_count = 0;
  int since_best = 0;
  for (int it = 0; it < cfg.max_trees; ++it) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(it)));
    auto rows = sample_indices(n, cfg.subsample_rows, rng);
    auto fidx = sample_indices(train.cols(), cfg.subsample_cols, rng);
    std::vector<int> feats(fidx.begin(), fidx.end());
    for (std::size_t i = 0; i < n; ++i) g[i] = w[i] * (y[i] - f[i]);

    TreeBuilder builder(m, g, w, feats, cfg);
    Tree tree = builder.grow(std::move(rows)).canonical();
    if (tree.nodes.size() == 1) {
      if (!subsampled) break;
      IterationRecord rec{rmse(f, y), has_valid ? std::optional<double>(rmse(fv, yv)) : std::nullopt};
      model.train_history.push_back(rec);
      if (++since_best >= cfg.early_stopping_rounds) break;
      continue;
    }
    accumulate(tree, cfg.learning_rate, tcols, f);
    if (has_valid) accumulate(tree, cfg.learning_rate, vcols, fv);
    model.trees.push_back(std::move(tree));

    IterationRecord rec{rmse(f, y), has_valid ? std::optional<double>(rmse(fv, yv)) : std::nullopt};
    model.train_history.push_back(rec);
    const double score = has_valid ? *rec.valid_rmse : rec.train_rmse;
    if (score < best) {
      best = score;
      best_count = model.trees.size();
      since_best = 0;
    } else if (++since_best >= cfg.early_stopping_rounds) {
      break;
    }
  }
  model.trees.resize(best_count);
  return model;
}

}  // namespace mmf::gbdt
