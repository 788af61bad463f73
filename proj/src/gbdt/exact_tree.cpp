#include <algorithm>
#include <numeric>

#include "mmf/common/error.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::gbdt {

namespace {

struct ExactSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Best SSE-reducing split of `rows`; lowest feature, then lowest threshold win
// ties.
ExactSplit best_exact_split(const features::FeatureTable& t, std::span<const double> y,
                            const std::vector<std::uint32_t>& rows, int min_leaf) {
  ExactSplit best;
  const std::size_t n = rows.size();
  double total = 0.0;
  for (auto r : rows) total += y[r];
  const double parent = total * total / static_cast<double>(n);
  std::vector<std::uint32_t> order(rows);
  for (std::size_t f = 0; f < t.cols(); ++f) {
    const auto x = t.column(f);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    double left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left += y[order[i]];
      const double xa = x[order[i]], xb = x[order[i + 1]];
      if (!(xa < xb)) continue;
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf)) continue;
      const double right = total - left;
      const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr) - parent;
      if (gain > 1e-12 && gain > best.gain) {
        double thr = xa + (xb - xa) / 2.0;
        if (thr >= xb) thr = xa;
        best = ExactSplit{gain, static_cast<int>(f), thr};
      }
    }
  }
  return best;
}

}  // namespace

Tree single_tree_fit(const features::FeatureTable& train, int depth, int min_leaf) {
  if (train.rows() == 0) throw InvalidArgument("single_tree_fit: empty training table");
  if (depth < 0 || min_leaf < 1) throw InvalidArgument("single_tree_fit: depth >= 0 and min_leaf >= 1 required");
  const auto y = train.target();
  Tree tree;
  struct Pending {
    int id;
    std::vector<std::uint32_t> rows;
  };
  auto leaf_mean = [&](const std::vector<std::uint32_t>& rows) {
    double s = 0.0;
    for (auto r : rows) s += y[r];
    return s / static_cast<double>(rows.size());
  };
  std::vector<std::uint32_t> all(train.rows());
  std::iota(all.begin(), all.end(), 0u);
  tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf_mean(all)});
  std::vector<Pending> frontier{{0, std::move(all)}};
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<Pending> next;
    for (auto& p : frontier) {
      const auto s = best_exact_split(train, y, p.rows, min_leaf);
      if (s.feature < 0) continue;
      std::vector<std::uint32_t> lr, rr;
      const auto x = train.column(static_cast<std::size_t>(s.feature));
      for (auto r : p.rows) (x[r] <= s.threshold ? lr : rr).push_back(r);
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf_mean(lr)});
      tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf_mean(rr)});
      auto& node = tree.nodes[p.id];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.left = l;
      node.right = l + 1;
      node.value = 0.0;
      next.push_back({l, std::move(lr)});
      next.push_back({l + 1, std::move(rr)});
    }
    frontier = std::move(next);
  }
  return tree.canonical();
}

}  // namespace mmf::gbdt
