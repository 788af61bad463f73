#include <algorithm>
#include <cmath>
#include <utility>

#include "mmf/common/error.hpp"
#include "mmf/gbdt/gbdt.hpp"

namespace mmf::gbdt {

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree Tree::canonical() const {
  Tree out;
  out.nodes.reserve(nodes.size());
  auto visit = [&](auto&& self, int i) -> int {
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(nodes[i]);
    if (!nodes[i].is_leaf()) {
      const int l = self(self, nodes[i].left);
      const int r = self(self, nodes[i].right);
      out.nodes[id].left = l;
      out.nodes[id].right = r;
    }
    return id;
  };
  if (!nodes.empty()) visit(visit, 0);
  return out;
}

std::size_t Tree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return best;
}

std::string_view to_string(GrowthStrategy s) {
  switch (s) {
    case GrowthStrategy::leaf_wise: return "leaf_wise";
    case GrowthStrategy::level_wise: return "level_wise";
    case GrowthStrategy::oblivious: return "oblivious";
  }
  return "?";
}

GrowthStrategy parse_strategy(std::string_view s) {
  if (s == "leaf_wise") return GrowthStrategy::leaf_wise;
  if (s == "level_wise") return GrowthStrategy::level_wise;
  if (s == "oblivious") return GrowthStrategy::oblivious;
  throw InvalidArgument("unknown growth strategy '" + std::string(s) + "'");
}

void GbdtConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("invalid gbdt config: " + what); };
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0,1]");
  if (max_trees < 0) fail("max_trees must be >= 0");
  if (strategy == GrowthStrategy::leaf_wise && max_leaves < 2) fail("max_leaves must be >= 2");
  if (strategy != GrowthStrategy::leaf_wise && max_depth < 1) fail("max_depth must be >= 1");
  if (min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
  if (!(l2_reg >= 0.0) || !std::isfinite(l2_reg)) fail("l2_reg must be >= 0");
  if (!(subsample_rows > 0.0 && subsample_rows <= 1.0)) fail("subsample_rows must be in (0,1]");
  if (!(subsample_cols > 0.0 && subsample_cols <= 1.0)) fail("subsample_cols must be in (0,1]");
  if (early_stopping_rounds < 1) fail("early_stopping_rounds must be >= 1");
}

std::vector<double> predict_tree(const Tree& tree, const features::FeatureTable& table) {
  std::vector<const double*> cols(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) cols[c] = table.column(c).data();
  std::vector<double> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) out[r] = tree.evaluate(cols.data(), r);
  return out;
}

double rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw InvalidArgument("rmse: length mismatch");
  if (pred.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

}  // namespace mmf::gbdt
