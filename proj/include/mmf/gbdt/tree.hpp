#pragma once

#include <cstddef>
#include <vector>

namespace mmf::gbdt {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Binary regression tree; node 0 is the root. x[feature] <= threshold goes
// left.
struct Tree {
  std::vector<TreeNode> nodes;

  // cols[f] points at the column of feature f.
  double evaluate(const double* const* cols, std::size_t row) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = cols[n.feature][row] <= n.threshold ? n.left : n.right;
    }
    return nodes[i].value;
  }

  std::size_t leaf_count() const;
  std::size_t depth() const;
  // Same tree with nodes renumbered in preorder (left subtree first), the
  // order the JSON loader produces.
  Tree canonical() const;
  bool operator==(const Tree&) const = default;
};

}  // namespace mmf::gbdt
