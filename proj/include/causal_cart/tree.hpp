#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causal_cart/dgp.hpp"
#include "causal_cart/estimators.hpp"
#include "causal_cart/splitting.hpp"

namespace ccart {

// Axis-aligned cell of [0,1]^p. Along each coordinate the cell is (lo, hi],
// closed at lo as well when lo_closed is set (the root starts closed at 0).
struct Box {
  std::vector<double> lo, hi;
  std::vector<std::uint8_t> lo_closed;

  static Box unit(std::size_t p);
  [[nodiscard]] bool contains(std::span<const double> x) const noexcept;
  [[nodiscard]] double measure() const noexcept;
};

struct TreeNode {
  std::size_t depth = 0;
  SplitDecision split;  // valid iff the node is internal
  int left = -1;
  int right = -1;
  Box box;
  std::vector<std::uint32_t> rows;  // splitting rows that reached the node

  [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }
};

class Tree {
 public:
  Tree(std::size_t p, std::size_t max_depth);

  [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t dim() const noexcept { return p_; }
  [[nodiscard]] std::size_t max_depth() const noexcept { return max_depth_; }

  // Node id of the leaf whose box contains x (no domain check).
  [[nodiscard]] std::size_t leaf_of(std::span<const double> x) const noexcept;
  // Leaf ids in left-to-right depth-first order.
  [[nodiscard]] std::vector<std::size_t> leaves() const;

  // Turns leaf `id` into an internal node with two children; returns the
  // left child id (the right child is left + 1).
  std::size_t split_leaf(std::size_t id, const SplitDecision& split,
                         std::vector<std::uint32_t> left_rows,
                         std::vector<std::uint32_t> right_rows);
  TreeNode& node(std::size_t id) { return nodes_[id]; }

 private:
  std::size_t p_;
  std::size_t max_depth_;
  std::vector<TreeNode> nodes_;
};

/// Grows a maximal tree of the given depth: every terminal node is split at
/// each level unless it holds at most one row, all its covariate rows are
/// equal, all its outcomes (with treatment, for causal rules) are equal, or
/// the rule has no valid candidate. Throws ConfigError when depth < 1.
Tree grow_tree(const Dataset& split_data, const SplitRule& rule, std::size_t depth,
               Exec exec = Exec::serial);

/// X-adaptive variant: `levels[j]` supplies the outcomes used to choose every
/// split at level j. All levels must share the same covariates.
Tree grow_tree(std::span<const Dataset> levels, const SplitRule& rule,
               std::size_t depth, Exec exec = Exec::serial);

struct LeafSpec {
  LeafKind kind = LeafKind::dim;
  double xi = 0.5;  // read by LeafKind::ipw
};

struct LeafInfo {
  std::size_t node = 0;
  Box box;
  double measure = 0.0;
  LeafEstimate estimate;
};

class FittedTree {
 public:
  FittedTree(Tree tree, std::vector<LeafEstimate> by_node);

  [[nodiscard]] const Tree& tree() const noexcept { return tree_; }
  // DomainError when x is outside the unit cube or has the wrong dimension.
  [[nodiscard]] double predict(std::span<const double> x) const;
  [[nodiscard]] const LeafEstimate& estimate_at(std::span<const double> x) const;
  [[nodiscard]] const LeafEstimate& estimate_of(std::size_t node) const {
    return by_node_[node];
  }
  [[nodiscard]] std::vector<LeafInfo> leaf_partition() const;
  [[nodiscard]] std::vector<double> leaf_measures() const;

  // Line-oriented dump, one node per line in preorder:
  //   "<depth> split <coord> <threshold> <index>"
  //   "<depth> leaf <value> <n> <n0> <n1> <degenerate>"
  [[nodiscard]] std::string to_text() const;
  static FittedTree from_text(const std::string& text);

 private:
  Tree tree_;
  std::vector<LeafEstimate> by_node_;
};

FittedTree fit_leaves(const Tree& tree, const Dataset& fit_data, const LeafSpec& leaf);

}  // namespace ccart
