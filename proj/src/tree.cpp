#include "causal_cart/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "causal_cart/errors.hpp"

namespace ccart {

Box Box::unit(std::size_t p) {
  Box b;
  b.lo.assign(p, 0.0);
  b.hi.assign(p, 1.0);
  b.lo_closed.assign(p, 1);
  return b;
}

bool Box::contains(std::span<const double> x) const noexcept {
  for (std::size_t l = 0; l < lo.size(); ++l) {
    if (x[l] > hi[l] || x[l] < lo[l]) return false;
    if (x[l] == lo[l] && !lo_closed[l]) return false;
  }
  return true;
}

double Box::measure() const noexcept {
  double m = 1.0;
  for (std::size_t l = 0; l < lo.size(); ++l) m *= hi[l] - lo[l];
  return m;
}

Tree::Tree(std::size_t p, std::size_t max_depth) : p_(p), max_depth_(max_depth) {
  TreeNode root;
  root.box = Box::unit(p);
  nodes_.push_back(std::move(root));
}

std::size_t Tree::leaf_of(std::span<const double> x) const noexcept {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& s = nodes_[id].split;
    id = static_cast<std::size_t>(x[s.coordinate] <= s.threshold ? nodes_[id].left
                                                                  : nodes_[id].right);
  }
  return id;
}

std::vector<std::size_t> Tree::leaves() const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (nodes_[id].is_leaf()) {
      out.push_back(id);
    } else {
      stack.push_back(static_cast<std::size_t>(nodes_[id].right));
      stack.push_back(static_cast<std::size_t>(nodes_[id].left));
    }
  }
  return out;
}

std::size_t Tree::split_leaf(std::size_t id, const SplitDecision& split,
                             std::vector<std::uint32_t> left_rows,
                             std::vector<std::uint32_t> right_rows) {
  TreeNode left, right;
  left.depth = right.depth = nodes_[id].depth + 1;
  left.box = right.box = nodes_[id].box;
  left.box.hi[split.coordinate] = split.threshold;
  right.box.lo[split.coordinate] = split.threshold;
  right.box.lo_closed[split.coordinate] = 0;
  left.rows = std::move(left_rows);
  right.rows = std::move(right_rows);
  const std::size_t left_id = nodes_.size();
  nodes_[id].split = split;
  nodes_[id].left = static_cast<int>(left_id);
  nodes_[id].right = static_cast<int>(left_id + 1);
  nodes_.push_back(std::move(left));
  nodes_.push_back(std::move(right));
  return left_id;
}

namespace {

bool covariates_constant(const Dataset& data, const OrderIndex& orders) {
  for (std::size_t l = 0; l < orders.dim(); ++l) {
    const auto& pi = orders.perm[l];
    if (data.x(pi.front(), l) != data.x(pi.back(), l)) return false;
  }
  return true;
}

bool outcomes_constant(const Dataset& data, std::span<const std::uint32_t> rows,
                       bool with_treatment) {
  const std::uint32_t r0 = rows.front();
  for (auto r : rows) {
    if (data.y(r) != data.y(r0)) return false;
    if (with_treatment && data.d(r) != data.d(r0)) return false;
  }
  return true;
}

SplitDecision decide_split(const Dataset& data, const OrderIndex& orders,
                           const SplitRule& rule) {
  if (orders.rows() <= 1) return {};
  if (covariates_constant(data, orders)) return {};
  if (outcomes_constant(data, orders.perm[0], rule.tag != RuleTag::cart_sse)) return {};
  return best_split(data, orders, rule, Exec::serial);
}

std::vector<std::uint32_t> sorted_rows(const OrderIndex& orders) {
  std::vector<std::uint32_t> rows = orders.perm[0];
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

Tree grow_tree(const Dataset& split_data, const SplitRule& rule, std::size_t depth,
               Exec exec) {
  return grow_tree(std::span<const Dataset>(&split_data, 1), rule, depth, exec);
}

Tree grow_tree(std::span<const Dataset> levels, const SplitRule& rule,
               std::size_t depth, Exec exec) {
  if (depth < 1) throw ConfigError("tree depth K must be at least 1");
  if (levels.empty()) throw StructuralError("grow_tree needs splitting data");
  if (levels.size() != 1 && levels.size() != depth)
    throw StructuralError("grow_tree needs one dataset or one dataset per level");
  rule.validate();
  const Dataset& base = levels[0];
  for (const auto& lv : levels)
    if (lv.rows() != base.rows() || lv.dim() != base.dim() ||
        lv.x_colmajor() != base.x_colmajor())
      throw StructuralError("per-level datasets must share covariates");

  const std::size_t n = base.rows();
  Tree tree(base.dim(), depth);
  if (n == 0) return tree;
  tree.node(0).rows.resize(n);
  std::iota(tree.node(0).rows.begin(), tree.node(0).rows.end(), 0u);

  struct Pending {
    std::size_t id;
    OrderIndex orders;
  };
  std::vector<Pending> frontier;
  frontier.push_back({0, coordinate_orders(base)});
  std::vector<std::uint8_t> goes_left(n, 0);

  for (std::size_t level = 0; level < depth && !frontier.empty(); ++level) {
    const Dataset& data = levels.size() == 1 ? levels[0] : levels[level];
    std::vector<SplitDecision> decisions(frontier.size());
    const auto count = static_cast<long long>(frontier.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (long long i = 0; i < count; ++i)
        decisions[i] = decide_split(data, frontier[i].orders, rule);
    } else {
      for (long long i = 0; i < count; ++i)
        decisions[i] = decide_split(data, frontier[i].orders, rule);
    }

    std::vector<Pending> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const SplitDecision& s = decisions[i];
      if (!s.valid) continue;
      const auto& orders = frontier[i].orders;
      for (auto r : orders.perm[0])
        goes_left[r] = data.x(r, s.coordinate) <= s.threshold ? 1 : 0;
      auto [left, right] = orders.partition(goes_left);
      const std::size_t left_id =
          tree.split_leaf(frontier[i].id, s, sorted_rows(left), sorted_rows(right));
      next.push_back({left_id, std::move(left)});
      next.push_back({left_id + 1, std::move(right)});
    }
    frontier = std::move(next);
  }
  return tree;
}

FittedTree::FittedTree(Tree tree, std::vector<LeafEstimate> by_node)
    : tree_(std::move(tree)), by_node_(std::move(by_node)) {
  if (by_node_.size() != tree_.nodes().size())
    throw StructuralError("one estimate slot per tree node is required");
}

const LeafEstimate& FittedTree::estimate_at(std::span<const double> x) const {
  if (x.size() != tree_.dim()) throw DomainError("point has the wrong dimension");
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("point lies outside [0,1]^p");
  return by_node_[tree_.leaf_of(x)];
}

double FittedTree::predict(std::span<const double> x) const { return estimate_at(x).value; }

std::vector<LeafInfo> FittedTree::leaf_partition() const {
  std::vector<LeafInfo> out;
  for (auto id : tree_.leaves()) {
    const auto& node = tree_.nodes()[id];
    out.push_back({id, node.box, node.box.measure(), by_node_[id]});
  }
  return out;
}

std::vector<double> FittedTree::leaf_measures() const {
  std::vector<double> out;
  for (auto id : tree_.leaves()) out.push_back(tree_.nodes()[id].box.measure());
  return out;
}

std::string FittedTree::to_text() const {
  std::ostringstream os;
  os << "causal-tree p=" << tree_.dim() << " K=" << tree_.max_depth() << '\n';
  char buf[256];
  std::function<void(std::size_t)> emit = [&](std::size_t id) {
    const auto& node = tree_.nodes()[id];
    if (node.is_leaf()) {
      const auto& e = by_node_[id];
      std::snprintf(buf, sizeof buf, "%zu leaf %.17g %zu %zu %zu %d\n", node.depth, e.value,
                    e.n, e.n0, e.n1, e.degenerate ? 1 : 0);
      os << buf;
      return;
    }
    std::snprintf(buf, sizeof buf, "%zu split %zu %.17g %zu\n", node.depth,
                  node.split.coordinate, node.split.threshold, node.split.index);
    os << buf;
    emit(static_cast<std::size_t>(node.left));
    emit(static_cast<std::size_t>(node.right));
  };
  emit(0);
  return os.str();
}

FittedTree FittedTree::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string magic, pk, kk;
  is >> magic >> pk >> kk;
  if (magic != "causal-tree" || pk.rfind("p=", 0) != 0 || kk.rfind("K=", 0) != 0)
    throw StructuralError("not a serialized causal tree");
  const std::size_t p = std::stoul(pk.substr(2));
  const std::size_t K = std::stoul(kk.substr(2));
  Tree tree(p, K);
  std::vector<LeafEstimate> est(1);
  std::function<void(std::size_t)> read = [&](std::size_t id) {
    std::size_t depth = 0;
    std::string kind;
    if (!(is >> depth >> kind) || depth != tree.nodes()[id].depth)
      throw StructuralError("malformed serialized tree");
    if (kind == "leaf") {
      LeafEstimate e;
      int degenerate = 0;
      if (!(is >> e.value >> e.n >> e.n0 >> e.n1 >> degenerate))
        throw StructuralError("malformed leaf line");
      e.degenerate = degenerate != 0;
      est[id] = e;
      return;
    }
    if (kind != "split") throw StructuralError("unknown node kind '" + kind + "'");
    SplitDecision s;
    if (!(is >> s.coordinate >> s.threshold >> s.index) || s.coordinate >= p)
      throw StructuralError("malformed split line");
    s.valid = true;
    const std::size_t left = tree.split_leaf(id, s, {}, {});
    est.resize(tree.nodes().size());
    read(left);
    read(left + 1);
  };
  read(0);
  return FittedTree(std::move(tree), std::move(est));
}

FittedTree fit_leaves(const Tree& tree, const Dataset& fit_data, const LeafSpec& leaf) {
  if (fit_data.rows() > 0 && fit_data.dim() != tree.dim())
    throw StructuralError("fitting data dimension differs from the tree");
  const auto& nodes = tree.nodes();
  std::vector<std::vector<double>> ys(nodes.size());
  std::vector<std::vector<std::uint8_t>> ds(nodes.size());
  std::vector<double> x(tree.dim());
  for (std::size_t i = 0; i < fit_data.rows(); ++i) {
    for (std::size_t l = 0; l < x.size(); ++l) x[l] = fit_data.x(i, l);
    const std::size_t id = tree.leaf_of(x);
    ys[id].push_back(fit_data.y(i));
    ds[id].push_back(fit_data.d(i));
  }
  std::vector<LeafEstimate> est(nodes.size());
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (!nodes[id].is_leaf()) continue;
    switch (leaf.kind) {
      case LeafKind::dim:
        est[id] = dim_leaf(ys[id], ds[id]);
        break;
      case LeafKind::ipw:
        est[id] = ipw_leaf(ys[id], ds[id], leaf.xi);
        break;
      case LeafKind::mean:
        est[id] = mean_leaf(ys[id], ds[id]);
        break;
    }
  }
  return FittedTree(tree, std::move(est));
}

}  // namespace ccart
