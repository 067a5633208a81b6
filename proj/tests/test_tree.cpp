#include <gtest/gtest.h>

#include <cmath>

#include "causal_cart/errors.hpp"
#include "causal_cart/schemes.hpp"
#include "causal_cart/tree.hpp"

using namespace ccart;

namespace {

Dataset noisy_sample(std::size_t n, std::size_t p, std::uint64_t seed, double c1 = 1.0) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.c1 = c1;
  RngStream s(seed, "tree-test", 0);
  return sample_dataset(cfg, s);
}

std::vector<std::size_t> as_size(const std::vector<std::uint32_t>& rows) {
  return {rows.begin(), rows.end()};
}

std::size_t depth_of(const Tree& t) {
  std::size_t d = 0;
  for (const auto& node : t.nodes()) d = std::max(d, node.depth);
  return d;
}

}  // namespace

TEST(GrowTree, StumpUsesRootBestSplit) {
  const Dataset d = noisy_sample(200, 2, 1);
  const Tree t = grow_tree(d, {RuleTag::dim_var}, 1);
  ASSERT_EQ(t.nodes().size(), 3u);
  EXPECT_EQ(t.nodes()[0].split, best_split(d, coordinate_orders(d), {RuleTag::dim_var}));
  EXPECT_EQ(t.nodes()[1].rows.size(), t.nodes()[0].split.index);
  EXPECT_EQ(t.nodes()[1].rows.size() + t.nodes()[2].rows.size(), 200u);
}

TEST(GrowTree, TinySampleCannotOutgrowItsRows) {
  const Dataset d = noisy_sample(4, 1, 2);
  const Tree t = grow_tree(d, {RuleTag::cart_sse}, 3);
  EXPECT_LE(t.leaves().size(), 4u);
  for (auto id : t.leaves()) EXPECT_GE(t.nodes()[id].rows.size(), 1u);
}

TEST(GrowTree, EveryInternalNodeIsLocallyOptimal) {
  const Dataset d = noisy_sample(120, 2, 3);
  for (auto tag : {RuleTag::cart_sse, RuleTag::dim_var, RuleTag::ipw_var, RuleTag::sse_two_means}) {
    const SplitRule rule{tag, 0.5};
    const Tree t = grow_tree(d, rule, 3);
    for (const auto& node : t.nodes()) {
      if (node.is_leaf()) continue;
      const auto oracle = brute_force_split(d.subset(as_size(node.rows)), rule);
      ASSERT_TRUE(oracle.valid);
      EXPECT_EQ(node.split.coordinate, oracle.coordinate) << rule_name(tag);
      EXPECT_EQ(node.split.index, oracle.index) << rule_name(tag);
      EXPECT_EQ(node.split.threshold, oracle.threshold) << rule_name(tag);
    }
  }
}

TEST(GrowTree, ParallelFrontierMatchesSerial) {
  const Dataset d = noisy_sample(500, 3, 4);
  const Tree a = grow_tree(d, {RuleTag::dim_var}, 4, Exec::serial);
  const Tree b = grow_tree(d, {RuleTag::dim_var}, 4, Exec::parallel);
  ASSERT_EQ(a.nodes().size(), b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    EXPECT_EQ(a.nodes()[i].split, b.nodes()[i].split);
    EXPECT_EQ(a.nodes()[i].rows, b.nodes()[i].rows);
  }
}

TEST(GrowTree, DeeperTreesRefineShallowerOnes) {
  const Dataset d = noisy_sample(300, 2, 5);
  std::size_t prev_leaves = 1;
  for (std::size_t K = 1; K <= 4; ++K) {
    const Tree t = grow_tree(d, {RuleTag::cart_sse}, K);
    const Tree shallow = grow_tree(d, {RuleTag::cart_sse}, K == 1 ? 1 : K - 1);
    EXPECT_GE(t.leaves().size(), prev_leaves);
    EXPECT_LE(depth_of(t), K);
    prev_leaves = t.leaves().size();
    for (std::size_t i = 0; i < shallow.nodes().size(); ++i)
      if (!shallow.nodes()[i].is_leaf()) EXPECT_EQ(shallow.nodes()[i].split, t.nodes()[i].split);
  }
}

TEST(GrowTree, StopsOnConstantOutcomeAndMissingArm) {
  const Dataset flat({2, 2, 2, 2}, {0, 1, 0, 1}, {0.1, 0.2, 0.3, 0.4}, 1);
  EXPECT_EQ(grow_tree(flat, {RuleTag::cart_sse}, 2).nodes().size(), 1u);
  const Dataset treated({1, 2, 3, 4}, {1, 1, 1, 1}, {0.1, 0.2, 0.3, 0.4}, 1);
  EXPECT_EQ(grow_tree(treated, {RuleTag::dim_var}, 2).nodes().size(), 1u);
  EXPECT_GT(grow_tree(treated, {RuleTag::cart_sse}, 2).nodes().size(), 1u);
  const Dataset same_x({1, 2, 3, 4}, {0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}, 1);
  EXPECT_EQ(grow_tree(same_x, {RuleTag::cart_sse}, 2).nodes().size(), 1u);
}

TEST(GrowTree, RejectsBadInput) {
  const Dataset d = noisy_sample(10, 1, 6);
  EXPECT_THROW(grow_tree(d, {}, 0), ConfigError);
  const Dataset other = noisy_sample(10, 1, 7);
  const std::vector<Dataset> levels = {d, other};
  EXPECT_THROW(grow_tree(std::span<const Dataset>(levels), {}, 2), StructuralError);
  EXPECT_THROW(grow_tree(std::span<const Dataset>(levels), {}, 3), StructuralError);
}

TEST(FittedTree, ThresholdPointGoesLeft) {
  const Dataset d = noisy_sample(100, 1, 8);
  const FittedTree ft = fit_leaves(grow_tree(d, {RuleTag::cart_sse}, 1), d, {LeafKind::mean});
  const auto& root = ft.tree().nodes()[0];
  ASSERT_FALSE(root.is_leaf());
  const std::vector<double> at = {root.split.threshold};
  EXPECT_EQ(ft.tree().leaf_of(at), static_cast<std::size_t>(root.left));
  EXPECT_EQ(ft.predict(at), ft.estimate_of(root.left).value);
  const std::vector<double> above = {std::nextafter(root.split.threshold, 2.0)};
  EXPECT_EQ(ft.tree().leaf_of(above), static_cast<std::size_t>(root.right));
}

TEST(FittedTree, LeafBoxesPartitionTheCube) {
  const Dataset d = noisy_sample(400, 2, 9);
  const FittedTree ft = fit_leaves(grow_tree(d, {RuleTag::cart_sse}, 3), d, {LeafKind::mean});
  const auto parts = ft.leaf_partition();
  double total = 0.0;
  for (const auto& leaf : parts) total += leaf.measure;
  EXPECT_NEAR(total, 1.0, 1e-12);

  // Midpoint grid quadrature of each leaf's volume.
  const int g = 100;
  std::vector<double> hits(ft.tree().nodes().size(), 0.0);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const std::vector<double> x = {(i + 0.5) / g, (j + 0.5) / g};
      const auto leaf = ft.tree().leaf_of(x);
      hits[leaf] += 1.0 / (g * g);
      std::size_t boxes = 0;
      for (const auto& p : parts) boxes += p.box.contains(x);
      ASSERT_EQ(boxes, 1u);
    }
  for (const auto& leaf : parts) EXPECT_NEAR(hits[leaf.node], leaf.measure, 0.02);
}

TEST(FittedTree, TextRoundTrip) {
  const Dataset d = noisy_sample(300, 3, 10);
  const auto spec = EstimatorSpec::make(RuleTag::ipw_var, SchemeTag::nss, 3);
  const FittedTree ft = estimate_nss(d, spec);
  const std::string text = ft.to_text();
  const FittedTree back = FittedTree::from_text(text);
  EXPECT_EQ(back.to_text(), text);
  RngStream s(1, "points", 0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {s.uniform01(), s.uniform01(), s.uniform01()};
    EXPECT_EQ(back.predict(x), ft.predict(x));
  }
  EXPECT_THROW(FittedTree::from_text("not a tree"), StructuralError);
}

TEST(FittedTree, NssLeafValuesAreChildEstimates) {
  const Dataset d = noisy_sample(200, 1, 11);
  const FittedTree ft = estimate_nss(d, EstimatorSpec::make(RuleTag::dim_var, SchemeTag::nss, 1));
  for (auto id : ft.tree().leaves()) {
    std::vector<double> y;
    std::vector<std::uint8_t> w;
    for (auto r : ft.tree().nodes()[id].rows) y.push_back(d.y(r)), w.push_back(d.d(r));
    EXPECT_EQ(ft.estimate_of(id), dim_leaf(y, w));
  }
}

TEST(FittedTree, EmptyFitLeafFallsBackToZero) {
  const Dataset split({0, 0, 5, 5}, {0, 1, 0, 1}, {0.1, 0.2, 0.8, 0.9}, 1);
  const Tree t = grow_tree(split, {RuleTag::cart_sse}, 1);
  // Every fitting row lands left of the cut.
  const Dataset fit({1, 3}, {0, 1}, {0.05, 0.1}, 1);
  const FittedTree ft = fit_leaves(t, fit, {LeafKind::dim});
  const auto right = static_cast<std::size_t>(t.nodes()[0].right);
  EXPECT_TRUE(ft.estimate_of(right).degenerate);
  EXPECT_EQ(ft.estimate_of(right).n, 0u);
  EXPECT_EQ(ft.predict(std::vector<double>{0.95}), 0.0);
  EXPECT_EQ(ft.predict(std::vector<double>{0.0}), 2.0);
}

TEST(FittedTree, ConstantOutcomeMeanTree) {
  const Dataset d({0.7, 0.7, 0.7, 0.7, 0.7}, {0, 1, 1, 0, 1}, {0.1, 0.5, 0.3, 0.9, 0.7}, 1);
  const FittedTree ft = estimate_nss(d, EstimatorSpec::make(RuleTag::cart_sse, SchemeTag::nss, 2));
  for (double x : {0.0, 0.2, 0.6, 1.0}) EXPECT_DOUBLE_EQ(ft.predict(std::vector<double>{x}), 0.7);
}

TEST(FittedTree, PredictRejectsBadPoints) {
  const Dataset d = noisy_sample(50, 2, 12);
  const FittedTree ft = estimate_nss(d, EstimatorSpec::make(RuleTag::cart_sse, SchemeTag::nss, 1));
  EXPECT_THROW(ft.predict(std::vector<double>{0.5}), DomainError);
  EXPECT_THROW(ft.predict(std::vector<double>{0.5, 1.5}), DomainError);
  EXPECT_THROW(ft.predict(std::vector<double>{-0.1, 0.5}), DomainError);
  EXPECT_NO_THROW(ft.predict(std::vector<double>{0.0, 1.0}));
}

TEST(FittedTree, FitDimensionMustMatch) {
  const Dataset d = noisy_sample(50, 2, 13);
  const Tree t = grow_tree(d, {}, 1);
  EXPECT_THROW(fit_leaves(t, noisy_sample(50, 1, 14), {}), StructuralError);
}
