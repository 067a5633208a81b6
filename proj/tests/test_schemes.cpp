#include <gtest/gtest.h>

#include <algorithm>

#include "causal_cart/errors.hpp"
#include "causal_cart/schemes.hpp"

using namespace ccart;

namespace {

Dataset noisy_sample(std::size_t n, std::size_t p, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.c1 = 1.0;
  RngStream s(seed, "scheme-test", 0);
  return sample_dataset(cfg, s);
}

bool same_structure(const Tree& a, const Tree& b) {
  if (a.nodes().size() != b.nodes().size()) return false;
  for (std::size_t i = 0; i < a.nodes().size(); ++i)
    if (!(a.nodes()[i].split == b.nodes()[i].split)) return false;
  return true;
}

}  // namespace

TEST(EstimatorSpec, NamesRoundTrip) {
  const auto s = parse_estimator("dim-hon-K3");
  EXPECT_EQ(s.rule.tag, RuleTag::dim_var);
  EXPECT_EQ(s.scheme.tag, SchemeTag::honest);
  EXPECT_EQ(s.K, 3u);
  EXPECT_EQ(s.leaf.kind, LeafKind::dim);
  EXPECT_EQ(s.name(), "dim-hon-K3");
  EXPECT_EQ(parse_estimator("ipw-x-K12").leaf.kind, LeafKind::ipw);
  EXPECT_EQ(parse_estimator("cart-nss-K1").leaf.kind, LeafKind::mean);
  EXPECT_EQ(parse_estimator("sse-nss-K2").leaf.kind, LeafKind::dim);
  for (const char* bad : {"dim", "dim-hon", "dim-hon-3", "dim-hon-K", "dim-hon-Kx", "dim-hon-K0",
                          "gini-nss-K1", "dim-oob-K1"})
    EXPECT_THROW(parse_estimator(bad), ConfigError) << bad;
}

TEST(EstimatorSpec, DriverMustMatchScheme) {
  const Dataset d = noisy_sample(50, 1, 1);
  RngStream s(1, "x", 0);
  EXPECT_THROW(estimate_nss(d, parse_estimator("dim-hon-K1")), ConfigError);
  EXPECT_THROW(estimate_honest(d, parse_estimator("dim-nss-K1"), s), ConfigError);
}

TEST(Nss, StumpIsGrowThenFitOnTheSameRows) {
  const Dataset d = noisy_sample(300, 2, 2);
  const auto spec = parse_estimator("dim-nss-K1");
  const FittedTree ft = estimate_nss(d, spec);
  const FittedTree ref = fit_leaves(grow_tree(d, spec.rule, 1), d, spec.leaf);
  EXPECT_EQ(ft.to_text(), ref.to_text());
  std::size_t fitted = 0;
  for (auto id : ft.tree().leaves()) fitted += ft.estimate_of(id).n;
  EXPECT_EQ(fitted, 300u);
}

TEST(Honest, HalvesAreDisjointAndExhaustive) {
  const Dataset d = noisy_sample(301, 2, 3);
  const auto spec = parse_estimator("ipw-hon-K2");
  RngStream s(3, "hon", 0);
  const FittedTree ft = estimate_honest(d, spec, s);
  std::size_t split_rows = 0, fit_rows = 0;
  split_rows = ft.tree().nodes()[0].rows.size();
  for (auto id : ft.tree().leaves()) fit_rows += ft.estimate_of(id).n;
  EXPECT_EQ(split_rows, 150u);
  EXPECT_EQ(fit_rows, 151u);
}

TEST(Honest, TwoRowsStillFit) {
  const Dataset d = noisy_sample(2, 1, 4);
  RngStream s(4, "hon", 0);
  const FittedTree ft = estimate_honest(d, parse_estimator("dim-hon-K1"), s);
  EXPECT_EQ(ft.tree().nodes().size(), 1u);
  EXPECT_EQ(ft.estimate_of(0).n, 1u);
  const Dataset one = noisy_sample(1, 1, 4);
  EXPECT_THROW(estimate_honest(one, parse_estimator("dim-hon-K1"), s), ConfigError);
}

TEST(Honest, FitOutcomesCannotMoveTheSplits) {
  const Dataset d = noisy_sample(200, 2, 5);
  const auto spec = parse_estimator("dim-hon-K2");
  RngStream s(5, "hon", 1);
  RngStream replay = s;
  const auto perm = random_permutation(200, replay);

  std::vector<double> y(d.y().begin(), d.y().end());
  for (std::size_t i = 100; i < 200; ++i) y[perm[i]] = 1e6 * (i % 2 ? 1.0 : -1.0);
  const Dataset poisoned = d.with_outcomes(y, {d.d().begin(), d.d().end()});

  RngStream s1 = s, s2 = s;
  const FittedTree clean = estimate_honest(d, spec, s1);
  const FittedTree dirty = estimate_honest(poisoned, spec, s2);
  EXPECT_TRUE(same_structure(clean.tree(), dirty.tree()));
  EXPECT_NE(clean.to_text(), dirty.to_text());
}

TEST(RandomPermutation, IsAPermutationAndReplays) {
  RngStream a(6, "perm", 0), b(6, "perm", 0);
  auto p = random_permutation(1000, a);
  EXPECT_EQ(p, random_permutation(1000, b));
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p[i], i);
  EXPECT_TRUE(random_permutation(0, a).empty());
}

TEST(XAdaptive, FoldSize) {
  EXPECT_EQ(x_adaptive_fold(1000, 1), 500u);
  EXPECT_EQ(x_adaptive_fold(1000, 2), 333u);
  EXPECT_EQ(x_adaptive_fold(10, 4), 2u);
}

TEST(XAdaptive, RejectsDegenerateDesigns) {
  DgpConfig cfg;
  RngStream s(7, "x", 0);
  auto spec = parse_estimator("dim-x-K1");
  spec.K = 0;
  EXPECT_THROW(estimate_x_adaptive(cfg, spec, s), ConfigError);
  cfg.n = 5;
  EXPECT_THROW(estimate_x_adaptive(cfg, parse_estimator("dim-x-K2"), s), ConfigError);
  cfg.n = 6;
  EXPECT_NO_THROW(estimate_x_adaptive(cfg, parse_estimator("dim-x-K2"), s));
}

TEST(XAdaptive, EachLevelUsesItsOwnPanel) {
  DgpConfig cfg;
  cfg.n = 800;
  cfg.p = 2;
  cfg.c1 = 1.0;
  const auto spec = parse_estimator("sse-x-K3");
  RngStream s(8, "x", 0);
  RngStream replay = s;
  const FittedTree ft = estimate_x_adaptive(cfg, spec, s);

  const std::size_t N = x_adaptive_fold(cfg.n, 3);
  const auto x = sample_covariates(N, cfg.p, replay);
  std::vector<Dataset> panels;
  for (int j = 0; j < 4; ++j) panels.push_back(sample_panel(cfg, x, N, replay));

  const Tree ref = grow_tree(std::span<const Dataset>(panels.data(), 3), spec.rule, 3);
  ASSERT_TRUE(same_structure(ft.tree(), ref));
  // The root sees panel 0 only.
  EXPECT_EQ(ft.tree().nodes()[0].split,
            best_split(panels[0], coordinate_orders(panels[0]), spec.rule));
  // Thresholds are order statistics of the shared covariates.
  for (const auto& node : ft.tree().nodes()) {
    if (node.is_leaf()) continue;
    const auto col = panels[0].column(node.split.coordinate);
    EXPECT_NE(std::find(col.begin(), col.end(), node.split.threshold), col.end());
  }
  // Leaves are fitted on the last panel.
  EXPECT_EQ(ft.to_text(), fit_leaves(ref, panels[3], spec.leaf).to_text());
}
