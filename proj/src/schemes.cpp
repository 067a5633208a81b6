#include "causal_cart/schemes.hpp"

#include <boost/random/uniform_int_distribution.hpp>
#include <numeric>
#include <vector>

#include "causal_cart/errors.hpp"

namespace ccart {

std::string scheme_name(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::nss:
      return "nss";
    case SchemeTag::honest:
      return "hon";
    case SchemeTag::x_adaptive:
      return "x";
  }
  return "?";
}

SchemeTag parse_scheme(std::string_view name) {
  if (name == "nss") return SchemeTag::nss;
  if (name == "hon" || name == "honest") return SchemeTag::honest;
  if (name == "x" || name == "x-adaptive") return SchemeTag::x_adaptive;
  throw ConfigError("unknown sampling scheme '" + std::string(name) + "'");
}

LeafSpec default_leaf(const SplitRule& rule) {
  switch (rule.tag) {
    case RuleTag::ipw_var:
      return {LeafKind::ipw, rule.xi};
    case RuleTag::cart_sse:
      return {LeafKind::mean, rule.xi};
    default:
      return {LeafKind::dim, rule.xi};
  }
}

EstimatorSpec EstimatorSpec::make(RuleTag rule, SchemeTag scheme, std::size_t K,
                                  double xi) {
  EstimatorSpec s;
  s.rule = {rule, xi};
  s.scheme.tag = scheme;
  s.K = K;
  s.leaf = default_leaf(s.rule);
  return s;
}

std::string EstimatorSpec::name() const {
  return rule_name(rule.tag) + "-" + scheme_name(scheme.tag) + "-K" + std::to_string(K);
}

void EstimatorSpec::validate() const {
  if (K < 1) throw ConfigError("tree depth K must be at least 1");
  if (scheme.tag == SchemeTag::honest &&
      !(scheme.honest_ratio > 0.0 && scheme.honest_ratio < 1.0))
    throw ConfigError("honest_ratio must lie in (0,1)");
  rule.validate();
  if (leaf.kind == LeafKind::ipw && !(leaf.xi > 0.0 && leaf.xi < 1.0))
    throw ConfigError("IPW leaves need xi in (0,1)");
}

EstimatorSpec parse_estimator(std::string_view name, double xi) {
  const auto first = name.find('-');
  const auto second = first == std::string_view::npos ? first : name.find('-', first + 1);
  if (second == std::string_view::npos || name.size() < second + 3 ||
      name[second + 1] != 'K')
    throw ConfigError("estimator name '" + std::string(name) +
                      "' is not of the form rule-scheme-K<depth>");
  const auto depth = name.substr(second + 2);
  std::size_t K = 0;
  for (char c : depth) {
    if (c < '0' || c > '9')
      throw ConfigError("bad depth in estimator name '" + std::string(name) + "'");
    K = K * 10 + static_cast<std::size_t>(c - '0');
  }
  auto spec = EstimatorSpec::make(parse_rule(name.substr(0, first)),
                                  parse_scheme(name.substr(first + 1, second - first - 1)),
                                  K, xi);
  spec.validate();
  return spec;
}

namespace {

void require_scheme(const EstimatorSpec& spec, SchemeTag tag) {
  if (spec.scheme.tag != tag)
    throw ConfigError("estimator " + spec.name() + " used with the " + scheme_name(tag) +
                      " driver");
  spec.validate();
}

}  // namespace

FittedTree estimate_nss(const Dataset& data, const EstimatorSpec& spec, Exec exec) {
  require_scheme(spec, SchemeTag::nss);
  return fit_leaves(grow_tree(data, spec.rule, spec.K, exec), data, spec.leaf);
}

std::vector<std::size_t> random_permutation(std::size_t n, RngStream& stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(stream)]);
  }
  return perm;
}

FittedTree estimate_honest(const Dataset& data, const EstimatorSpec& spec,
                           RngStream& stream, Exec exec) {
  require_scheme(spec, SchemeTag::honest);
  const std::size_t n = data.rows();
  const auto n_split = static_cast<std::size_t>(spec.scheme.honest_ratio * static_cast<double>(n));
  if (n_split == 0 || n_split >= n)
    throw ConfigError("honest split of " + std::to_string(n) +
                      " rows leaves an empty part");
  const auto perm = random_permutation(n, stream);
  const std::span<const std::size_t> all(perm);
  const Dataset split_part = data.subset(all.first(n_split));
  const Dataset fit_part = data.subset(all.subspan(n_split));
  return fit_leaves(grow_tree(split_part, spec.rule, spec.K, exec), fit_part, spec.leaf);
}

std::size_t x_adaptive_fold(std::size_t n, std::size_t K) { return n / (K + 1); }

FittedTree estimate_x_adaptive(const DgpConfig& cfg, const EstimatorSpec& spec,
                               RngStream& stream, Exec exec) {
  require_scheme(spec, SchemeTag::x_adaptive);
  cfg.validate();
  const std::size_t N = x_adaptive_fold(cfg.n, spec.K);
  if (N < 2)
    throw ConfigError("X-adaptive fold size floor(n/(K+1)) = " + std::to_string(N) +
                      " is below 2");
  const auto x = sample_covariates(N, cfg.p, stream);
  std::vector<Dataset> panels;
  panels.reserve(spec.K + 1);
  for (std::size_t j = 0; j <= spec.K; ++j) panels.push_back(sample_panel(cfg, x, N, stream));
  const Tree tree =
      grow_tree(std::span<const Dataset>(panels.data(), spec.K), spec.rule, spec.K, exec);
  return fit_leaves(tree, panels.back(), spec.leaf);
}

}  // namespace ccart
