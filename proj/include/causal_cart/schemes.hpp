#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "causal_cart/dgp.hpp"
#include "causal_cart/rng.hpp"
#include "causal_cart/splitting.hpp"
#include "causal_cart/tree.hpp"

namespace ccart {

enum class SchemeTag { nss, honest, x_adaptive };

std::string scheme_name(SchemeTag tag);  // nss, hon, x
SchemeTag parse_scheme(std::string_view name);

struct SamplingScheme {
  SchemeTag tag = SchemeTag::nss;
  double honest_ratio = 0.5;  // share of rows used for splitting (honest only)
};

struct EstimatorSpec {
  SplitRule rule;
  SamplingScheme scheme;
  std::size_t K = 1;
  LeafSpec leaf;

  // Default leaf pairing: dim, sse and tstat fit DIM leaves, ipw fits IPW
  // leaves, cart fits plain means.
  static EstimatorSpec make(RuleTag rule, SchemeTag scheme, std::size_t K,
                            double xi = 0.5);

  // "dim-hon-K3"
  [[nodiscard]] std::string name() const;
  void validate() const;
};

LeafSpec default_leaf(const SplitRule& rule);

// Accepts "rule-scheme-K<depth>"; xi feeds the rule and the leaf estimator.
EstimatorSpec parse_estimator(std::string_view name, double xi = 0.5);

/// Grows and fits on the same data.
FittedTree estimate_nss(const Dataset& data, const EstimatorSpec& spec,
                        Exec exec = Exec::serial);

/// Permutes the rows with `stream`; the first floor(ratio * n) rows grow the
/// tree and the remaining rows fit the leaves. ConfigError when either part
/// would be empty.
FittedTree estimate_honest(const Dataset& data, const EstimatorSpec& spec,
                           RngStream& stream, Exec exec = Exec::serial);

/// Draws one covariate matrix of N = floor(n / (K + 1)) rows and K + 1
/// independent (y, d) panels on it, consumed from `stream` in that order.
/// Panel j chooses every split at level j; the last panel fits the leaves.
FittedTree estimate_x_adaptive(const DgpConfig& cfg, const EstimatorSpec& spec,
                               RngStream& stream, Exec exec = Exec::serial);

// Fold size used by estimate_x_adaptive.
std::size_t x_adaptive_fold(std::size_t n, std::size_t K);

// Fisher-Yates on [0, n) driven by Boost.Random, so the order is the same on
// every standard library.
std::vector<std::size_t> random_permutation(std::size_t n, RngStream& stream);

}  // namespace ccart
