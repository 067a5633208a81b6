#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causal_cart/dgp.hpp"

namespace ccart {

enum class RuleTag { cart_sse, dim_var, ipw_var, sse_two_means, tstat };

// `xi` is read by ipw_var (transformed outcome) and tstat (pooled variance
// of the transformed outcome); the other rules ignore it.
struct SplitRule {
  RuleTag tag = RuleTag::cart_sse;
  double xi = 0.5;

  void validate() const;
  // True for rules that need both arms in both children.
  [[nodiscard]] bool needs_both_arms() const noexcept {
    return tag == RuleTag::dim_var || tag == RuleTag::sse_two_means ||
           tag == RuleTag::tstat;
  }
};

std::string rule_name(RuleTag tag);  // cart, dim, ipw, sse, tstat
RuleTag parse_rule(std::string_view name);

enum class Exec { serial, parallel };

/// Per-coordinate orderings of the rows held by one node: perm[l] lists row
/// ids of the dataset sorted by x_l ascending, ties broken by row id.
struct OrderIndex {
  std::vector<std::vector<std::uint32_t>> perm;

  [[nodiscard]] std::size_t rows() const noexcept {
    return perm.empty() ? 0 : perm.front().size();
  }
  [[nodiscard]] std::size_t dim() const noexcept { return perm.size(); }

  // Stable split of every ordering by a row-indexed membership mask.
  [[nodiscard]] std::pair<OrderIndex, OrderIndex> partition(
      std::span<const std::uint8_t> goes_left) const;
};

OrderIndex coordinate_orders(const Dataset& data);

struct SplitDecision {
  std::size_t coordinate = 0;  // 0-based
  std::size_t index = 0;       // left-child row count, in [1, n-1]
  double threshold = 0.0;      // index-th order statistic along `coordinate`
  double value = 0.0;
  bool valid = false;

  friend bool operator==(const SplitDecision&, const SplitDecision&) = default;
};

// Criterion surface over (k, l); entries for invalid candidates are empty.
class CriterionProfile {
 public:
  CriterionProfile(std::size_t n, std::size_t p);

  [[nodiscard]] std::size_t rows() const noexcept { return n_; }
  [[nodiscard]] std::size_t dim() const noexcept { return p_; }
  // k in [1, n-1], coord 0-based.
  [[nodiscard]] std::optional<double> at(std::size_t k, std::size_t coord) const;

  std::span<double> column(std::size_t coord) noexcept {
    return {values_.data() + coord * (n_ - 1), n_ - 1};
  }
  [[nodiscard]] std::span<const double> column(std::size_t coord) const noexcept {
    return {values_.data() + coord * (n_ - 1), n_ - 1};
  }

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<double> values_;  // NaN marks an invalid candidate
};

/// Criterion value of splitting the node described by `orders` at the k-th
/// order statistic of coordinate `coord` (left child = first k rows).
/// Returns nullopt for invalid candidates (empty arm where the rule needs
/// both arms, tied covariate values at the cut, non-positive pooled variance
/// for tstat). Throws DomainError when k or coord is out of range.
std::optional<double> criterion_value(const Dataset& data, const OrderIndex& orders,
                                      const SplitRule& rule, std::size_t k,
                                      std::size_t coord);

// Serial reference: one prefix-sum scan per coordinate.
CriterionProfile criterion_profile(const Dataset& data, const OrderIndex& orders,
                                   const SplitRule& rule);
// Same surface, coordinates scanned concurrently with OpenMP.
CriterionProfile criterion_profile_parallel(const Dataset& data,
                                            const OrderIndex& orders,
                                            const SplitRule& rule);

/// Magnitude against which near-equal criterion values are treated as ties.
/// Depends only on the node's data, so the fast path and the brute-force
/// oracle apply the same rule.
double split_tie_scale(const Dataset& data, std::span<const std::uint32_t> rows,
                       const SplitRule& rule);

// Values within kTieRelTol * max(best, scale) of the best are ties; the
// smallest coordinate, then smallest index, wins.
inline constexpr double kTieRelTol = 1e-11;

SplitDecision best_split(const Dataset& data, const OrderIndex& orders,
                         const SplitRule& rule, Exec exec = Exec::serial);

/// O(n^2 p) oracle: partitions rows explicitly at every candidate threshold
/// and refits the child estimates from scratch.
SplitDecision brute_force_split(const Dataset& data, const SplitRule& rule);

// Oracle value of a single candidate (same conventions as criterion_value,
// but computed by explicit refits on the whole dataset).
std::optional<double> brute_force_value(const Dataset& data, const SplitRule& rule,
                                        std::size_t k, std::size_t coord);

// Residual sum of squares of y ~ 1 + d fitted by least squares on each child
// of candidate (k, coord) separately, summed. nullopt when a child misses an
// arm or tied values make the candidate invalid.
std::optional<double> two_means_children_sse(const Dataset& data, std::size_t k,
                                             std::size_t coord);

}  // namespace ccart
