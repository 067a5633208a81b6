#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "causal_cart/dgp.hpp"
#include "causal_cart/rng.hpp"

namespace ccart {

struct OracleReport {
  std::size_t instances = 0;
  std::size_t decisions = 0;  // (instance, rule) pairs compared
  std::size_t argmax_mismatches = 0;
  std::size_t values_compared = 0;
  std::size_t value_mismatches = 0;
  double max_value_rel_diff = 0.0;

  std::size_t ipw_cart_compared = 0;
  std::size_t ipw_cart_mismatches = 0;
  std::size_t tstat_dim_compared = 0;
  std::size_t tstat_dim_mismatches = 0;
  std::size_t sse_identity_checked = 0;
  double sse_identity_max_rel = 0.0;

  std::vector<std::string> failures;  // first few, human readable

  [[nodiscard]] bool splits_ok() const noexcept {
    return argmax_mismatches == 0 && value_mismatches == 0;
  }
  [[nodiscard]] bool identities_ok() const noexcept {
    return ipw_cart_mismatches == 0 && tstat_dim_mismatches == 0 &&
           sse_identity_max_rel <= 1e-9;
  }
  [[nodiscard]] bool ok() const noexcept { return splits_ok() && identities_ok(); }
};

// Small random instance: n in [2, 50], p in [1, 3], a random error family,
// arm means and propensity, and, for some instances, coarsened covariates or
// outcomes so that ties occur. The returned xi is the propensity used.
Dataset random_oracle_instance(RngStream& stream, double& xi);

/// Compares the prefix-sum split search against the explicit refit oracle on
/// `instances` random datasets for all five rules, and checks the IPW/CART,
/// TStat/DimVar and SSE decomposition identities on the same datasets.
OracleReport oracle_battery(std::size_t instances, std::uint64_t seed);

}  // namespace ccart
