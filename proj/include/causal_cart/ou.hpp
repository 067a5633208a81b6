#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "causal_cart/rng.hpp"
#include "causal_cart/stats.hpp"

namespace ccart {

/// d independent stationary Ornstein-Uhlenbeck components with covariance
/// exp(-|t - s| / 2), sampled on the grid t_i = i * dt.
struct OuPath {
  std::size_t d = 1;
  double dt = 0.0;
  std::size_t points = 0;
  std::vector<double> values;  // component-major: values[c * points + i]

  [[nodiscard]] double at(std::size_t c, std::size_t i) const noexcept {
    return values[c * points + i];
  }
  [[nodiscard]] double horizon() const noexcept {
    return points == 0 ? 0.0 : static_cast<double>(points - 1) * dt;
  }
};

// Exact AR(1) discretisation, stationary start. ConfigError unless
// dt > 0, T >= dt and d >= 1.
OuPath simulate_ou(std::size_t d, double T, double dt, RngStream& stream);

// a(L) = sqrt(2 log L)
double de_scale(double L);
// b_d(L) = 2 log L + (d/2) log log L - log Gamma(d/2)
double de_centre(std::size_t d, double L);

struct DarlingErdosStat {
  double L = 0.0;
  double c = 0.0;
  double sup = 0.0;   // max over the grid of the Euclidean norm across components
  double stat = 0.0;  // a(L) * sup - b_d(L)
};

// Uses the grid points in [0, c L]. ConfigError unless L > 1 (log log L must
// exist); StructuralError when the path is shorter than the window.
DarlingErdosStat sup_norm_stat(const OuPath& path, double L, double c);

// KS distance and p-value of `stats` against the Gumbel law with the given
// shift. StatisticalError below 100 samples.
KsResult gumbel_ks_check(std::span<const double> stats, double shift);

// One replication of the max-location event: the sup of |U| over [0, C] is
// strictly larger than its sup over [0, A] and [B, C] together.
bool max_location_hit(double A, double B, double C, double dt, RngStream& stream);

void validate_max_location(double A, double B, double C, double dt);

}  // namespace ccart
