#include "causal_cart/ou.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>

#include "causal_cart/errors.hpp"

namespace ccart {

namespace {

// Grid points with t_i <= t, guarding against t / dt landing a hair below an
// integer.
std::size_t last_index_at_or_before(double t, double dt) {
  return static_cast<std::size_t>(std::floor(t / dt + 1e-9));
}

}  // namespace

OuPath simulate_ou(std::size_t d, double T, double dt, RngStream& stream) {
  if (d < 1) throw ConfigError("O-U dimension must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("O-U step dt must be positive");
  if (!(T >= dt)) throw ConfigError("O-U horizon T must be at least dt");
  OuPath path;
  path.d = d;
  path.dt = dt;
  path.points = last_index_at_or_before(T, dt) + 1;
  path.values.resize(d * path.points);
  const double rho = std::exp(-dt / 2.0);
  const double innov = std::sqrt(-std::expm1(-dt));  // sqrt(1 - rho^2)
  boost::random::normal_distribution<double> z;
  for (std::size_t c = 0; c < d; ++c) {
    double* v = path.values.data() + c * path.points;
    v[0] = z(stream);
    for (std::size_t i = 1; i < path.points; ++i) v[i] = rho * v[i - 1] + innov * z(stream);
  }
  return path;
}

double de_scale(double L) { return std::sqrt(2.0 * std::log(L)); }

double de_centre(std::size_t d, double L) {
  const double half = static_cast<double>(d) / 2.0;
  return 2.0 * std::log(L) + half * std::log(std::log(L)) - std::lgamma(half);
}

DarlingErdosStat sup_norm_stat(const OuPath& path, double L, double c) {
  if (!(L > 1.0)) throw ConfigError("Darling-Erdos L must exceed 1");
  if (!(c > 0.0)) throw ConfigError("Darling-Erdos window multiplier c must be positive");
  const std::size_t last = last_index_at_or_before(c * L, path.dt);
  if (last >= path.points)
    throw StructuralError("window [0, cL] exceeds the simulated path");
  double best = 0.0;
  for (std::size_t i = 0; i <= last; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < path.d; ++k) sq += path.at(k, i) * path.at(k, i);
    best = std::max(best, sq);
  }
  DarlingErdosStat out;
  out.L = L;
  out.c = c;
  out.sup = std::sqrt(best);
  out.stat = de_scale(L) * out.sup - de_centre(path.d, L);
  return out;
}

KsResult gumbel_ks_check(std::span<const double> stats, double shift) {
  if (stats.size() < 100)
    throw StatisticalError("Gumbel KS check needs at least 100 samples, got " +
                           std::to_string(stats.size()));
  return ks_one_sample(std::vector<double>(stats.begin(), stats.end()),
                       [shift](double z) { return gumbel_cdf(z, shift); });
}

void validate_max_location(double A, double B, double C, double dt) {
  if (!(dt > 0.0)) throw ConfigError("max-location step dt must be positive");
  if (!(A >= 0.0 && A <= B && B <= C && C > 0.0))
    throw ConfigError("max-location needs 0 <= A <= B <= C with C > 0");
}

bool max_location_hit(double A, double B, double C, double dt, RngStream& stream) {
  validate_max_location(A, B, C, dt);
  const OuPath path = simulate_ou(1, C, dt, stream);
  const std::size_t ia = last_index_at_or_before(A, dt);
  const auto ib = static_cast<std::size_t>(std::ceil(B / dt - 1e-9));
  double outside = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < path.points; ++i) {
    const double v = std::abs(path.values[i]);
    if (i <= ia || i >= ib)
      outside = std::max(outside, v);
    else
      inside = std::max(inside, v);
  }
  return inside > outside;
}

}  // namespace ccart
