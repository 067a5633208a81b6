#include "causal_cart/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "causal_cart/errors.hpp"
#include "causal_cart/estimators.hpp"

namespace ccart {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// SST - G below this share of SST is cancellation noise, so S^2 counts as zero.
constexpr double kPooledVarianceFloor = 1e-10;

// Node-level constants for the prefix-sum scan. Outcomes are centred before
// accumulation: y by its node mean, the transformed outcome by its node mean,
// and y within each arm by that arm's mean.
struct NodeTotals {
  std::size_t n = 0, n0 = 0, n1 = 0;
  double mean_y = 0, mean_t = 0, mean_y0 = 0, mean_y1 = 0;
  double sum_a = 0, sum_b = 0, sum_z0 = 0, sum_z1 = 0;  // ~0 after centring
  double sst_b = 0;  // sum of squared centred transformed outcomes
  double xi = 0.5;
  bool uses_transform = false;
};

inline double transform_or_zero(double y, std::uint8_t d, double xi, bool on) {
  return on ? y * (static_cast<double>(d) - xi) / (xi * (1.0 - xi)) : 0.0;
}

NodeTotals node_totals(const Dataset& data, std::span<const std::uint32_t> rows,
                       const SplitRule& rule) {
  NodeTotals t;
  t.n = rows.size();
  t.xi = rule.xi;
  t.uses_transform = rule.tag == RuleTag::ipw_var || rule.tag == RuleTag::tstat;
  CompensatedSum sy, st, s0, s1;
  for (auto r : rows) {
    const double y = data.y(r);
    sy.add(y);
    if (t.uses_transform) st.add(transform_or_zero(y, data.d(r), t.xi, true));
    if (data.d(r)) {
      s1.add(y);
      ++t.n1;
    } else {
      s0.add(y);
      ++t.n0;
    }
  }
  const auto nd = static_cast<double>(t.n);
  t.mean_y = t.n ? sy.value() / nd : 0.0;
  t.mean_t = t.n ? st.value() / nd : 0.0;
  t.mean_y0 = t.n0 ? s0.value() / static_cast<double>(t.n0) : 0.0;
  t.mean_y1 = t.n1 ? s1.value() / static_cast<double>(t.n1) : 0.0;
  for (auto r : rows) {
    const double y = data.y(r);
    const std::uint8_t d = data.d(r);
    t.sum_a += y - t.mean_y;
    if (t.uses_transform) {
      const double b = transform_or_zero(y, d, t.xi, true) - t.mean_t;
      t.sum_b += b;
      t.sst_b += b * b;
    }
    if (d)
      t.sum_z1 += y - t.mean_y1;
    else
      t.sum_z0 += y - t.mean_y0;
  }
  return t;
}

// Left-child running sums along one ordering.
struct LeftSums {
  double a = 0, b = 0, z0 = 0, z1 = 0;
  std::size_t n1 = 0;

  void add(const Dataset& data, std::uint32_t r, const NodeTotals& t) noexcept {
    const double y = data.y(r);
    const std::uint8_t d = data.d(r);
    a += y - t.mean_y;
    if (t.uses_transform) b += transform_or_zero(y, d, t.xi, true) - t.mean_t;
    if (d) {
      z1 += y - t.mean_y1;
      ++n1;
    } else {
      z0 += y - t.mean_y0;
    }
  }
};

inline double gain_from_prefix(double s_k, double s_n, double k, double n) noexcept {
  const double dev = s_k - (k / n) * s_n;
  return n / (k * (n - k)) * dev * dev;
}

// Criterion for the candidate whose left child is the first k rows; NaN when
// the candidate is invalid for the rule.
double evaluate(const NodeTotals& t, const LeftSums& left, std::size_t k,
                RuleTag tag) noexcept {
  const auto n = static_cast<double>(t.n);
  const auto kd = static_cast<double>(k);
  switch (tag) {
    case RuleTag::cart_sse:
      return gain_from_prefix(left.a, t.sum_a, kd, n);
    case RuleTag::ipw_var:
      return gain_from_prefix(left.b, t.sum_b, kd, n);
    default:
      break;
  }
  const std::size_t n1l = left.n1;
  const std::size_t n0l = k - n1l;
  const std::size_t n1r = t.n1 - n1l;
  const std::size_t n0r = t.n0 - n0l;
  if (n1l == 0 || n0l == 0 || n1r == 0 || n0r == 0) return kNaN;
  const double m1l = left.z1 / static_cast<double>(n1l);
  const double m0l = left.z0 / static_cast<double>(n0l);
  const double m1r = (t.sum_z1 - left.z1) / static_cast<double>(n1r);
  const double m0r = (t.sum_z0 - left.z0) / static_cast<double>(n0r);
  if (tag == RuleTag::sse_two_means) {
    const double d1 = m1l - m1r;
    const double d0 = m0l - m0r;
    return static_cast<double>(n1l) * static_cast<double>(n1r) /
               static_cast<double>(t.n1) * d1 * d1 +
           static_cast<double>(n0l) * static_cast<double>(n0r) /
               static_cast<double>(t.n0) * d0 * d0;
  }
  const double delta = (m1l - m0l) - (m1r - m0r);
  const double g = kd * (n - kd) / n * delta * delta;
  if (tag == RuleTag::dim_var) return g;
  // tstat: n * G / S^2 with S^2 = (SST - G) / (n - 2).
  if (t.n <= 2) return kNaN;
  if (!(t.sst_b - g > kPooledVarianceFloor * t.sst_b)) return kNaN;
  const double s2 = (t.sst_b - g) / (n - 2.0);
  return n * g / s2;
}

void scan_coordinate(const Dataset& data, std::span<const std::uint32_t> order,
                     std::size_t coord, const NodeTotals& t, RuleTag tag,
                     std::span<double> out) {
  LeftSums left;
  const std::size_t n = order.size();
  for (std::size_t k = 1; k < n; ++k) {
    left.add(data, order[k - 1], t);
    if (data.x(order[k - 1], coord) == data.x(order[k], coord)) {
      out[k - 1] = kNaN;
      continue;
    }
    out[k - 1] = evaluate(t, left, k, tag);
  }
}

void check_orders(const Dataset& data, const OrderIndex& orders) {
  if (orders.dim() != data.dim())
    throw StructuralError("order index dimension does not match dataset");
}

}  // namespace

void SplitRule::validate() const {
  if ((tag == RuleTag::ipw_var || tag == RuleTag::tstat) && !(xi > 0.0 && xi < 1.0))
    throw ConfigError("split rule " + rule_name(tag) + " needs 0 < xi < 1");
}

std::string rule_name(RuleTag tag) {
  switch (tag) {
    case RuleTag::cart_sse:
      return "cart";
    case RuleTag::dim_var:
      return "dim";
    case RuleTag::ipw_var:
      return "ipw";
    case RuleTag::sse_two_means:
      return "sse";
    case RuleTag::tstat:
      return "tstat";
  }
  return "?";
}

RuleTag parse_rule(std::string_view name) {
  if (name == "cart") return RuleTag::cart_sse;
  if (name == "dim") return RuleTag::dim_var;
  if (name == "ipw") return RuleTag::ipw_var;
  if (name == "sse") return RuleTag::sse_two_means;
  if (name == "tstat") return RuleTag::tstat;
  throw ConfigError("unknown split rule '" + std::string(name) + "'");
}

std::pair<OrderIndex, OrderIndex> OrderIndex::partition(
    std::span<const std::uint8_t> goes_left) const {
  OrderIndex left, right;
  left.perm.resize(perm.size());
  right.perm.resize(perm.size());
  for (std::size_t l = 0; l < perm.size(); ++l) {
    for (auto r : perm[l]) (goes_left[r] ? left.perm[l] : right.perm[l]).push_back(r);
  }
  return {std::move(left), std::move(right)};
}

OrderIndex coordinate_orders(const Dataset& data) {
  OrderIndex out;
  const std::size_t n = data.rows();
  out.perm.resize(data.dim());
  for (std::size_t l = 0; l < data.dim(); ++l) {
    auto& pi = out.perm[l];
    pi.resize(n);
    std::iota(pi.begin(), pi.end(), 0u);
    const auto col = data.column(l);
    std::stable_sort(pi.begin(), pi.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
  return out;
}

CriterionProfile::CriterionProfile(std::size_t n, std::size_t p)
    : n_(n), p_(p), values_(n > 0 ? (n - 1) * p : 0, kNaN) {}

std::optional<double> CriterionProfile::at(std::size_t k, std::size_t coord) const {
  if (k < 1 || k >= n_ || coord >= p_) throw DomainError("profile index out of range");
  const double v = values_[coord * (n_ - 1) + (k - 1)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<double> criterion_value(const Dataset& data, const OrderIndex& orders,
                                      const SplitRule& rule, std::size_t k,
                                      std::size_t coord) {
  check_orders(data, orders);
  const std::size_t n = orders.rows();
  if (k < 1 || k >= n) throw DomainError("split index must lie in [1, n-1]");
  if (coord >= orders.dim()) throw DomainError("split coordinate out of range");
  rule.validate();
  const auto& order = orders.perm[coord];
  const NodeTotals t = node_totals(data, orders.perm[0], rule);
  LeftSums left;
  for (std::size_t i = 0; i < k; ++i) left.add(data, order[i], t);
  if (data.x(order[k - 1], coord) == data.x(order[k], coord)) return std::nullopt;
  const double v = evaluate(t, left, k, rule.tag);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

CriterionProfile criterion_profile(const Dataset& data, const OrderIndex& orders,
                                   const SplitRule& rule) {
  check_orders(data, orders);
  const std::size_t n = orders.rows();
  if (n < 2) throw StructuralError("criterion profile needs at least two rows");
  rule.validate();
  CriterionProfile prof(n, orders.dim());
  const NodeTotals t = node_totals(data, orders.perm[0], rule);
  for (std::size_t l = 0; l < orders.dim(); ++l)
    scan_coordinate(data, orders.perm[l], l, t, rule.tag, prof.column(l));
  return prof;
}

CriterionProfile criterion_profile_parallel(const Dataset& data,
                                            const OrderIndex& orders,
                                            const SplitRule& rule) {
  check_orders(data, orders);
  const std::size_t n = orders.rows();
  if (n < 2) throw StructuralError("criterion profile needs at least two rows");
  rule.validate();
  CriterionProfile prof(n, orders.dim());
  const NodeTotals t = node_totals(data, orders.perm[0], rule);
  const auto p = static_cast<long long>(orders.dim());
#pragma omp parallel for schedule(static)
  for (long long l = 0; l < p; ++l) {
    const auto c = static_cast<std::size_t>(l);
    scan_coordinate(data, orders.perm[c], c, t, rule.tag, prof.column(c));
  }
  return prof;
}

double split_tie_scale(const Dataset& data, std::span<const std::uint32_t> rows,
                       const SplitRule& rule) {
  const NodeTotals t = node_totals(data, rows, rule);
  double y_max = 0.0;
  double ss_y = 0.0, ss_arm = 0.0;
  for (auto r : rows) {
    const double y = data.y(r);
    y_max = std::max(y_max, std::abs(y));
    ss_y += (y - t.mean_y) * (y - t.mean_y);
    const double z = y - (data.d(r) ? t.mean_y1 : t.mean_y0);
    ss_arm += z * z;
  }
  const auto n = static_cast<double>(rows.size());
  // Floor well above the rounding noise of centred sums (~ n eps^2 y^2).
  const double floor = 1e-20 * n * y_max * y_max;
  switch (rule.tag) {
    case RuleTag::cart_sse:
      return std::max(ss_y, floor);
    case RuleTag::ipw_var: {
      const double w = 1.0 / (rule.xi * (1.0 - rule.xi));
      return std::max(t.sst_b, floor * w * w);
    }
    case RuleTag::dim_var:
    case RuleTag::sse_two_means:
      return std::max(ss_arm, floor);
    case RuleTag::tstat: {
      const double dimensionless = 1e-20 * n * n;
      if (n > 2 && t.sst_b > 0.0)
        return std::max(n * (n - 2.0) * ss_arm / t.sst_b, dimensionless);
      return dimensionless;
    }
  }
  return floor;
}

namespace {

// Picks the winner of a (coordinate-major) criterion surface under the tie
// rule. `value_at(l, k)` returns NaN for invalid candidates.
template <typename ValueAt>
SplitDecision select_best(std::size_t n, std::size_t p, double scale, ValueAt value_at) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t l = 0; l < p; ++l)
    for (std::size_t k = 1; k < n; ++k) {
      const double v = value_at(l, k);
      if (std::isnan(v)) continue;
      any = true;
      best = std::max(best, v);
    }
  SplitDecision dec;
  if (!any) return dec;
  const double tol = kTieRelTol * std::max(std::abs(best), scale);
  for (std::size_t l = 0; l < p; ++l)
    for (std::size_t k = 1; k < n; ++k) {
      const double v = value_at(l, k);
      if (!std::isnan(v) && v >= best - tol) {
        dec.coordinate = l;
        dec.index = k;
        dec.value = v;
        dec.valid = true;
        return dec;
      }
    }
  return dec;
}

}  // namespace

SplitDecision best_split(const Dataset& data, const OrderIndex& orders,
                         const SplitRule& rule, Exec exec) {
  const std::size_t n = orders.rows();
  if (n < 2) throw StructuralError("best_split needs at least two rows");
  const CriterionProfile prof = exec == Exec::parallel
                                    ? criterion_profile_parallel(data, orders, rule)
                                    : criterion_profile(data, orders, rule);
  const double scale = split_tie_scale(data, orders.perm[0], rule);
  SplitDecision dec = select_best(n, orders.dim(), scale, [&](std::size_t l, std::size_t k) {
    return prof.column(l)[k - 1];
  });
  if (dec.valid) dec.threshold = data.x(orders.perm[dec.coordinate][dec.index - 1], dec.coordinate);
  return dec;
}

namespace {

// Explicit within-arm least-squares residual sum for y ~ 1 + d on a child.
// Returns NaN when the regression is degenerate (an arm is missing).
double two_means_sse(std::span<const double> y, std::span<const std::uint8_t> d) {
  const LeafEstimate fit = dim_leaf(y, d);
  if (fit.degenerate) return kNaN;
  // Normal equations: intercept = control mean, slope = treated - control.
  CompensatedSum s0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!d[i]) s0.add(y[i]);
  const double a = s0.value() / static_cast<double>(fit.n0);
  const double b = fit.value;
  CompensatedSum sse;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - a - b * static_cast<double>(d[i]);
    sse.add(r * r);
  }
  return sse.value();
}

struct Children {
  std::vector<double> yl, yr;
  std::vector<std::uint8_t> dl, dr;
};

double brute_value(const Dataset& data, const SplitRule& rule, const Children& c) {
  const auto n = static_cast<double>(data.rows());
  const auto k = static_cast<double>(c.yl.size());
  switch (rule.tag) {
    case RuleTag::cart_sse: {
      const double diff = mean_leaf(c.yl).value - mean_leaf(c.yr).value;
      return k * (n - k) / n * diff * diff;
    }
    case RuleTag::ipw_var: {
      const double diff =
          ipw_leaf(c.yl, c.dl, rule.xi).value - ipw_leaf(c.yr, c.dr, rule.xi).value;
      return k * (n - k) / n * diff * diff;
    }
    case RuleTag::dim_var:
    case RuleTag::tstat: {
      const LeafEstimate l = dim_leaf(c.yl, c.dl), r = dim_leaf(c.yr, c.dr);
      if (l.degenerate || r.degenerate) return kNaN;
      const double diff = l.value - r.value;
      const double g = k * (n - k) / n * diff * diff;
      if (rule.tag == RuleTag::dim_var) return g;
      if (data.rows() <= 2) return kNaN;
      CompensatedSum st;
      for (std::size_t i = 0; i < data.rows(); ++i)
        st.add(transformed_outcome(data.y(i), data.d(i), rule.xi));
      const double mean_t = st.value() / n;
      CompensatedSum sst;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        const double e = transformed_outcome(data.y(i), data.d(i), rule.xi) - mean_t;
        sst.add(e * e);
      }
      if (!(sst.value() - g > kPooledVarianceFloor * sst.value())) return kNaN;
      const double s2 = (sst.value() - g) / (n - 2.0);
      return n * (diff * diff) / (s2 / k + s2 / (n - k));
    }
    case RuleTag::sse_two_means: {
      const double sse_l = two_means_sse(c.yl, c.dl);
      const double sse_r = two_means_sse(c.yr, c.dr);
      if (std::isnan(sse_l) || std::isnan(sse_r)) return kNaN;
      // Criterion = (node within-arm SSE) - (children within-arm SSE).
      return two_means_sse(data.y(), data.d()) - (sse_l + sse_r);
    }
  }
  return kNaN;
}

double brute_value_at(const Dataset& data, const SplitRule& rule,
                      std::span<const double> sorted_col, std::size_t k,
                      std::size_t coord) {
  const double threshold = sorted_col[k - 1];
  Children c;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.x(i, coord) <= threshold) {
      c.yl.push_back(data.y(i));
      c.dl.push_back(data.d(i));
    } else {
      c.yr.push_back(data.y(i));
      c.dr.push_back(data.d(i));
    }
  }
  // Tied order statistics: no threshold puts exactly k rows on the left.
  if (c.yl.size() != k) return kNaN;
  return brute_value(data, rule, c);
}

}  // namespace

std::optional<double> brute_force_value(const Dataset& data, const SplitRule& rule,
                                        std::size_t k, std::size_t coord) {
  const std::size_t n = data.rows();
  if (k < 1 || k >= n) throw DomainError("split index must lie in [1, n-1]");
  if (coord >= data.dim()) throw DomainError("split coordinate out of range");
  rule.validate();
  std::vector<double> col(data.column(coord).begin(), data.column(coord).end());
  std::sort(col.begin(), col.end());
  const double v = brute_value_at(data, rule, col, k, coord);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

SplitDecision brute_force_split(const Dataset& data, const SplitRule& rule) {
  rule.validate();
  const std::size_t n = data.rows();
  const std::size_t p = data.dim();
  if (n < 2) return {};
  std::vector<std::vector<double>> sorted(p);
  std::vector<double> values(p * (n - 1));
  for (std::size_t l = 0; l < p; ++l) {
    sorted[l].assign(data.column(l).begin(), data.column(l).end());
    std::sort(sorted[l].begin(), sorted[l].end());
    for (std::size_t k = 1; k < n; ++k)
      values[l * (n - 1) + k - 1] = brute_value_at(data, rule, sorted[l], k, l);
  }
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  const double scale = split_tie_scale(data, all, rule);
  SplitDecision dec = select_best(n, p, scale, [&](std::size_t l, std::size_t k) {
    return values[l * (n - 1) + k - 1];
  });
  if (dec.valid) dec.threshold = sorted[dec.coordinate][dec.index - 1];
  return dec;
}

std::optional<double> two_means_children_sse(const Dataset& data, std::size_t k,
                                             std::size_t coord) {
  const std::size_t n = data.rows();
  if (k < 1 || k >= n) throw DomainError("split index must lie in [1, n-1]");
  if (coord >= data.dim()) throw DomainError("split coordinate out of range");
  std::vector<double> col(data.column(coord).begin(), data.column(coord).end());
  std::sort(col.begin(), col.end());
  Children c;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = data.x(i, coord) <= col[k - 1];
    (left ? c.yl : c.yr).push_back(data.y(i));
    (left ? c.dl : c.dr).push_back(data.d(i));
  }
  if (c.yl.size() != k) return std::nullopt;
  const double l = two_means_sse(c.yl, c.dl), r = two_means_sse(c.yr, c.dr);
  if (std::isnan(l) || std::isnan(r)) return std::nullopt;
  return l + r;
}

}  // namespace ccart
