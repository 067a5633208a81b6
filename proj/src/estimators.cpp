#include "causal_cart/estimators.hpp"

#include "causal_cart/dgp.hpp"
#include "causal_cart/errors.hpp"

namespace ccart {

LeafEstimate dim_leaf(std::span<const double> y, std::span<const std::uint8_t> d) {
  if (y.size() != d.size()) throw StructuralError("dim_leaf: y and d differ in length");
  CompensatedSum s0, s1;
  LeafEstimate out;
  out.n = y.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (d[i]) {
      s1.add(y[i]);
      ++out.n1;
    } else {
      s0.add(y[i]);
      ++out.n0;
    }
  }
  if (out.n0 == 0 || out.n1 == 0) {
    out.degenerate = true;
    return out;
  }
  out.value = s1.value() / static_cast<double>(out.n1) -
              s0.value() / static_cast<double>(out.n0);
  return out;
}

LeafEstimate ipw_leaf(std::span<const double> y, std::span<const std::uint8_t> d,
                      double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("ipw_leaf: xi must lie in (0,1)");
  if (y.size() != d.size()) throw StructuralError("ipw_leaf: y and d differ in length");
  CompensatedSum s;
  LeafEstimate out;
  out.n = y.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    s.add(transformed_outcome(y[i], d[i], xi));
    (d[i] ? out.n1 : out.n0) += 1;
  }
  if (out.n == 0) {
    out.degenerate = true;
    return out;
  }
  out.value = s.value() / static_cast<double>(out.n);
  return out;
}

LeafEstimate mean_leaf(std::span<const double> y, std::span<const std::uint8_t> d) {
  if (!d.empty() && d.size() != y.size())
    throw StructuralError("mean_leaf: y and d differ in length");
  CompensatedSum s;
  LeafEstimate out;
  out.n = y.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    s.add(y[i]);
    if (!d.empty() && d[i]) ++out.n1;
  }
  out.n0 = out.n - out.n1;
  if (out.n == 0) {
    out.degenerate = true;
    return out;
  }
  out.value = s.value() / static_cast<double>(out.n);
  return out;
}

}  // namespace ccart
