#include "causal_cart/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "causal_cart/errors.hpp"

namespace ccart {

namespace {

using Matrix = std::vector<double>;  // row-major m x m

Matrix multiply(const Matrix& a, const Matrix& b, int m) {
  Matrix c(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < m; ++j) c[i * m + j] += aik * b[k * m + j];
    }
  return c;
}

// h^n with a separate base-10 exponent, renormalised on the central entry so
// that large n do not overflow.
void matrix_power(const Matrix& h, int eh, Matrix& out, int& eout, int m, std::size_t n) {
  if (n == 1) {
    out = h;
    eout = eh;
    return;
  }
  matrix_power(h, eh, out, eout, m, n / 2);
  Matrix sq = multiply(out, out, m);
  int esq = 2 * eout;
  if (n % 2 == 1) {
    sq = multiply(h, sq, m);
    esq += eh;
  }
  const int centre = (m / 2) * m + m / 2;
  if (sq[centre] > 1e140) {
    for (auto& v : sq) v *= 1e-140;
    esq += 140;
  }
  out = std::move(sq);
  eout = esq;
}

}  // namespace

double kolmogorov_cdf_exact(std::size_t n, double d) {
  if (n == 0) throw StatisticalError("KS distribution needs at least one sample");
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return 1.0;
  const double nd = static_cast<double>(n) * d;
  const int k = static_cast<int>(nd) + 1;
  const int m = 2 * k - 1;
  const double h = k - nd;
  Matrix H(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) H[i * m + j] = (i - j + 1 < 0) ? 0.0 : 1.0;
  for (int i = 0; i < m; ++i) {
    H[i * m] -= std::pow(h, i + 1);
    H[(m - 1) * m + i] -= std::pow(h, m - i);
  }
  if (2 * h - 1 > 0) H[(m - 1) * m] += std::pow(2 * h - 1, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i - j + 1 > 0)
        for (int g = 1; g <= i - j + 1; ++g) H[i * m + j] /= g;

  Matrix Q;
  int eq = 0;
  matrix_power(H, 0, Q, eq, m, n);
  double s = Q[(k - 1) * m + k - 1];
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / static_cast<double>(n);
    if (s < 1e-140) {
      s *= 1e140;
      eq -= 140;
    }
  }
  return std::clamp(s * std::pow(10.0, eq), 0.0, 1.0);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    const double w = -pi * pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 30; j += 2) sum += std::exp(w * j * j);
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double kolmogorov_pvalue(std::size_t n, double d) {
  if (n == 0) throw StatisticalError("KS p-value needs at least one sample");
  if (d <= 0.0) return 1.0;
  if (d >= 1.0) return 0.0;
  const double nn = static_cast<double>(n);
  if (nn * d < 150.0) return std::clamp(1.0 - kolmogorov_cdf_exact(n, d), 0.0, 1.0);
  const double sn = std::sqrt(nn);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw StatisticalError("KS test on an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    dmax = std::max({dmax, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {dmax, kolmogorov_pvalue(sample.size(), dmax)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw StatisticalError("two-sample KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    dmax = std::max(dmax, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {dmax, kolmogorov_q((ne + 0.12 + 0.11 / ne) * dmax)};
}

double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double gumbel_cdf(double z, double shift) { return std::exp(-std::exp(-(z - shift))); }

MeanSe mean_and_se(std::span<const double> v) {
  if (v.empty()) return {};
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw StatisticalError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace ccart
