#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ccart {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// P(D_n < d) for the one-sample statistic, by Marsaglia, Tsang and Wang
// (2003). Exact up to rounding; cost grows like (n d)^3 log n.
double kolmogorov_cdf_exact(std::size_t n, double d);

// Limiting survival function Q(lambda) = P(sup |B| > lambda).
double kolmogorov_q(double lambda);

// P(D_n >= d): exact while n d is moderate, Stephens-corrected asymptotic
// beyond that.
double kolmogorov_pvalue(std::size_t n, double d);

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Regularized incomplete beta I_x(a, b).
double beta_cdf(double x, double a, double b);
// exp(-exp(-(z - shift)))
double gumbel_cdf(double z, double shift);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_and_se(std::span<const double> v);

// Linear-interpolated empirical quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> v, double q);

}  // namespace ccart
