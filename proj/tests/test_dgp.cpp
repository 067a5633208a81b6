#include <gtest/gtest.h>

#include <cmath>

#include "causal_cart/dgp.hpp"
#include "causal_cart/errors.hpp"

using namespace ccart;

TEST(SampleDataset, EmptySample) {
  DgpConfig cfg;
  cfg.n = 0;
  RngStream s(1, "dgp", 0);
  const Dataset d = sample_dataset(cfg, s);
  EXPECT_EQ(d.rows(), 0u);
  EXPECT_EQ(d.dim(), 1u);
}

TEST(SampleDataset, TreatmentShareMatchesXi) {
  DgpConfig cfg;
  cfg.n = 100000;
  cfg.xi = 0.3;
  RngStream s(2, "dgp", 0);
  const Dataset d = sample_dataset(cfg, s);
  double treated = 0;
  for (auto v : d.d()) treated += v;
  EXPECT_NEAR(treated / cfg.n, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / cfg.n));
}

TEST(SampleDataset, CovariatesAreUnitUniform) {
  DgpConfig cfg;
  cfg.n = 20000;
  cfg.p = 3;
  RngStream s(3, "dgp", 0);
  const Dataset d = sample_dataset(cfg, s);
  for (std::size_t l = 0; l < 3; ++l) {
    double sum = 0.0;
    for (double v : d.column(l)) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum / cfg.n, 0.5, 5.0 / std::sqrt(12.0 * cfg.n));
  }
}

TEST(SampleDataset, ReplayIsByteIdentical) {
  DgpConfig cfg;
  cfg.n = 500;
  cfg.p = 2;
  cfg.c1 = 1.5;
  RngStream a(11, "dgp", 4), b(11, "dgp", 4);
  EXPECT_EQ(sample_dataset(cfg, a), sample_dataset(cfg, b));
}

TEST(SampleDataset, OutcomesFollowArmMeans) {
  DgpConfig cfg;
  cfg.n = 50000;
  cfg.c0 = -1.0;
  cfg.c1 = 3.0;
  RngStream s(5, "dgp", 0);
  const Dataset d = sample_dataset(cfg, s);
  double s0 = 0, s1 = 0, n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) (d.d(i) ? s1 : s0) += d.y(i), (d.d(i) ? n1 : n0) += 1;
  EXPECT_NEAR(s0 / n0, -1.0, 5.0 / std::sqrt(n0));
  EXPECT_NEAR(s1 / n1, 3.0, 5.0 / std::sqrt(n1));
}

TEST(DgpConfig, RejectsBadValues) {
  DgpConfig cfg;
  cfg.xi = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.xi = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.xi = 0.5;
  cfg.p = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.p = 1;
  cfg.err1.scale = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  RngStream s(1, "x", 0);
  EXPECT_THROW(sample_dataset(cfg, s), ConfigError);
}

TEST(TransformedOutcome, WorkedValues) {
  EXPECT_DOUBLE_EQ(transformed_outcome(1.0, 1, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(transformed_outcome(1.0, 0, 0.5), -2.0);
  EXPECT_DOUBLE_EQ(transformed_outcome(1.0, 1, 0.25), 4.0);
}

TEST(TransformedOutcome, DomainError) {
  EXPECT_THROW(transformed_outcome(1.0, 1, 0.0), DomainError);
  EXPECT_THROW(transformed_outcome(1.0, 1, 1.0), DomainError);
  EXPECT_THROW(transformed_outcome(1.0, 1, -0.2), DomainError);
}

TEST(TransformedOutcome, MeanIsTreatmentEffect) {
  DgpConfig cfg;
  cfg.n = 100000;
  cfg.xi = 0.3;
  cfg.c0 = 0.5;
  cfg.c1 = 2.0;
  RngStream s(8, "dgp", 0);
  const Dataset d = sample_dataset(cfg, s);
  double sum = 0, sum2 = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double t = transformed_outcome(d.y(i), d.d(i), cfg.xi);
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / cfg.n;
  const double se = std::sqrt((sum2 / cfg.n - mean * mean) / cfg.n);
  EXPECT_NEAR(mean, cfg.tau(), 5.0 * se);
}

class ErrorFamilies : public ::testing::TestWithParam<ErrorFamily> {};

TEST_P(ErrorFamilies, MeanZeroVarianceAndSkew) {
  const ErrorDist e{GetParam(), 1.5};
  RngStream s(21, to_string(GetParam()), 0);
  const int n = 100000;
  std::vector<double> v(n);
  for (auto& x : v) x = e.draw(s);
  double m1 = 0, m2 = 0, m3 = 0, m6 = 0;
  for (double x : v) m1 += x, m2 += x * x, m3 += x * x * x, m6 += std::pow(x, 6);
  m1 /= n, m2 /= n, m3 /= n, m6 /= n;
  EXPECT_NEAR(m1, 0.0, 5.0 * std::sqrt(e.variance() / n));
  EXPECT_NEAR(m2, e.variance(), 0.05 * e.variance());
  const double m3_se = std::sqrt(m6 / n);
  if (e.symmetric())
    EXPECT_NEAR(m3, 0.0, 5.0 * m3_se);
  else
    EXPECT_GT(m3, 5.0 * m3_se);  // exp(scale) - scale is right-skewed
}

INSTANTIATE_TEST_SUITE_P(All, ErrorFamilies,
                         ::testing::Values(ErrorFamily::normal, ErrorFamily::laplace,
                                           ErrorFamily::uniform,
                                           ErrorFamily::centered_exponential));

TEST(ErrorFamily, ParseNames) {
  EXPECT_EQ(parse_error_family("normal"), ErrorFamily::normal);
  EXPECT_EQ(parse_error_family("laplace"), ErrorFamily::laplace);
  EXPECT_EQ(parse_error_family("uniform"), ErrorFamily::uniform);
  EXPECT_EQ(parse_error_family("centered-exponential"), ErrorFamily::centered_exponential);
  EXPECT_THROW(parse_error_family("cauchy"), ConfigError);
}

TEST(Dataset, RejectsInconsistentColumns) {
  EXPECT_THROW(Dataset({1.0, 2.0}, {1}, {0.1, 0.2}, 1), StructuralError);
  EXPECT_THROW(Dataset({1.0}, {2}, {0.1}, 1), StructuralError);
  EXPECT_THROW(Dataset({1.0}, {1}, {0.1, 0.2}, 1), StructuralError);
}

TEST(Dataset, SubsetKeepsRowsTogether) {
  const Dataset d({1, 2, 3}, {1, 0, 1}, {0.1, 0.2, 0.3, 0.9, 0.8, 0.7}, 2);
  const std::vector<std::size_t> rows = {2, 0};
  const Dataset s = d.subset(rows);
  ASSERT_EQ(s.rows(), 2u);
  EXPECT_EQ(s.y(0), 3);
  EXPECT_EQ(s.d(1), 1);
  EXPECT_EQ(s.x(0, 1), 0.7);
  EXPECT_EQ(s.x(1, 0), 0.1);
}
