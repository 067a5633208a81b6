#include "causal_cart/dgp.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>

#include "causal_cart/errors.hpp"

namespace ccart {

double ErrorDist::draw(RngStream& rng) const {
  if (scale == 0.0) return 0.0;
  switch (family) {
    case ErrorFamily::normal:
      return boost::random::normal_distribution<double>(0.0, scale)(rng);
    case ErrorFamily::laplace:
      return boost::random::laplace_distribution<double>(0.0, scale)(rng);
    case ErrorFamily::uniform:
      return boost::random::uniform_real_distribution<double>(-scale, scale)(rng);
    case ErrorFamily::centered_exponential:
      return boost::random::exponential_distribution<double>(1.0 / scale)(rng) - scale;
  }
  return 0.0;
}

double ErrorDist::variance() const noexcept {
  switch (family) {
    case ErrorFamily::normal:
      return scale * scale;
    case ErrorFamily::laplace:
      return 2.0 * scale * scale;
    case ErrorFamily::uniform:
      return scale * scale / 3.0;
    case ErrorFamily::centered_exponential:
      return scale * scale;
  }
  return 0.0;
}

std::string to_string(ErrorFamily f) {
  switch (f) {
    case ErrorFamily::normal:
      return "normal";
    case ErrorFamily::laplace:
      return "laplace";
    case ErrorFamily::uniform:
      return "uniform";
    case ErrorFamily::centered_exponential:
      return "centered-exponential";
  }
  return "?";
}

ErrorFamily parse_error_family(std::string_view s) {
  if (s == "normal") return ErrorFamily::normal;
  if (s == "laplace") return ErrorFamily::laplace;
  if (s == "uniform") return ErrorFamily::uniform;
  if (s == "centered-exponential" || s == "cexp") return ErrorFamily::centered_exponential;
  throw ConfigError("unknown error family '" + std::string(s) + "'");
}

void DgpConfig::validate() const {
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("xi must lie in (0,1)");
  if (p == 0) throw ConfigError("p must be at least 1");
  if (!(err0.scale >= 0.0) || !(err1.scale >= 0.0))
    throw ConfigError("error scale must be non-negative");
  if ((err0.family == ErrorFamily::centered_exponential && err0.scale == 0.0) ||
      (err1.family == ErrorFamily::centered_exponential && err1.scale == 0.0))
    throw ConfigError("centered-exponential needs a positive scale");
}

Dataset::Dataset(std::vector<double> y, std::vector<std::uint8_t> d,
                 std::vector<double> x_colmajor, std::size_t p)
    : y_(std::move(y)), d_(std::move(d)), x_(std::move(x_colmajor)), p_(p) {
  if (d_.size() != y_.size() || x_.size() != y_.size() * p_)
    throw StructuralError("dataset columns have inconsistent row counts");
  for (auto v : d_)
    if (v > 1) throw StructuralError("treatment indicator must be 0 or 1");
}

std::vector<double> Dataset::point(std::size_t i) const {
  std::vector<double> out(p_);
  for (std::size_t l = 0; l < p_; ++l) out[l] = x(i, l);
  return out;
}

Dataset Dataset::with_outcomes(std::vector<double> y, std::vector<std::uint8_t> d) const {
  return Dataset(std::move(y), std::move(d), x_, p_);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const std::size_t m = rows.size();
  std::vector<double> y(m), xs(m * p_);
  std::vector<std::uint8_t> d(m);
  for (std::size_t j = 0; j < m; ++j) {
    y[j] = y_[rows[j]];
    d[j] = d_[rows[j]];
    for (std::size_t l = 0; l < p_; ++l) xs[l * m + j] = x(rows[j], l);
  }
  return Dataset(std::move(y), std::move(d), std::move(xs), p_);
}

double transformed_outcome(double y, std::uint8_t d, double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("xi must lie in (0,1)");
  return y * (static_cast<double>(d) - xi) / (xi * (1.0 - xi));
}

std::vector<double> sample_covariates(std::size_t n, std::size_t p, RngStream& rng) {
  std::vector<double> x(n * p);
  boost::random::uniform_real_distribution<double> unif(0.0, 1.0);
  for (auto& v : x) v = unif(rng);
  return x;
}

Dataset sample_panel(const DgpConfig& cfg, const std::vector<double>& x_colmajor,
                     std::size_t n, RngStream& rng) {
  cfg.validate();
  std::vector<double> y(n);
  std::vector<std::uint8_t> d(n);
  boost::random::bernoulli_distribution<double> coin(cfg.xi);
  for (std::size_t i = 0; i < n; ++i) d[i] = coin(rng) ? 1 : 0;
  for (std::size_t i = 0; i < n; ++i)
    y[i] = d[i] ? cfg.c1 + cfg.err1.draw(rng) : cfg.c0 + cfg.err0.draw(rng);
  return Dataset(std::move(y), std::move(d), x_colmajor, cfg.p);
}

Dataset sample_dataset(const DgpConfig& cfg, RngStream& rng) {
  cfg.validate();
  auto x = sample_covariates(cfg.n, cfg.p, rng);
  return sample_panel(cfg, x, cfg.n, rng);
}

}  // namespace ccart
