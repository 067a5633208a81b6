#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causal_cart/rng.hpp"

namespace ccart {

enum class ErrorFamily { normal, laplace, uniform, centered_exponential };

// Zero-mean error law. `scale` is the standard deviation for normal, the
// Laplace scale b, the half-width for uniform, and the mean of the exponential
// before centring for centered_exponential.
struct ErrorDist {
  ErrorFamily family = ErrorFamily::normal;
  double scale = 1.0;

  [[nodiscard]] double draw(RngStream& rng) const;
  [[nodiscard]] double variance() const noexcept;
  [[nodiscard]] bool symmetric() const noexcept {
    return family != ErrorFamily::centered_exponential;
  }
};

std::string to_string(ErrorFamily f);
ErrorFamily parse_error_family(std::string_view s);

struct DgpConfig {
  std::size_t n = 1000;
  std::size_t p = 1;
  double xi = 0.5;
  double c0 = 0.0;
  double c1 = 0.0;
  ErrorDist err0{};
  ErrorDist err1{};

  [[nodiscard]] double tau() const noexcept { return c1 - c0; }
  // Throws ConfigError when xi is outside (0,1), p == 0 or a scale is not positive.
  void validate() const;
};

/// Columnar (y, d, x) sample. Covariates are stored column-major so that
/// per-coordinate sorting and scanning touch contiguous memory.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> y, std::vector<std::uint8_t> d,
          std::vector<double> x_colmajor, std::size_t p);

  [[nodiscard]] std::size_t rows() const noexcept { return y_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return p_; }

  [[nodiscard]] double y(std::size_t i) const noexcept { return y_[i]; }
  [[nodiscard]] std::uint8_t d(std::size_t i) const noexcept { return d_[i]; }
  [[nodiscard]] double x(std::size_t i, std::size_t coord) const noexcept {
    return x_[coord * y_.size() + i];
  }

  [[nodiscard]] std::span<const double> y() const noexcept { return y_; }
  [[nodiscard]] std::span<const std::uint8_t> d() const noexcept { return d_; }
  [[nodiscard]] std::span<const double> column(std::size_t coord) const noexcept {
    return {x_.data() + coord * y_.size(), y_.size()};
  }
  [[nodiscard]] const std::vector<double>& x_colmajor() const noexcept { return x_; }

  // Row i as a point in R^p.
  [[nodiscard]] std::vector<double> point(std::size_t i) const;

  // Same covariates, different outcomes/treatments.
  [[nodiscard]] Dataset with_outcomes(std::vector<double> y,
                                      std::vector<std::uint8_t> d) const;
  // Rows selected in the given order.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> y_;
  std::vector<std::uint8_t> d_;
  std::vector<double> x_;
  std::size_t p_ = 0;
};

// y * (d - xi) / (xi (1 - xi)); DomainError unless 0 < xi < 1.
double transformed_outcome(double y, std::uint8_t d, double xi);

// n x p i.i.d. Uniform[0,1] covariates, column-major.
std::vector<double> sample_covariates(std::size_t n, std::size_t p, RngStream& rng);

// Fresh (y, d) for the given covariates under cfg.
Dataset sample_panel(const DgpConfig& cfg, const std::vector<double>& x_colmajor,
                     std::size_t n, RngStream& rng);

Dataset sample_dataset(const DgpConfig& cfg, RngStream& rng);

}  // namespace ccart
