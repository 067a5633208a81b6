#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ccart {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct LeafEstimate {
  double value = 0.0;
  std::size_t n = 0;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  bool degenerate = false;  // zero fallback fired; value == 0

  friend bool operator==(const LeafEstimate&, const LeafEstimate&) = default;
};

enum class LeafKind { dim, ipw, mean };

// Treated mean minus control mean; 0 and degenerate when either arm is empty.
LeafEstimate dim_leaf(std::span<const double> y, std::span<const std::uint8_t> d);

// Mean of the transformed outcome; 0 and degenerate on an empty leaf.
LeafEstimate ipw_leaf(std::span<const double> y, std::span<const std::uint8_t> d,
                      double xi);

// Plain mean; 0 and degenerate on an empty leaf. d may be empty (counts then
// report n0 = n).
LeafEstimate mean_leaf(std::span<const double> y, std::span<const std::uint8_t> d = {});

}  // namespace ccart
