#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace ccart {

// 64-bit FNV-1a; used to turn experiment ids into key material.
std::uint64_t fnv1a64(std::string_view s) noexcept;

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by (master seed, experiment id, replication index,
/// lane). The Philox key is derived from (seed, fnv1a64(id), lane) through
/// SplitMix64; the 128-bit counter holds (block index, replication index).
/// Every stream is therefore addressable without consuming any other stream,
/// which is what makes results independent of how replications are scheduled.
///
/// Satisfies UniformRandomBitGenerator, so Boost.Random distributions can be
/// layered on top with platform-independent results.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::string_view experiment, std::uint64_t rep,
            std::uint32_t lane = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Independent stream sharing (seed, experiment, rep) but a different lane.
  [[nodiscard]] RngStream substream(std::uint32_t lane) const noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t rep() const noexcept { return rep_; }
  [[nodiscard]] std::uint32_t lane() const noexcept { return lane_; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32_10(
      std::array<std::uint32_t, 4> counter,
      std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t id_hash_;
  std::uint64_t rep_;
  std::uint32_t lane_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 4;  // in 32-bit words; 4 means empty
};

}  // namespace ccart
