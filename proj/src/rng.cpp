#include "causal_cart/rng.hpp"

namespace ccart {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> RngStream::philox4x32_10(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::string_view experiment,
                     std::uint64_t rep, std::uint32_t lane) noexcept
    : seed_(seed), id_hash_(fnv1a64(experiment)), rep_(rep), lane_(lane) {
  const std::uint64_t k = splitmix64(
      seed_ ^ splitmix64(id_hash_ + 0x9E3779B97F4A7C15ull * (lane_ + 1ull)));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

RngStream RngStream::substream(std::uint32_t lane) const noexcept {
  RngStream s = *this;
  s.lane_ = lane;
  const std::uint64_t k = splitmix64(
      seed_ ^ splitmix64(id_hash_ + 0x9E3779B97F4A7C15ull * (lane + 1ull)));
  s.key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  s.block_ = 0;
  s.pos_ = 4;
  return s;
}

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(rep_), static_cast<std::uint32_t>(rep_ >> 32)};
  buffer_ = philox4x32_10(ctr, key_);
  ++block_;
  pos_ = 0;
}

RngStream::result_type RngStream::operator()() noexcept {
  if (pos_ > 2) refill();
  const std::uint64_t v =
      (static_cast<std::uint64_t>(buffer_[pos_ + 1]) << 32) | buffer_[pos_];
  pos_ += 2;
  return v;
}

double RngStream::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace ccart
