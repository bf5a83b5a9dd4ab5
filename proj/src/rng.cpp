#include "sderates/rng.hpp"

#include "sderates/stats.hpp"

namespace sderates::rng {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mulhilo(kPhiloxM4x32A, ctr[0], lo0, hi0);
  mulhilo(kPhiloxM4x32B, ctr[2], lo1, hi1);
  const std::array<std::uint32_t, 4> out = {hi1 ^ ctr[1] ^ key[0], lo1,
                                            hi0 ^ ctr[3] ^ key[1], lo0};
  ctr = out;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    philox_round(counter, key);
    if (round < 9) {
      key[0] += kPhiloxW32A;
      key[1] += kPhiloxW32B;
    }
  }
  return counter;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
  return mix64(master ^ mix64(id));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id1, std::uint64_t id2) {
  return derive_seed(derive_seed(master, id1), id2);
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t path_index)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      path_{static_cast<std::uint32_t>(path_index),
            static_cast<std::uint32_t>(path_index >> 32)} {}

std::uint64_t PathStream::next_u64() {
  if (lane_ == 2) {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_),
                                              static_cast<std::uint32_t>(block_ >> 32),
                                              path_[0], path_[1]};
    buffer_ = philox4x32(ctr, key_);
    ++block_;
    lane_ = 0;
  }
  const std::uint64_t lo = buffer_[2 * lane_];
  const std::uint64_t hi = buffer_[2 * lane_ + 1];
  ++lane_;
  return (hi << 32) | lo;
}

double PathStream::uniform() {
  // 53 significant bits, shifted to the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double PathStream::normal() { return stats::normal_quantile_fast(uniform()); }

}  // namespace sderates::rng
