#pragma once

#include <array>
#include <cstdint>

namespace sderates::rng {

// Philox4x32-10 block function (Salmon et al., SC 2011). Counter-based:
// the output is a pure function of (counter, key), so any path/draw can be
// generated independently and in any order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Mix a 64-bit value (splitmix64 finalizer). Used to derive sub-seeds.
std::uint64_t mix64(std::uint64_t z);

// Chains sub-stream ids onto a master seed: derive_seed(s, a, b) != derive_seed(s, b, a).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id1, std::uint64_t id2);

// Stream of doubles for one (seed, path) pair. Consuming the k-th draw of a
// path never depends on other paths, which makes parallel fills bit-identical
// to serial ones.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path_index);

  // Uniform on (0,1), both endpoints excluded.
  double uniform();

  // Standard normal via inverse CDF (one uniform per normal).
  double normal();

 private:
  std::uint64_t next_u64();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> path_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int lane_ = 2;  // 2 u64 lanes per block; start exhausted
};

}  // namespace sderates::rng
