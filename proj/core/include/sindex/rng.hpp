#pragma once

#include <array>
#include <cstdint>

namespace sindex {

// Counter-based generator: Philox4x32-10 (Salmon, Moraes, Dror, Shaw 2011).
// Keyed on a 64-bit seed, with a 64-bit stream id occupying the high half of
// the 128-bit counter. Streams never overlap and the mapping seed -> output
// is fixed by the algorithm, so seeds are portable across implementations.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                            const std::array<std::uint32_t, 2>& key);
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double gaussian();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_;
  int buffer_pos_;
  double cached_gaussian_;
  bool has_cached_gaussian_;
};

// Seed splitting for replicate streams: splitmix64 finalizer applied to
// (base, a, b). Used by the harness so that every (cell, replicate) pair has
// its own reproducible stream regardless of worker count.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

}  // namespace sindex
