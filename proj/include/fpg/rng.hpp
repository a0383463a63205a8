#pragma once

#include <cstdint>

namespace fpg {

/// Deterministic counter-based random stream.
///
/// The core is the splitmix64 finalizer over an additive counter, so the raw
/// 64-bit sequence is a pure function of the seed and is identical across
/// runs and platforms (no libc distribution objects are involved; normals
/// come from an explicit Box-Muller transform over stream uniforms).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal.  Box-Muller produces values in pairs; the second value
  /// is cached and returned by the next call.
  double normal();

  /// Derived child stream.  A pure function of (seed, key) — independent of
  /// how many draws the parent has made — so parallel fan-out over keys
  /// 0..k-1 is reproducible regardless of scheduling.
  RngStream split(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace fpg
