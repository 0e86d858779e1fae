#pragma once

#include <cstdint>
#include <random>

namespace arrec {

/// SplitMix64 finalizer. Used to turn (seed, index) pairs into well-separated
/// engine seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of substream `index` under `seed`. Pure function of its arguments, so
/// replica results never depend on which worker ran them.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// A seeded random stream. All sampling in the library takes one of these
// explicitly; there is no global generator.
class Stream {
 public:
  using engine_type = std::mt19937_64;

  explicit Stream(std::uint64_t seed);

  Stream child(std::uint64_t index) const { return Stream(derive_seed(seed_, index)); }
  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  engine_type& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

}  // namespace arrec
