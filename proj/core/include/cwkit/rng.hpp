#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace cwkit {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for a named purpose (directions, reference sample, ...).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept;

/**
 * Counter-based random stream.
 *
 * The k-th 64-bit word of stream `id` under `seed` depends only on
 * (seed, id, k), so work split across items (one stream per direction, per
 * sample row, per rejection draw) reproduces bit-for-bit under any schedule.
 * Normal variates use Box-Muller on the stream's own uniforms, keeping results
 * independent of the standard library's distribution implementations.
 */
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t id) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

}  // namespace cwkit
