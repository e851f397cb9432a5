#include "cwkit/rng.hpp"

#include <cmath>
#include <numbers>

namespace cwkit {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) noexcept {
  // FNV-1a over the purpose tag, folded into the seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

Stream::Stream(std::uint64_t seed, std::uint64_t id) noexcept
    : key_(mix64(seed ^ mix64(id ^ 0x5851f42d4c957f2dULL))) {}

std::uint64_t Stream::next_u64() noexcept {
  return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
}

double Stream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform_open() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() noexcept {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

}  // namespace cwkit
