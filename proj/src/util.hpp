#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace wattops::detail {

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// Independent deterministic stream per (seed, purpose) pair.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, const std::string& stream) {
  return std::mt19937_64(seed ^ fnv1a64(stream));
}

}  // namespace wattops::detail
