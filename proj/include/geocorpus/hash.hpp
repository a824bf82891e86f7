#pragma once

#include <cstdint>
#include <string_view>

namespace geocorpus {

// Seed shared by every component that must agree on bucket identity
// (feature hashing, dedup digests, split assignment).
inline constexpr std::uint64_t kDefaultHashSeed = 1000003;

// Seeded FNV-1a with a splitmix-style finalizer. Byte-order independent,
// stable across platforms, runs and thread counts.
inline std::uint64_t stable_hash64(std::string_view data, std::uint64_t seed = kDefaultHashSeed) {
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 31;
  return h;
}

// Deterministic counter-based generator: hash a tuple of indices to one
// 64-bit word. Used for dropout masks and sampling so results do not depend
// on how work is split across threads.
inline std::uint64_t mix_counters(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                                  std::uint64_t d = 0) {
  std::uint64_t h = a * 0x9E3779B97F4A7C15ULL;
  auto round = [&h](std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
  };
  round(b);
  round(c);
  round(d);
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 32;
  return h;
}

// Maps a 64-bit hash to [0,1).
inline double unit_real(std::uint64_t h) {
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace geocorpus
