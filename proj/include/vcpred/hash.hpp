#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace vcpred {

/// FNV-1a 64-bit. Stable across runs and platforms (unlike std::hash).
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string to_hex(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Content key used for prompt hashes and embedding-cache entries.
/// 64-bit FNV plus length: collisions are negligible at pipeline scale.
inline std::string content_hash(std::string_view s) {
  return to_hex(fnv1a64(s)) + "-" + std::to_string(s.size());
}

/// splitmix64, used to derive independent sub-seeds from one run seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vcpred
