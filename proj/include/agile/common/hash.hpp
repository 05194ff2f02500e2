#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agile {

/// 64-bit FNV-1a; used for content fingerprints, not for security.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

inline std::string fingerprint(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

} // namespace agile
