#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>

namespace roboinspect {

// Stable 64-bit FNV-1a. Used for seeds and digests that must not depend on
// the standard library implementation.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
  static constexpr std::uint64_t kPrime = 0x00000100000001b3ull;

  constexpr Fnv1a64& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr Fnv1a64& update(std::uint64_t value) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (value >> (8 * i)) & 0xffu;
      state_ *= kPrime;
    }
    return *this;
  }

  // Field separator so that ("ab","c") and ("a","bc") hash differently.
  constexpr Fnv1a64& separator() noexcept { return update(std::string_view("\x1f", 1)); }

  constexpr std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  return Fnv1a64{}.update(bytes).digest();
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace roboinspect
