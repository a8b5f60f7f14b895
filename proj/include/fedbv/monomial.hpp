#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace fedbv {

// Up to 8 commuting variables, one byte of exponent each, packed little-endian.
inline constexpr int kMaxVars = 8;
using Mono = std::uint64_t;

constexpr int mono_get(Mono m, int i) { return static_cast<int>((m >> (8 * i)) & 0xFFu); }

constexpr Mono mono_unit(int i, int e = 1) { return static_cast<Mono>(e) << (8 * i); }

constexpr int mono_degree(Mono m) {
  int d = 0;
  for (int i = 0; i < kMaxVars; ++i) d += mono_get(m, i);
  return d;
}

constexpr bool mono_divides(Mono b, Mono a) {
  for (int i = 0; i < kMaxVars; ++i)
    if (mono_get(b, i) > mono_get(a, i)) return false;
  return true;
}

// Caller guarantees no byte overflows (exponents stay below 256).
constexpr Mono mono_mul(Mono a, Mono b) { return a + b; }
constexpr Mono mono_div(Mono a, Mono b) { return a - b; }

inline Mono mono_from(const std::array<int, kMaxVars>& e) {
  Mono m = 0;
  for (int i = 0; i < kMaxVars; ++i) {
    if (e[i] < 0 || e[i] > 255) throw std::out_of_range("exponent out of range");
    m |= mono_unit(i, e[i]);
  }
  return m;
}

// Odd generators live in a 16-bit mask; bit i is generator i.
using OddMask = std::uint16_t;

constexpr int popcount(unsigned v) { return __builtin_popcount(v); }

// Number of set bits of mask strictly below position i.
constexpr int bits_below(unsigned mask, int i) { return popcount(mask & ((1u << i) - 1u)); }

// Sign of the shuffle that sorts A·B where A, B are ascending and disjoint.
constexpr int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (unsigned rest = b; rest; rest &= rest - 1) {
    int j = __builtin_ctz(rest);
    inv += popcount(a >> (j + 1));
  }
  return (inv & 1) ? -1 : 1;
}

}  // namespace fedbv
