#pragma once

#include <bit>
#include <cstdint>

namespace ecosim {

/// 16-bit brain-float: 1 sign, 8 exponent and 7 mantissa bits. Stored as the
/// upper half of an IEEE-754 binary32.
using bf16_bits = std::uint16_t;

/// Round-to-nearest-even conversion. NaN stays NaN.
inline bf16_bits to_bf16(float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  if ((bits & 0x7F800000u) == 0x7F800000u && (bits & 0x007FFFFFu) != 0) {
    return static_cast<bf16_bits>((bits >> 16) | 0x0040u);
  }
  const std::uint32_t rounding = 0x7FFFu + ((bits >> 16) & 1u);
  return static_cast<bf16_bits>((bits + rounding) >> 16);
}

inline float from_bf16(bf16_bits value) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(value) << 16);
}

inline float quantize_bf16(float value) { return from_bf16(to_bf16(value)); }

}  // namespace ecosim
