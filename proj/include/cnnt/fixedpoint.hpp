#pragma once

// Q2.14 fixed-point arithmetic.
//
// A FixedQ sample is a signed 16-bit two's complement integer scaled by 2^-14:
// two integer bits (sign included) and fourteen fractional bits, so the
// representable range is [-2.0, 2.0 - 2^-14].
//
// Products are accumulated without rounding in an Accum at scale 2^-28.
// The only rounding point is reduce(), which narrows an Accum back to FixedQ
// at output writeback.

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace cnnt {

inline constexpr int kFracBits = 14;
inline constexpr std::int32_t kOneRaw = 1 << kFracBits;
inline constexpr std::int16_t kMaxRaw = std::numeric_limits<std::int16_t>::max();
inline constexpr std::int16_t kMinRaw = std::numeric_limits<std::int16_t>::min();

struct FixedQ {
  std::int16_t raw = 0;

  static constexpr FixedQ from_raw(std::int32_t r) { return FixedQ{static_cast<std::int16_t>(r)}; }
  static constexpr FixedQ max() { return FixedQ{kMaxRaw}; }
  static constexpr FixedQ min() { return FixedQ{kMinRaw}; }

  friend constexpr auto operator<=>(FixedQ, FixedQ) = default;
};

struct Accum {
  std::int64_t raw = 0;

  friend constexpr auto operator<=>(Accum, Accum) = default;
};

namespace detail {

constexpr std::int16_t saturate16(std::int64_t v) {
  if (v > kMaxRaw) return kMaxRaw;
  if (v < kMinRaw) return kMinRaw;
  return static_cast<std::int16_t>(v);
}

// floor(v / 2^shift) rounded to nearest, ties to even.
constexpr std::int64_t shift_round_half_even(std::int64_t v, int shift) {
  const std::int64_t unit = std::int64_t{1} << shift;
  const std::int64_t half = unit >> 1;
  std::int64_t q = v >> shift;  // arithmetic shift == floor division
  const std::int64_t rem = v - q * unit;
  if (rem > half || (rem == half && (q & 1) != 0)) ++q;
  return q;
}

}  // namespace detail

/// Rounds x·2^14 to nearest (ties to even) and saturates to the Q2.14 range.
/// Throws std::domain_error for NaN or infinity.
inline FixedQ quantize(double x) {
  if (!std::isfinite(x)) throw std::domain_error("quantize: non-finite input");
  const double scaled = x * static_cast<double>(kOneRaw);  // exact: power-of-two scale
  if (scaled >= static_cast<double>(kMaxRaw)) return FixedQ::max();
  if (scaled <= static_cast<double>(kMinRaw)) return FixedQ::min();
  // nearbyint honours the default FE_TONEAREST mode, which breaks ties to even.
  return FixedQ{static_cast<std::int16_t>(std::nearbyint(scaled))};
}

inline constexpr double dequantize(FixedQ v) {
  return static_cast<double>(v.raw) / static_cast<double>(kOneRaw);
}

inline constexpr double to_double(Accum a) {
  return static_cast<double>(a.raw) / static_cast<double>(std::int64_t{1} << (2 * kFracBits));
}

/// acc + a·b, exact. Overflow of the 64-bit accumulator throws std::overflow_error.
inline Accum mac(Accum acc, FixedQ a, FixedQ b) {
  const std::int64_t product = std::int64_t{a.raw} * std::int64_t{b.raw};
  Accum out;
  if (__builtin_add_overflow(acc.raw, product, &out.raw)) {
    throw std::overflow_error("mac: accumulator overflow");
  }
  return out;
}

/// Widens a FixedQ into accumulator scale (used for bias initialisation).
inline constexpr Accum widen(FixedQ v) { return Accum{std::int64_t{v.raw} << kFracBits}; }

inline constexpr FixedQ reduce(Accum acc) {
  return FixedQ{detail::saturate16(detail::shift_round_half_even(acc.raw, kFracBits))};
}

inline constexpr FixedQ relu_q(FixedQ v) { return v.raw < 0 ? FixedQ{} : v; }

}  // namespace cnnt
