#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace whimp {

// 64-bit finalizer (splitmix64 / Stafford mix13). Full avalanche, so
// feeding it a chain of words gives a usable keyed hash.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Hash of (seed, a, b, lane) with no state. Every consumer of shared
// randomness goes through this so that workers agree without
// communication.
constexpr std::uint64_t key_hash(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b, std::uint64_t lane) noexcept {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (a + kGolden));
  h = mix64(h ^ (b + kGolden));
  return mix64(h ^ (lane + kGolden));
}

inline double to_unit_open(std::uint64_t w) noexcept {
  // (0, 1]: never 0, safe under log().
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

inline double to_unit_half_open(std::uint64_t w) noexcept {
  // [0, 1)
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

struct gaussian_key {
  std::uint64_t seed;
  std::uint64_t row;
  std::uint64_t bit;
};

// Row-major half of the key hash; lets the sketch inner loop pay two
// mixes per bit instead of four.
struct gaussian_row_ctx {
  std::uint64_t h;

  gaussian_row_ctx(std::uint64_t seed, std::uint64_t row) noexcept {
    h = mix64(seed + kGolden);
    h = mix64(h ^ (row + kGolden));
  }

  double at_bit(std::uint64_t bit) const noexcept {
    const std::uint64_t hb = mix64(h ^ (bit + kGolden));
    const double u1 = to_unit_open(mix64(hb ^ kGolden));
    const double u2 = to_unit_half_open(mix64(hb ^ (1 + kGolden)));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
};

// Standard-normal variate as a pure function of the key (Box-Muller over
// two hashed uniforms). Same key, same value, on every worker.
inline double gaussian_at(const gaussian_key& k) noexcept {
  return gaussian_row_ctx(k.seed, k.row).at_bit(k.bit);
}

// Small deterministic stream generator (splitmix64). One instance per
// logical stream; never shared between workers.
class splitmix64 {
 public:
  explicit splitmix64(std::uint64_t state) noexcept : state_(state) {}

  std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  double next_double() noexcept { return to_unit_half_open(next()); }

  // Unbiased-enough bounded draw via 128-bit multiply-shift.
  std::uint32_t below(std::uint32_t bound) noexcept {
    const auto wide =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
    return static_cast<std::uint32_t>(wide >> 64);
  }

 private:
  std::uint64_t state_;
};

// Labeled substream derivation: (seed, tag, index) -> generator.
inline splitmix64 derive_stream(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t index) noexcept {
  return splitmix64(key_hash(seed, tag, index, 2));
}

}  // namespace whimp
