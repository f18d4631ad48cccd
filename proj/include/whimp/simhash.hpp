#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "whimp/errors.hpp"
#include "whimp/matrix.hpp"
#include "whimp/rng.hpp"

namespace whimp {

// ell-bit SimHash signature, packed 64 bits per word, plus the column's
// pre-normalization L2 norm.
struct sketch {
  std::vector<std::uint64_t> words;
  std::uint32_t length = 0;
  double l2_norm = 0.0;

  bool bit(std::uint32_t i) const {
    return (words[i >> 6] >> (i & 63)) & 1ULL;
  }
};

// Sign of the column's projection onto ell pseudo-random Gaussian
// directions. The accumulation visits non-zeros in ascending row order so
// the result is bit-identical under any parallel schedule. sgn(0) = +1.
inline sketch compute_sketch(std::span<const matrix_entry> column,
                             std::uint32_t ell, std::uint64_t seed,
                             double l2_norm = 1.0) {
  if (column.empty()) throw validation_error("cannot sketch an empty column");
  if (ell < 1) throw validation_error("sketch length must be >= 1");
  sketch s;
  s.length = ell;
  s.l2_norm = l2_norm;
  s.words.assign((ell + 63) / 64, 0);
  std::vector<double> acc(ell, 0.0);
  for (const auto& e : column) {
    const gaussian_row_ctx ctx(seed, e.index);
    for (std::uint32_t i = 0; i < ell; ++i) acc[i] += ctx.at_bit(i) * e.value;
  }
  for (std::uint32_t i = 0; i < ell; ++i)
    if (acc[i] >= 0.0) s.words[i >> 6] |= 1ULL << (i & 63);
  return s;
}

inline std::uint32_t hamming(const sketch& a, const sketch& b) {
  if (a.length != b.length)
    throw validation_error("sketch length mismatch: " +
                           std::to_string(a.length) + " vs " +
                           std::to_string(b.length));
  std::uint32_t d = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w)
    d += static_cast<std::uint32_t>(std::popcount(a.words[w] ^ b.words[w]));
  return d;
}

// est = |a| |b| cos(pi * Delta / ell)
inline double estimate_dot(const sketch& a, const sketch& b, double norm_a,
                           double norm_b) {
  const auto delta = hamming(a, b);
  return norm_a * norm_b *
         std::cos(std::numbers::pi * static_cast<double>(delta) /
                  static_cast<double>(a.length));
}

// ell ~= 10 / delta^2 with delta = 1/2 - arccos(tau)/pi.
inline std::uint32_t sketch_length_heuristic(double tau) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw validation_error("tau must be in (0, 1)");
  const double delta = 0.5 - std::acos(tau) / std::numbers::pi;
  return static_cast<std::uint32_t>(std::llround(10.0 / (delta * delta)));
}

// Round 1 over a whole matrix: one sketch per non-empty column, computed
// in parallel over disjoint column ranges. Empty columns get a
// placeholder (length 0) that the engine never touches.
inline std::vector<sketch> compute_sketches(const sparse_column_matrix& m,
                                            std::uint32_t ell,
                                            std::uint64_t seed,
                                            unsigned workers = 1) {
  std::vector<sketch> out(m.n_cols());
  const auto task = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      if (!m.column_empty(j))
        out[j] = compute_sketch(m.column(j), ell, seed, m.column_l2_norm(j));
  };
  if (workers <= 1 || m.n_cols() < 2) {
    task(0, m.n_cols());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (m.n_cols() + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    if (begin >= m.n_cols()) break;
    pool.emplace_back(task, begin, std::min(begin + chunk, m.n_cols()));
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace whimp
