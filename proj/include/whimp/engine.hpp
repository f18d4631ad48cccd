#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "whimp/errors.hpp"
#include "whimp/matrix.hpp"
#include "whimp/rng.hpp"
#include "whimp/simhash.hpp"
#include "whimp/wedges.hpp"

namespace whimp {

struct whimp_config {
  double tau = 0.2;
  std::uint32_t sketch_len = 8192;
  double oversample = 150.0;   // s: wedge samples per unit wedge weight
  double filter_sigma = 0.2;   // sigma; defaults to tau
  std::uint64_t seed = 0;
  bool self_join = true;
  std::optional<double> theory_c;  // when set, overrides ell, s, sigma
  unsigned workers = 1;

  // ell = ceil(c tau^-2 ln n), s = c ln(n)/tau, sigma = tau/2.
  void apply_theory_mode(std::size_t n) {
    if (!theory_c) return;
    const double c = *theory_c;
    const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
    sketch_len = static_cast<std::uint32_t>(std::ceil(c * ln_n / (tau * tau)));
    oversample = c * ln_n / tau;
    filter_sigma = tau / 2.0;
  }

  void validate() const {
    std::string problems;
    const auto add = [&](const std::string& p) {
      if (!problems.empty()) problems += "; ";
      problems += p;
    };
    if (!(tau > 0.0 && tau < 1.0)) add("tau must be in (0, 1)");
    if (sketch_len < 1) add("sketch length must be >= 1");
    if (!(oversample > 0.0)) add("oversample s must be > 0");
    if (!(filter_sigma > 0.0 && filter_sigma <= 1.0))
      add("sigma must be in (0, 1]");
    if (theory_c && !(*theory_c > 0.0)) add("theory c must be > 0");
    if (workers < 1) add("workers must be >= 1");
    if (!problems.empty()) throw validation_error(problems);
  }
};

struct candidate {
  std::uint32_t a;
  std::uint32_t b;
  double est;

  friend bool operator==(const candidate&, const candidate&) = default;
};

struct cost_report {
  std::uint64_t sketch_shuffle_bytes = 0;
  std::uint64_t candidate_shuffle_bytes = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t round1_bytes = 0;
  std::uint64_t round2_bytes = 0;
  std::uint64_t wedges_drawn = 0;
  std::uint64_t candidates_emitted = 0;
  std::uint64_t candidates_after_dedup = 0;
};

struct round_timings {
  double round1_ms = 0.0;
  double round2_ms = 0.0;
  double round3_ms = 0.0;
};

struct run_result {
  std::vector<candidate> output;  // deduplicated, sorted by (a, b)
  cost_report cost;
  round_timings timings;
};

namespace detail {

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

// Round 3 for one dimension: k_r = ceil(s * w_r) draws from the two row
// distributions, SimHash filter at sigma. Self-join draws with a == b are
// discarded but still count as drawn. The rng must be the row's own
// stream so that results are schedule-independent.
inline void generate_candidates_for_row(const row_sampler& sampler_a,
                                        const row_sampler& sampler_b,
                                        const std::vector<sketch>& sketches_a,
                                        const std::vector<sketch>& sketches_b,
                                        const whimp_config& cfg,
                                        splitmix64& rng,
                                        std::vector<candidate>& out,
                                        std::uint64_t& wedges_drawn) {
  const double w_r = sampler_a.l1_norm() * sampler_b.l1_norm();
  if (!(w_r > 0.0)) return;
  const auto k_r = static_cast<std::uint64_t>(std::ceil(cfg.oversample * w_r));
  for (std::uint64_t i = 0; i < k_r; ++i) {
    ++wedges_drawn;
    const auto a = sampler_a.sample(rng);
    const auto b = sampler_b.sample(rng);
    if (cfg.self_join && a == b) continue;
    const double est = estimate_dot(sketches_a[a], sketches_b[b], 1.0, 1.0);
    if (est >= cfg.filter_sigma) out.push_back({a, b, est});
  }
}

inline splitmix64 derive_row_stream(std::uint64_t seed, std::size_t r) {
  return derive_stream(seed, /*round=*/3, r);
}

// Keyed reduction to one record per distinct pair. Self-join keys are
// canonicalized to (min, max). Duplicate emissions must carry identical
// estimates (sketches are deterministic); a mismatch is a bug.
inline std::vector<candidate> deduplicate(const std::vector<candidate>& in,
                                          bool self_join) {
  std::unordered_map<std::uint64_t, double> seen;
  seen.reserve(in.size());
  for (const auto& c : in) {
    auto a = c.a;
    auto b = c.b;
    if (self_join && a > b) std::swap(a, b);
    const auto [it, inserted] = seen.emplace(detail::pair_key(a, b), c.est);
    if (!inserted && it->second != c.est)
      throw internal_error("conflicting estimates for pair (" +
                           std::to_string(a) + ", " + std::to_string(b) + ")");
  }
  std::vector<candidate> out;
  out.reserve(seen.size());
  for (const auto& [key, est] : seen)
    out.push_back({static_cast<std::uint32_t>(key >> 32),
                   static_cast<std::uint32_t>(key & 0xffffffffULL), est});
  std::sort(out.begin(), out.end(), [](const candidate& x, const candidate& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

// Modeled shuffle bytes. A sketch costs ell/8 bytes plus 16 for the norm
// and column index; it is shipped once per row it participates in (per
// side, sides coincide in a self-join). Rounds 1-2 ship the input
// non-zeros at 16 bytes each; candidate records are 24 bytes.
inline cost_report account_costs(const sparse_column_matrix& a,
                                 const sparse_column_matrix& b,
                                 const whimp_config& cfg,
                                 std::uint64_t wedges_drawn,
                                 std::uint64_t candidates_emitted,
                                 std::uint64_t candidates_after_dedup) {
  cost_report r;
  const std::uint64_t sketch_bytes = (cfg.sketch_len + 7) / 8 + 16;
  std::uint64_t shipped = a.nnz();
  if (!cfg.self_join) shipped += b.nnz();
  r.sketch_shuffle_bytes = shipped * sketch_bytes;
  r.round1_bytes = shipped * 16;
  r.round2_bytes = shipped * 16;
  r.candidate_shuffle_bytes = candidates_emitted * 24;
  r.output_bytes = candidates_after_dedup * 24;
  r.wedges_drawn = wedges_drawn;
  r.candidates_emitted = candidates_emitted;
  r.candidates_after_dedup = candidates_after_dedup;
  return r;
}

// The three WHIMP rounds over one or two matrices. Deterministic for a
// fixed (inputs, config, seed) regardless of cfg.workers.
inline run_result run_whimp(const sparse_column_matrix& a,
                            const sparse_column_matrix& b, whimp_config cfg) {
  if (a.n_rows() != b.n_rows())
    throw validation_error("matrices disagree on row dimension");
  cfg.apply_theory_mode(std::max(a.n_cols(), b.n_cols()));
  cfg.validate();

  const auto now = [] { return std::chrono::steady_clock::now(); };
  const auto ms = [](auto t0, auto t1) {
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };
  run_result result;
  auto t0 = now();

  // Round 1: sketches, columns partitioned across workers.
  const auto sketches_a =
      compute_sketches(a, cfg.sketch_len, cfg.seed, cfg.workers);
  const std::vector<sketch>* sketches_b = &sketches_a;
  std::vector<sketch> sketches_b_storage;
  if (!cfg.self_join) {
    sketches_b_storage = compute_sketches(b, cfg.sketch_len, cfg.seed, cfg.workers);
    sketches_b = &sketches_b_storage;
  }

  result.timings.round1_ms = ms(t0, now());
  t0 = now();

  // Round 2: per-dimension samplers, rows partitioned across workers.
  const std::size_t d = a.n_rows();
  std::vector<row_sampler> samplers_a(d);
  std::vector<row_sampler> samplers_b_storage;
  const std::vector<row_sampler>* samplers_b = &samplers_a;
  {
    const auto task = [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        samplers_a[r] = row_sampler(a.row(r));
        if (!cfg.self_join) samplers_b_storage[r] = row_sampler(b.row(r));
      }
    };
    if (!cfg.self_join) samplers_b_storage.resize(d);
    if (cfg.workers <= 1 || d < 2) {
      task(0, d);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (d + cfg.workers - 1) / cfg.workers;
      for (unsigned w = 0; w < cfg.workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= d) break;
        pool.emplace_back(task, begin, std::min(begin + chunk, d));
      }
      for (auto& t : pool) t.join();
    }
    if (!cfg.self_join) samplers_b = &samplers_b_storage;
  }

  result.timings.round2_ms = ms(t0, now());
  t0 = now();

  // Round 3: candidate generation, rows partitioned across workers. Each
  // row uses its own derived stream, so the merge is order-insensitive.
  std::vector<std::vector<candidate>> emitted(cfg.workers);
  std::vector<std::uint64_t> drawn(cfg.workers, 0);
  {
    const auto task = [&](unsigned w, std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        if (samplers_a[r].inert() || (*samplers_b)[r].inert()) continue;
        auto rng = derive_row_stream(cfg.seed, r);
        generate_candidates_for_row(samplers_a[r], (*samplers_b)[r],
                                    sketches_a, *sketches_b, cfg, rng,
                                    emitted[w], drawn[w]);
      }
    };
    if (cfg.workers <= 1 || d < 2) {
      task(0, 0, d);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (d + cfg.workers - 1) / cfg.workers;
      for (unsigned w = 0; w < cfg.workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= d) break;
        pool.emplace_back(task, w, begin, std::min(begin + chunk, d));
      }
      for (auto& t : pool) t.join();
    }
  }

  std::uint64_t wedges_drawn = 0;
  std::uint64_t candidates_emitted = 0;
  std::vector<candidate> all;
  for (unsigned w = 0; w < cfg.workers; ++w) {
    wedges_drawn += drawn[w];
    candidates_emitted += emitted[w].size();
  }
  all.reserve(candidates_emitted);
  for (auto& part : emitted)
    all.insert(all.end(), part.begin(), part.end());

  result.output = deduplicate(all, cfg.self_join);
  result.timings.round3_ms = ms(t0, now());
  result.cost = account_costs(a, b, cfg, wedges_drawn, candidates_emitted,
                              result.output.size());
  return result;
}

inline run_result run_whimp(const sparse_column_matrix& a, whimp_config cfg) {
  cfg.self_join = true;
  return run_whimp(a, a, cfg);
}

}  // namespace whimp
