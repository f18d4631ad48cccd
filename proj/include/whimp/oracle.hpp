#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "whimp/engine.hpp"
#include "whimp/errors.hpp"
#include "whimp/matrix.hpp"
#include "whimp/rng.hpp"

namespace whimp {

struct truth_pair {
  std::uint32_t a;
  std::uint32_t b;  // sampled column
  double exact_dot;
};

struct ground_truth {
  std::vector<std::uint32_t> sample;  // sorted sampled column indices
  std::vector<truth_pair> pairs;      // exact_dot >= tau_min, a != b in self-join
  double tau_min = 0.0;
  bool self_join = true;
};

// Stratified column sample: buckets by non-zero count in [10^i, 10^{i+1}),
// min(per_bucket, bucket size) uniform draws per bucket without
// replacement. Deterministic per seed.
inline std::vector<std::uint32_t> stratified_sample(
    const sparse_column_matrix& m, std::size_t per_bucket, std::uint64_t seed) {
  if (per_bucket < 1) throw validation_error("per_bucket must be >= 1");
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> buckets;
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    const auto deg = m.column(j).size();
    if (deg == 0) continue;
    std::uint32_t bucket = 0;
    for (std::size_t p = 10; p <= deg; p *= 10) ++bucket;
    buckets[bucket].push_back(static_cast<std::uint32_t>(j));
  }
  if (buckets.empty()) throw validation_error("all columns are empty");
  std::vector<std::uint32_t> out;
  std::vector<std::uint32_t> keys;
  for (const auto& [b, cols] : buckets) keys.push_back(b);
  std::sort(keys.begin(), keys.end());
  for (const auto b : keys) {
    auto& cols = buckets[b];
    auto rng = derive_stream(seed, /*tag=*/0x5742, b);
    // Partial Fisher-Yates; hand-rolled so the draw sequence does not
    // depend on the standard library.
    const std::size_t take = std::min(per_bucket, cols.size());
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + rng.below(static_cast<std::uint32_t>(cols.size() - i));
      std::swap(cols[i], cols[j]);
      out.push_back(cols[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Exact dot products of every column of A against each sampled column of
// B, by indexed sparse traversal; keeps pairs with dot >= tau_min.
inline ground_truth exact_products(const sparse_column_matrix& a,
                                   const sparse_column_matrix& b,
                                   const std::vector<std::uint32_t>& sample,
                                   double tau_min, bool self_join = true) {
  if (!(tau_min > 0.0)) throw validation_error("tau_min must be > 0");
  ground_truth truth;
  truth.sample = sample;
  truth.tau_min = tau_min;
  truth.self_join = self_join;
  std::vector<double> acc(a.n_cols(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto col_b : sample) {
    touched.clear();
    for (const auto& e : b.column(col_b)) {
      for (const auto& f : a.row(e.index)) {
        if (acc[f.index] == 0.0) touched.push_back(f.index);
        acc[f.index] += e.value * f.value;
      }
    }
    for (const auto col_a : touched) {
      if (!(self_join && col_a == col_b) && acc[col_a] >= tau_min)
        truth.pairs.push_back({col_a, col_b, acc[col_a]});
      acc[col_a] = 0.0;
    }
  }
  return truth;
}

struct per_column_pr {
  std::uint32_t column;
  double precision;
  double recall;
  double min_pr;
};

struct curve_point {
  double sigma;
  double precision;
  double recall;
};

struct eval_report {
  double precision = 1.0;
  double recall = 1.0;
  bool empty_output = false;  // |S| = 0; precision 1.0 by convention
  bool empty_truth = false;   // |H_tau| = 0; recall 1.0 by convention
  std::size_t n_output = 0;   // |S| restricted to sampled columns
  std::size_t n_truth = 0;    // |H_tau|
  std::size_t n_hit = 0;      // |H_tau intersect S|
  std::vector<per_column_pr> per_column;
  std::vector<curve_point> curve;
};

namespace detail {

inline std::uint64_t canon_key(std::uint32_t a, std::uint32_t b,
                               bool self_join) {
  if (self_join && a > b) std::swap(a, b);
  return pair_key(a, b);
}

}  // namespace detail

// Precision/recall of an output set against sampled ground truth, plus the
// per-column min(P, R) histogram. Output pairs not touching a sampled
// column are ignored; columns with empty truth and empty output are
// skipped in the histogram.
inline eval_report precision_recall(const std::vector<candidate>& output,
                                    const ground_truth& truth, double tau) {
  if (tau < truth.tau_min)
    throw validation_error("tau below ground truth tau_min; truth too coarse");
  const std::unordered_set<std::uint32_t> sampled(truth.sample.begin(),
                                                  truth.sample.end());
  std::unordered_set<std::uint64_t> h_tau;
  std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> h_by_col;
  for (const auto& p : truth.pairs) {
    if (p.exact_dot < tau) continue;
    const auto key = detail::canon_key(p.a, p.b, truth.self_join);
    if (h_tau.insert(key).second) {
      h_by_col[p.b].push_back(key);
      if (sampled.count(p.a)) h_by_col[p.a].push_back(key);
    }
  }
  std::unordered_set<std::uint64_t> s_set;
  std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> s_by_col;
  for (const auto& c : output) {
    const bool a_in = sampled.count(c.a) != 0;
    const bool b_in = sampled.count(c.b) != 0;
    if (!a_in && !b_in) continue;
    const auto key = detail::canon_key(c.a, c.b, truth.self_join);
    if (s_set.insert(key).second) {
      if (b_in) s_by_col[c.b].push_back(key);
      if (a_in && c.a != c.b) s_by_col[c.a].push_back(key);
    }
  }

  eval_report rep;
  rep.n_output = s_set.size();
  rep.n_truth = h_tau.size();
  for (const auto key : s_set) rep.n_hit += h_tau.count(key);
  rep.empty_output = s_set.empty();
  rep.empty_truth = h_tau.empty();
  rep.precision = s_set.empty()
                      ? 1.0
                      : static_cast<double>(rep.n_hit) / s_set.size();
  rep.recall = h_tau.empty()
                   ? 1.0
                   : static_cast<double>(rep.n_hit) / h_tau.size();

  for (const auto col : truth.sample) {
    const auto h_it = h_by_col.find(col);
    const auto s_it = s_by_col.find(col);
    const std::size_t h_n = h_it == h_by_col.end() ? 0 : h_it->second.size();
    const std::size_t s_n = s_it == s_by_col.end() ? 0 : s_it->second.size();
    if (h_n == 0 && s_n == 0) continue;
    // Only hits against this column's own truth pairs count.
    std::size_t hit = 0;
    if (s_n > 0 && h_n > 0) {
      const std::unordered_set<std::uint64_t> own(h_it->second.begin(),
                                                  h_it->second.end());
      for (const auto key : s_it->second) hit += own.count(key);
    }
    const double p = s_n == 0 ? 1.0 : static_cast<double>(hit) / s_n;
    const double r = h_n == 0 ? 1.0 : static_cast<double>(hit) / h_n;
    rep.per_column.push_back({col, p, r, std::min(p, r)});
  }
  return rep;
}

// PR metrics at each sigma in the grid, over the sigma-filtered output.
inline std::vector<curve_point> pr_curve(const std::vector<candidate>& output,
                                         const ground_truth& truth, double tau,
                                         const std::vector<double>& sigma_grid) {
  std::vector<curve_point> curve;
  std::vector<candidate> filtered;
  for (const double sigma : sigma_grid) {
    filtered.clear();
    for (const auto& c : output)
      if (c.est >= sigma) filtered.push_back(c);
    const auto rep = precision_recall(filtered, truth, tau);
    curve.push_back({sigma, rep.precision,
                     rep.empty_truth ? 1.0 : rep.recall});
  }
  return curve;
}

inline std::vector<double> default_sigma_grid(double tau,
                                              std::size_t points = 24) {
  std::vector<double> grid(points);
  const double lo = tau / 2.0;
  const double hi = 1.5 * tau;
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(points - 1);
  return grid;
}

// DISCO-style wedge shuffle estimate: every wedge is shipped, so cost is
// bytes_per_wedge * (wedges per unit of |A^T B|_1) * |A^T B|_1 / tau.
inline double disco_shuffle_estimate(double atb_l1, double tau,
                                     double bytes_per_wedge = 16.0,
                                     double wedges_per_unit = 50.0) {
  if (!(tau > 0.0)) throw validation_error("tau must be > 0");
  if (atb_l1 < 0.0) throw validation_error("|A^T B|_1 must be >= 0");
  return bytes_per_wedge * wedges_per_unit * atb_l1 / tau;
}

struct lsh_estimate {
  double exponent;  // 1 + ln(P1)/ln(P2)
  double bytes;     // n^exponent
};

// Closed-form LSH storage floor: P1 = 1 - arccos(tau)/pi, P2 = 1/2.
inline lsh_estimate lsh_storage_estimate(double n, double tau) {
  if (!(n >= 1.0)) throw validation_error("n must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw validation_error("tau must be in (0, 1)");
  const double p1 = 1.0 - std::acos(tau) / std::numbers::pi;
  const double exponent = 1.0 + std::log(p1) / std::log(0.5);
  return {exponent, std::pow(n, exponent)};
}

}  // namespace whimp
