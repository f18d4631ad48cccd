#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "whimp/errors.hpp"
#include "whimp/matrix.hpp"
#include "whimp/rng.hpp"

namespace whimp {

// Alias-method sampler over one row's non-zero columns: column a is
// returned with probability value_a / l1_norm, in O(1) per draw.
class row_sampler {
 public:
  row_sampler() = default;

  explicit row_sampler(std::span<const matrix_entry> row_entries) {
    const std::size_t k = row_entries.size();
    if (k == 0) return;  // inert
    cols_.resize(k);
    prob_.resize(k);
    alias_.assign(k, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(row_entries[i].value > 0.0))
        throw validation_error("row sampler requires strictly positive values");
      cols_[i] = row_entries[i].index;
      total += row_entries[i].value;
    }
    l1_norm_ = total;
    // Standard two-worklist alias construction.
    std::vector<std::uint32_t> small, large;
    const double kd = static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
      prob_[i] = row_entries[i].value * kd / total;
      (prob_[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      const auto l = large.back();
      small.pop_back();
      large.pop_back();
      alias_[s] = l;
      prob_[l] -= 1.0 - prob_[s];
      (prob_[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftover slots are within floating-point dust of 1; pin them so no
    // draw can fall through to an unset alias.
    for (const auto i : small) prob_[i] = 1.0;
    for (const auto i : large) prob_[i] = 1.0;
  }

  bool inert() const { return cols_.empty(); }
  double l1_norm() const { return l1_norm_; }
  std::size_t support_size() const { return cols_.size(); }

  std::uint32_t sample(splitmix64& rng) const {
    if (inert()) throw internal_error("sample() on an inert row sampler");
    const auto slot = rng.below(static_cast<std::uint32_t>(cols_.size()));
    const double u = rng.next_double();
    return u < prob_[slot] ? cols_[slot] : cols_[alias_[slot]];
  }

 private:
  std::vector<std::uint32_t> cols_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  double l1_norm_ = 0.0;
};

inline row_sampler build_row_sampler(std::span<const matrix_entry> row) {
  return row_sampler(row);
}

// w_r = |A_{r,*}|_1 |B_{r,*}|_1 over normalized values. Summed over rows
// this equals |A^T B|_1 for non-negative matrices.
inline double wedge_weight(std::size_t r, const sparse_column_matrix& a,
                           const sparse_column_matrix& b) {
  return a.row_l1_norm(r) * b.row_l1_norm(r);
}

}  // namespace whimp
