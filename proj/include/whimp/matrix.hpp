#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "whimp/errors.hpp"

namespace whimp {

struct edge {
  std::uint32_t src;
  std::uint32_t dst;
  double weight;
};

enum class edge_format { pair, weighted_triple, any };

// Edge list with a dense id dictionary assigned in first-seen order.
struct raw_graph {
  std::vector<std::string> ids;  // dense index -> external id
  std::unordered_map<std::string, std::uint32_t> id_index;
  std::vector<edge> edges;
  std::size_t dropped_zero_weight = 0;

  std::uint32_t intern(std::string_view id) {
    auto it = id_index.find(std::string(id));
    if (it != id_index.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(ids.size());
    ids.emplace_back(id);
    id_index.emplace(ids.back(), idx);
    return idx;
  }

  std::size_t n_vertices() const { return ids.size(); }
  std::size_t n_edges() const { return edges.size(); }
};

namespace detail {

inline double parse_weight(std::string_view field, std::size_t line_no) {
  double w = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, w);
  if (ec != std::errc{} || ptr != end || !std::isfinite(w))
    throw validation_error("line " + std::to_string(line_no) +
                           ": malformed weight '" + std::string(field) + "'");
  if (w < 0.0)
    throw validation_error("line " + std::to_string(line_no) +
                           ": negative weight " + std::string(field));
  return w;
}

inline std::uint64_t edge_key(std::uint32_t src, std::uint32_t dst) {
  return (static_cast<std::uint64_t>(src) << 32) | dst;
}

}  // namespace detail

// Parse "src<TAB>dst" or "src<TAB>dst<TAB>weight" lines. Zero weights are
// dropped (and counted); negative weights and duplicate (src, dst) pairs
// are errors.
inline raw_graph ingest_edge_list(std::istream& in,
                                  edge_format format = edge_format::any) {
  raw_graph g;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    const auto t1 = sv.find('\t');
    if (t1 == std::string_view::npos)
      throw validation_error("line " + std::to_string(line_no) +
                             ": expected tab-separated fields");
    const auto t2 = sv.find('\t', t1 + 1);
    const std::string_view src_id = sv.substr(0, t1);
    std::string_view dst_id;
    double w = 1.0;
    if (t2 == std::string_view::npos) {
      if (format == edge_format::weighted_triple)
        throw validation_error("line " + std::to_string(line_no) +
                               ": expected 3 fields");
      dst_id = sv.substr(t1 + 1);
    } else {
      if (format == edge_format::pair)
        throw validation_error("line " + std::to_string(line_no) +
                               ": expected 2 fields");
      dst_id = sv.substr(t1 + 1, t2 - t1 - 1);
      w = detail::parse_weight(sv.substr(t2 + 1), line_no);
    }
    if (src_id.empty() || dst_id.empty())
      throw validation_error("line " + std::to_string(line_no) +
                             ": empty vertex id");
    const auto s = g.intern(src_id);
    const auto d = g.intern(dst_id);
    if (!seen.insert(detail::edge_key(s, d)).second)
      throw validation_error("line " + std::to_string(line_no) +
                             ": duplicate edge " + std::string(src_id) + " -> " +
                             std::string(dst_id));
    if (w == 0.0) {
      ++g.dropped_zero_weight;
      continue;
    }
    g.edges.push_back({s, d, w});
  }
  return g;
}

// Drop all out-edges of vertices whose outdegree exceeds the cap. The
// vertex itself stays in the dictionary.
inline raw_graph clean_degree_cap(const raw_graph& g, std::size_t cap) {
  if (cap < 1) throw validation_error("degree cap must be >= 1");
  std::vector<std::size_t> outdeg(g.n_vertices(), 0);
  for (const auto& e : g.edges) ++outdeg[e.src];
  raw_graph out;
  out.ids = g.ids;
  out.id_index = g.id_index;
  out.dropped_zero_weight = g.dropped_zero_weight;
  for (const auto& e : g.edges)
    if (outdeg[e.src] <= cap) out.edges.push_back(e);
  return out;
}

struct matrix_entry {
  std::uint32_t index;  // row index in column view, column index in row view
  double value;
};

enum class orientation { in_neighborhood, out_neighborhood };

// Column-normalized sparse matrix, stored both column-major (CSC) and
// row-major (CSR). Columns hold normalized values; column_l2_norms keeps
// the pre-normalization norms. Immutable once built.
class sparse_column_matrix {
 public:
  static sparse_column_matrix from_graph(const raw_graph& g,
                                         orientation orient) {
    const auto n = g.n_vertices();
    std::vector<std::vector<matrix_entry>> cols(n);
    for (const auto& e : g.edges) {
      if (orient == orientation::in_neighborhood)
        cols[e.dst].push_back({e.src, e.weight});
      else
        cols[e.src].push_back({e.dst, e.weight});
    }
    sparse_column_matrix m = from_columns(n, cols);
    m.external_ids_ = g.ids;
    return m;
  }

  // d rows; columns given as (row, value>0) lists in any order.
  static sparse_column_matrix from_columns(
      std::size_t d, const std::vector<std::vector<matrix_entry>>& columns) {
    sparse_column_matrix m;
    m.n_rows_ = d;
    m.n_cols_ = columns.size();
    m.col_ptr_.assign(m.n_cols_ + 1, 0);
    m.column_l2_norms_.assign(m.n_cols_, 0.0);
    m.row_l1_norms_.assign(d, 0.0);
    for (std::size_t j = 0; j < m.n_cols_; ++j)
      m.col_ptr_[j + 1] = m.col_ptr_[j] + columns[j].size();
    m.col_entries_.resize(m.col_ptr_.back());
    for (std::size_t j = 0; j < m.n_cols_; ++j) {
      auto* out = m.col_entries_.data() + m.col_ptr_[j];
      double sq = 0.0;
      for (std::size_t k = 0; k < columns[j].size(); ++k) {
        const auto& e = columns[j][k];
        if (!(e.value > 0.0))
          throw validation_error("matrix entries must be strictly positive");
        if (e.index >= d) throw validation_error("row index out of range");
        out[k] = e;
        sq += e.value * e.value;
      }
      std::sort(out, out + columns[j].size(),
                [](const matrix_entry& a, const matrix_entry& b) {
                  return a.index < b.index;
                });
      for (std::size_t k = 1; k < columns[j].size(); ++k)
        if (out[k].index == out[k - 1].index)
          throw validation_error("duplicate row index in column " +
                                 std::to_string(j));
      const double norm = std::sqrt(sq);
      m.column_l2_norms_[j] = norm;
      for (std::size_t k = 0; k < columns[j].size(); ++k) {
        out[k].value /= norm;
        m.row_l1_norms_[out[k].index] += out[k].value;
      }
    }
    m.build_rows();
    return m;
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return col_entries_.size(); }

  std::span<const matrix_entry> column(std::size_t j) const {
    return {col_entries_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  std::span<const matrix_entry> row(std::size_t r) const {
    return {row_entries_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  double column_l2_norm(std::size_t j) const { return column_l2_norms_[j]; }
  double row_l1_norm(std::size_t r) const { return row_l1_norms_[r]; }
  bool column_empty(std::size_t j) const {
    return col_ptr_[j + 1] == col_ptr_[j];
  }

  const std::vector<std::string>& external_ids() const { return external_ids_; }

  std::string external_id(std::size_t j) const {
    return external_ids_.empty() ? std::to_string(j) : external_ids_[j];
  }

  // Exact dot product of two normalized columns (sorted-merge).
  double dot(std::size_t a, std::size_t b) const {
    const auto ca = column(a);
    const auto cb = column(b);
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ca.size() && j < cb.size()) {
      if (ca[i].index < cb[j].index)
        ++i;
      else if (ca[i].index > cb[j].index)
        ++j;
      else
        acc += ca[i++].value * cb[j++].value;
    }
    return acc;
  }

 private:
  void build_rows() {
    row_ptr_.assign(n_rows_ + 1, 0);
    for (const auto& e : col_entries_) ++row_ptr_[e.index + 1];
    for (std::size_t r = 0; r < n_rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
    row_entries_.resize(col_entries_.size());
    std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    for (std::size_t j = 0; j < n_cols_; ++j)
      for (const auto& e : column(j))
        row_entries_[cursor[e.index]++] = {static_cast<std::uint32_t>(j),
                                           e.value};
  }

  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<matrix_entry> col_entries_;  // (row, normalized value)
  std::vector<std::size_t> row_ptr_;
  std::vector<matrix_entry> row_entries_;  // (col, normalized value)
  std::vector<double> column_l2_norms_;
  std::vector<double> row_l1_norms_;
  std::vector<std::string> external_ids_;
};

inline sparse_column_matrix build_column_matrix(const raw_graph& g,
                                                orientation orient) {
  return sparse_column_matrix::from_graph(g, orient);
}

}  // namespace whimp
