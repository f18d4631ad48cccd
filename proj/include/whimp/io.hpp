#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "whimp/engine.hpp"
#include "whimp/errors.hpp"
#include "whimp/matrix.hpp"
#include "whimp/oracle.hpp"
#include "whimp/simhash.hpp"

namespace whimp {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path + " for reading");
  return in;
}

// All outputs go through temp-file + rename so partial files never appear
// under the final name.
class atomic_writer {
 public:
  explicit atomic_writer(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp") {
    out_.open(tmp_);
    if (!out_) throw io_error("cannot open " + tmp_ + " for writing");
  }

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw io_error("write failed for " + tmp_);
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw io_error("cannot rename " + tmp_ + " to " + path_);
    committed_ = true;
  }

  ~atomic_writer() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

// FNV-1a over file bytes; used for manifest input/output digests.
inline std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path + " for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_id_dictionary(const raw_graph& g, const std::string& path) {
  atomic_writer w(path);
  for (std::size_t i = 0; i < g.ids.size(); ++i)
    w.stream() << g.ids[i] << '\t' << i << '\n';
  w.commit();
}

inline void write_edges(const raw_graph& g, const std::string& path) {
  atomic_writer w(path);
  for (const auto& e : g.edges)
    w.stream() << g.ids[e.src] << '\t' << g.ids[e.dst] << '\t'
               << fmt_double(e.weight) << '\n';
  w.commit();
}

// Normalized matrix dump: "col<TAB>row<TAB>value" per non-zero.
inline void write_matrix(const sparse_column_matrix& m,
                         const std::string& path) {
  atomic_writer w(path);
  for (std::size_t j = 0; j < m.n_cols(); ++j)
    for (const auto& e : m.column(j))
      w.stream() << j << '\t' << e.index << '\t' << fmt_double(e.value) << '\n';
  w.commit();
}

// Sketch file: header with ell and seed, then one column per line as
// "dense_index<TAB>l2_norm<TAB>hex bits".
inline void write_sketches(const std::vector<sketch>& sketches,
                           std::uint32_t ell, std::uint64_t seed,
                           const std::string& path) {
  atomic_writer w(path);
  w.stream() << "# ell=" << ell << " seed=" << seed << '\n';
  for (std::size_t j = 0; j < sketches.size(); ++j) {
    const auto& s = sketches[j];
    if (s.length == 0) continue;  // empty column, no sketch
    w.stream() << j << '\t' << fmt_double(s.l2_norm) << '\t';
    w.stream() << std::hex << std::setfill('0');
    for (const auto word : s.words)
      w.stream() << std::setw(16) << word;
    w.stream() << std::dec << std::setfill(' ') << '\n';
  }
  w.commit();
}

// Output pairs with external ids, already sorted by (a, b).
inline void write_candidates(const std::vector<candidate>& output,
                             const sparse_column_matrix& m,
                             const std::string& path) {
  atomic_writer w(path);
  for (const auto& c : output)
    w.stream() << m.external_id(c.a) << '\t' << m.external_id(c.b) << '\t'
               << fmt_double(c.est) << '\n';
  w.commit();
}

inline void write_cost_report(const cost_report& cost, const std::string& path,
                              bool tsv) {
  atomic_writer w(path);
  const auto sep = tsv ? '\t' : '=';
  const auto emit = [&](const char* key, std::uint64_t v) {
    w.stream() << key << sep << v << '\n';
  };
  emit("sketch_shuffle_bytes", cost.sketch_shuffle_bytes);
  emit("candidate_shuffle_bytes", cost.candidate_shuffle_bytes);
  emit("output_bytes", cost.output_bytes);
  emit("round1_bytes", cost.round1_bytes);
  emit("round2_bytes", cost.round2_bytes);
  emit("wedges_drawn", cost.wedges_drawn);
  emit("candidates_emitted", cost.candidates_emitted);
  emit("candidates_after_dedup", cost.candidates_after_dedup);
  w.commit();
}

// Ground truth TSV with the sample recorded in header comment lines, so
// eval can reconstruct which columns were judged.
inline void write_ground_truth(const ground_truth& truth,
                               const sparse_column_matrix& m,
                               const std::string& path) {
  atomic_writer w(path);
  w.stream() << "# tau_min=" << fmt_double(truth.tau_min)
             << " self_join=" << (truth.self_join ? 1 : 0) << '\n';
  for (const auto col : truth.sample)
    w.stream() << "#sample\t" << m.external_id(col) << '\n';
  for (const auto& p : truth.pairs)
    w.stream() << m.external_id(p.a) << '\t' << m.external_id(p.b) << '\t'
               << fmt_double(p.exact_dot) << '\n';
  w.commit();
}

inline void write_eval_summary(const eval_report& rep,
                               const std::string& path) {
  atomic_writer w(path);
  w.stream() << "precision=" << fmt_double(rep.precision) << '\n'
             << "recall=" << fmt_double(rep.recall) << '\n'
             << "n_output=" << rep.n_output << '\n'
             << "n_truth=" << rep.n_truth << '\n'
             << "n_hit=" << rep.n_hit << '\n'
             << "empty_output=" << (rep.empty_output ? 1 : 0) << '\n'
             << "empty_truth=" << (rep.empty_truth ? 1 : 0) << '\n';
  w.commit();
}

inline void write_pr_curve(const std::vector<curve_point>& curve,
                           const std::string& path) {
  atomic_writer w(path);
  w.stream() << "sigma,precision,recall\n";
  for (const auto& pt : curve)
    w.stream() << fmt_double(pt.sigma) << ',' << fmt_double(pt.precision)
               << ',' << fmt_double(pt.recall) << '\n';
  w.commit();
}

inline void write_pr_histogram(const std::vector<per_column_pr>& hist,
                               const sparse_column_matrix& m,
                               const std::string& path) {
  atomic_writer w(path);
  w.stream() << "column,precision,recall,min_pr\n";
  for (const auto& h : hist)
    w.stream() << m.external_id(h.column) << ',' << fmt_double(h.precision)
               << ',' << fmt_double(h.recall) << ',' << fmt_double(h.min_pr)
               << '\n';
  w.commit();
}

struct pair_record {
  std::string a;
  std::string b;
  double value;
};

// Reads "a<TAB>b<TAB>value" lines; "#sample" header lines, when present,
// are returned through sample_ids.
inline std::vector<pair_record> read_pair_file(
    const std::string& path, std::vector<std::string>* sample_ids = nullptr,
    double* tau_min = nullptr) {
  auto in = open_input(path);
  std::vector<pair_record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (sample_ids && line.rfind("#sample\t", 0) == 0)
        sample_ids->push_back(line.substr(8));
      if (tau_min) {
        const auto pos = line.find("tau_min=");
        if (pos != std::string::npos)
          *tau_min = std::stod(line.substr(pos + 8));
      }
      continue;
    }
    std::istringstream ls(line);
    pair_record rec;
    if (!(std::getline(ls, rec.a, '\t') && std::getline(ls, rec.b, '\t') &&
          (ls >> rec.value)))
      throw validation_error(path + " line " + std::to_string(line_no) +
                             ": expected a<TAB>b<TAB>value");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace whimp
