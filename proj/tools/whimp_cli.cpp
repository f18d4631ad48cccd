#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "whimp/engine.hpp"
#include "whimp/errors.hpp"
#include "whimp/io.hpp"
#include "whimp/matrix.hpp"
#include "whimp/oracle.hpp"

namespace {

using namespace whimp;

orientation parse_orientation(const std::string& s) {
  if (s == "in") return orientation::in_neighborhood;
  if (s == "out") return orientation::out_neighborhood;
  throw validation_error("orientation must be 'in' or 'out'");
}

sparse_column_matrix load_matrix(const std::string& edges_path,
                                 std::size_t cap, const std::string& orient,
                                 raw_graph* graph_out = nullptr) {
  auto in = open_input(edges_path);
  auto g = ingest_edge_list(in);
  g = clean_degree_cap(g, cap);
  auto m = build_column_matrix(g, parse_orientation(orient));
  if (graph_out) *graph_out = std::move(g);
  return m;
}

// Keeps input lines verbatim; only lines whose source exceeds the cap are
// dropped, so a no-op clean is a byte-identical passthrough.
int cmd_clean(const std::string& in_path, const std::string& out_path,
              std::size_t cap) {
  {
    auto in = open_input(in_path);
    auto g = ingest_edge_list(in);  // validates and counts
    (void)g;
  }
  std::unordered_map<std::string, std::size_t> outdeg;
  {
    auto in = open_input(in_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::string l = line;
      if (!l.empty() && l.back() == '\r') l.pop_back();
      ++outdeg[l.substr(0, l.find('\t'))];
    }
  }
  auto in = open_input(in_path);
  atomic_writer w(out_path);
  std::string line;
  std::size_t kept = 0, dropped = 0;
  while (std::getline(in, line)) {
    std::string l = line;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    const auto src = l.empty() ? l : l.substr(0, l.find('\t'));
    if (!l.empty() && outdeg[src] > cap) {
      ++dropped;
      continue;
    }
    w.stream() << line << '\n';
    ++kept;
  }
  w.commit();
  std::cerr << "clean: kept " << kept << " lines, dropped " << dropped << '\n';
  return 0;
}

void write_manifest(const std::string& path, const whimp_config& cfg,
                    const std::string& edges_path, std::uint64_t input_digest,
                    std::uint64_t output_digest, const run_result& result,
                    std::size_t n_cols, double ingest_ms) {
  atomic_writer w(path);
  auto& o = w.stream();
  o << "input=" << edges_path << '\n'
    << "input_digest=" << input_digest << '\n'
    << "output_digest=" << output_digest << '\n'
    << "n_columns=" << n_cols << '\n'
    << "tau=" << fmt_double(cfg.tau) << '\n'
    << "ell=" << cfg.sketch_len << '\n'
    << "s=" << fmt_double(cfg.oversample) << '\n'
    << "sigma=" << fmt_double(cfg.filter_sigma) << '\n'
    << "seed=" << cfg.seed << '\n'
    << "self_join=" << (cfg.self_join ? 1 : 0) << '\n'
    << "theory_c=" << (cfg.theory_c ? fmt_double(*cfg.theory_c) : "none")
    << '\n'
    << "workers=" << cfg.workers << '\n'
    << "ingest_ms=" << fmt_double(ingest_ms) << '\n'
    << "round1_ms=" << fmt_double(result.timings.round1_ms) << '\n'
    << "round2_ms=" << fmt_double(result.timings.round2_ms) << '\n'
    << "round3_ms=" << fmt_double(result.timings.round3_ms) << '\n'
    << "wedges_drawn=" << result.cost.wedges_drawn << '\n'
    << "candidates_emitted=" << result.cost.candidates_emitted << '\n'
    << "candidates_after_dedup=" << result.cost.candidates_after_dedup << '\n';
  w.commit();
}

int cmd_run(const std::string& edges_path, const std::string& out_dir,
            whimp_config cfg, std::size_t cap, const std::string& orient) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory " + out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  raw_graph g;
  auto m = load_matrix(edges_path, cap, orient, &g);
  const double ingest_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
  cfg.apply_theory_mode(m.n_cols());
  cfg.validate();

  auto result = run_whimp(m, m, cfg);

  const auto path = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };
  write_candidates(result.output, m, path("pairs.tsv"));
  write_cost_report(result.cost, path("cost.txt"), /*tsv=*/false);
  write_cost_report(result.cost, path("cost.tsv"), /*tsv=*/true);
  write_id_dictionary(g, path("id_dictionary.tsv"));
  write_manifest(path("manifest.txt"), cfg, edges_path,
                 fnv1a_file(edges_path), fnv1a_file(path("pairs.tsv")),
                 result, m.n_cols(), ingest_ms);
  std::cerr << "run: " << result.output.size() << " pairs, "
            << result.cost.wedges_drawn << " wedges drawn\n";
  return 0;
}

int cmd_oracle(const std::string& edges_path, const std::string& out_path,
               std::size_t per_bucket, double tau_min, std::uint64_t seed,
               std::size_t cap, const std::string& orient) {
  auto m = load_matrix(edges_path, cap, orient);
  const auto sample = stratified_sample(m, per_bucket, seed);
  const auto truth = exact_products(m, m, sample, tau_min, /*self_join=*/true);
  write_ground_truth(truth, m, out_path);
  std::cerr << "oracle: " << sample.size() << " sampled columns, "
            << truth.pairs.size() << " pairs >= " << tau_min << '\n';
  return 0;
}

int cmd_eval(const std::string& output_path, const std::string& truth_path,
             double tau, bool curve, const std::string& out_prefix) {
  std::vector<std::string> sample_ids;
  double tau_min = 0.0;
  const auto truth_recs = read_pair_file(truth_path, &sample_ids, &tau_min);
  const auto output_recs = read_pair_file(output_path);
  if (sample_ids.empty())
    throw validation_error(truth_path + ": no #sample header lines");

  // Re-intern external ids into a private dense index space.
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> ids;
  const auto intern = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it != index.end()) return it->second;
    const auto j = static_cast<std::uint32_t>(ids.size());
    ids.push_back(id);
    index.emplace(id, j);
    return j;
  };

  ground_truth truth;
  truth.tau_min = tau_min;
  truth.self_join = true;
  for (const auto& id : sample_ids) truth.sample.push_back(intern(id));
  for (const auto& r : truth_recs)
    truth.pairs.push_back({intern(r.a), intern(r.b), r.value});
  std::sort(truth.sample.begin(), truth.sample.end());

  std::vector<candidate> output;
  for (const auto& r : output_recs)
    output.push_back({intern(r.a), intern(r.b), r.value});

  const auto rep = precision_recall(output, truth, tau);
  write_eval_summary(rep, out_prefix + ".summary.txt");
  {
    atomic_writer w(out_prefix + ".histogram.csv");
    w.stream() << "column,precision,recall,min_pr\n";
    for (const auto& h : rep.per_column)
      w.stream() << ids[h.column] << ',' << fmt_double(h.precision) << ','
                 << fmt_double(h.recall) << ',' << fmt_double(h.min_pr)
                 << '\n';
    w.commit();
  }
  if (curve) {
    const auto pts = pr_curve(output, truth, tau, default_sigma_grid(tau));
    write_pr_curve(pts, out_prefix + ".curve.csv");
  }
  std::cout << "precision=" << rep.precision << " recall=" << rep.recall
            << " (|S|=" << rep.n_output << ", |H_tau|=" << rep.n_truth << ")\n";
  return 0;
}

int cmd_estimate(const std::string& model, double atb_l1, double tau, double n,
                 double bytes_per_wedge, double wedges_per_unit) {
  constexpr double kTiB = 1099511627776.0;  // 2^40
  if (model == "disco") {
    const double bytes =
        disco_shuffle_estimate(atb_l1, tau, bytes_per_wedge, wedges_per_unit);
    std::cout << "model=disco\natb_l1=" << fmt_double(atb_l1)
              << "\ntau=" << fmt_double(tau) << "\nbytes=" << fmt_double(bytes)
              << "\nterabytes=" << fmt_double(bytes / kTiB) << '\n';
  } else if (model == "lsh") {
    const auto est = lsh_storage_estimate(n, tau);
    std::cout << "model=lsh\nn=" << fmt_double(n) << "\ntau=" << fmt_double(tau)
              << "\nexponent=" << fmt_double(est.exponent)
              << "\nbytes=" << fmt_double(est.bytes)
              << "\nterabytes=" << fmt_double(est.bytes / kTiB) << '\n';
  } else {
    throw validation_error("model must be 'disco' or 'lsh'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WHIMP: all-pairs cosine similarity above a threshold"};
  app.require_subcommand(1);

  // clean
  auto* clean = app.add_subcommand("clean", "degree-cap cleaning of an edge list");
  std::string clean_in, clean_out;
  std::size_t clean_cap = 10000;
  clean->add_option("--in", clean_in, "input edge TSV")->required();
  clean->add_option("--out", clean_out, "output edge TSV")->required();
  clean->add_option("--cap", clean_cap, "outdegree cap")
      ->envname("WHIMP_DEGREE_CAP");

  // run
  auto* run = app.add_subcommand("run", "run the three-round WHIMP dataflow");
  std::string run_edges, run_out = "whimp_out", run_orient = "in";
  whimp_config cfg;
  std::size_t run_cap = 10000;
  double theory_c = 0.0;
  bool sigma_set = false;
  run->add_option("--edges", run_edges, "input edge TSV")->required();
  run->add_option("--out", run_out, "output directory");
  run->add_option("--tau", cfg.tau, "similarity threshold");
  run->add_option("--ell", cfg.sketch_len, "sketch length in bits");
  run->add_option("--s", cfg.oversample, "oversampling factor");
  run->add_option("--sigma", cfg.filter_sigma, "filter value (default: tau)")
      ->each([&](const std::string&) { sigma_set = true; });
  run->add_option("--seed", cfg.seed, "run seed");
  run->add_option("--theory-c", theory_c,
                  "theory mode constant c (sets ell, s, sigma)");
  run->add_option("--workers", cfg.workers, "worker threads")
      ->envname("WHIMP_WORKERS");
  run->add_option("--cap", run_cap, "outdegree cap")
      ->envname("WHIMP_DEGREE_CAP");
  run->add_option("--orientation", run_orient, "column orientation: in|out");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "stratified exact ground truth");
  std::string or_edges, or_out = "truth.tsv", or_orient = "in";
  std::size_t or_bucket = 1000, or_cap = 10000;
  double or_tau_min = 0.1;
  std::uint64_t or_seed = 0;
  oracle->add_option("--edges", or_edges, "input edge TSV")->required();
  oracle->add_option("--out", or_out, "ground truth TSV");
  oracle->add_option("--per-bucket", or_bucket, "columns per degree bucket");
  oracle->add_option("--tau-min", or_tau_min, "minimum dot product retained");
  oracle->add_option("--seed", or_seed, "sampling seed");
  oracle->add_option("--cap", or_cap, "outdegree cap")
      ->envname("WHIMP_DEGREE_CAP");
  oracle->add_option("--orientation", or_orient, "column orientation: in|out");

  // eval
  auto* eval = app.add_subcommand("eval", "precision/recall against ground truth");
  std::string ev_output, ev_truth, ev_prefix = "eval";
  double ev_tau = 0.2;
  bool ev_curve = false;
  eval->add_option("--output", ev_output, "pairs TSV from a run")->required();
  eval->add_option("--truth", ev_truth, "ground truth TSV")->required();
  eval->add_option("--tau", ev_tau, "similarity threshold");
  eval->add_flag("--curve", ev_curve, "also write a PR curve CSV");
  eval->add_option("--out-prefix", ev_prefix, "output file prefix");

  // estimate
  auto* est = app.add_subcommand("estimate", "closed-form baseline cost estimates");
  std::string est_model = "disco";
  double est_atb = 0.0, est_tau = 0.2, est_n = 0.0;
  double est_bpw = 16.0, est_wpu = 50.0;
  est->add_option("--model", est_model, "disco|lsh");
  est->add_option("--atb-l1", est_atb, "|A^T A|_1 (disco)");
  est->add_option("--tau", est_tau, "similarity threshold");
  est->add_option("--n", est_n, "number of columns (lsh)");
  est->add_option("--bytes-per-wedge", est_bpw, "bytes per shuffled wedge");
  est->add_option("--wedges-per-unit", est_wpu, "wedges per unit of |A^T A|_1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*clean) return cmd_clean(clean_in, clean_out, clean_cap);
    if (*run) {
      if (!sigma_set) cfg.filter_sigma = cfg.tau;
      if (theory_c > 0.0) cfg.theory_c = theory_c;
      return cmd_run(run_edges, run_out, cfg, run_cap, run_orient);
    }
    if (*oracle)
      return cmd_oracle(or_edges, or_out, or_bucket, or_tau_min, or_seed,
                        or_cap, or_orient);
    if (*eval) return cmd_eval(ev_output, ev_truth, ev_tau, ev_curve, ev_prefix);
    if (*est)
      return cmd_estimate(est_model, est_atb, est_tau, est_n, est_bpw, est_wpu);
  } catch (const whimp::validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const whimp::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const whimp::internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
