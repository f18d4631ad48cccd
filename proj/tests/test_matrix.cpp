#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "instances.hpp"
#include "whimp/matrix.hpp"

using namespace whimp;

namespace {

raw_graph graph_from(const std::string& text,
                     edge_format fmt = edge_format::any) {
  std::istringstream in(text);
  return ingest_edge_list(in, fmt);
}

}  // namespace

TEST_CASE("ingest assigns dense ids in first-seen order") {
  const auto g = graph_from("0\t1\n0\t2\n1\t2\n");
  CHECK(g.n_vertices() == 3);
  CHECK(g.n_edges() == 3);
  CHECK(g.ids[0] == "0");
  CHECK(g.ids[1] == "1");
  CHECK(g.ids[2] == "2");
  CHECK(g.edges[0].weight == 1.0);
}

TEST_CASE("ingest of an empty stream") {
  const auto g = graph_from("");
  CHECK(g.n_vertices() == 0);
  CHECK(g.n_edges() == 0);
}

TEST_CASE("ingest parses weighted triples and drops zero weights") {
  const auto g = graph_from("a\tb\t0.5\nb\tc\t0\n");
  CHECK(g.n_edges() == 1);
  CHECK(g.dropped_zero_weight == 1);
  CHECK(g.edges[0].weight == doctest::Approx(0.5));
}

TEST_CASE("ingest rejects negative weights") {
  CHECK_THROWS_AS(graph_from("a\tb\t-1\n"), validation_error);
}

TEST_CASE("ingest rejects malformed lines with line numbers") {
  try {
    graph_from("a\tb\nnot-a-line\n");
    FAIL("expected parse error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("ingest rejects duplicate edges") {
  CHECK_THROWS_AS(graph_from("a\tb\na\tb\t2\n"), validation_error);
}

TEST_CASE("ingest format restriction") {
  CHECK_THROWS_AS(graph_from("a\tb\t1\n", edge_format::pair), validation_error);
  CHECK_THROWS_AS(graph_from("a\tb\n", edge_format::weighted_triple),
                  validation_error);
}

TEST_CASE("degree cap drops all edges of over-cap vertices, keeps vertex") {
  std::string text;
  for (int i = 1; i <= 11; ++i)
    text += "hub\tv" + std::to_string(i) + "\n";
  const auto g = graph_from(text);
  const auto cleaned = clean_degree_cap(g, 10);
  CHECK(cleaned.n_edges() == 0);
  CHECK(cleaned.n_vertices() == 12);
  CHECK(cleaned.id_index.count("hub") == 1);
}

TEST_CASE("degree cap is a no-op below the cap") {
  const auto g = graph_from("a\tb\na\tc\nb\tc\n");
  const auto cleaned = clean_degree_cap(g, 10);
  CHECK(cleaned.n_edges() == g.n_edges());
}

TEST_CASE("star graph with center outdegree 20, cap 10: zero edges remain") {
  std::string text;
  for (int i = 0; i < 20; ++i) text += "c\tleaf" + std::to_string(i) + "\n";
  const auto cleaned = clean_degree_cap(graph_from(text), 10);
  CHECK(cleaned.n_edges() == 0);
  CHECK(cleaned.n_vertices() == 21);
}

TEST_CASE("degree cap is idempotent") {
  std::string text;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 3 + i; ++j)
      text += "s" + std::to_string(i) + "\tt" + std::to_string(i * 20 + j) + "\n";
  const auto g = graph_from(text);
  const auto once = clean_degree_cap(g, 5);
  const auto twice = clean_degree_cap(once, 5);
  REQUIRE(once.n_edges() == twice.n_edges());
  for (std::size_t i = 0; i < once.edges.size(); ++i) {
    CHECK(once.edges[i].src == twice.edges[i].src);
    CHECK(once.edges[i].dst == twice.edges[i].dst);
  }
}

TEST_CASE("in-orientation columns are normalized incidence vectors") {
  std::string text;
  for (int i = 0; i < 4; ++i) text += "f" + std::to_string(i) + "\ta\n";
  const auto m = build_column_matrix(graph_from(text),
                                     orientation::in_neighborhood);
  // column of "a" (dense index 1) has 4 entries, each 1/2
  const auto col = m.column(1);
  REQUIRE(col.size() == 4);
  for (const auto& e : col) CHECK(e.value == doctest::Approx(0.5));
  CHECK(m.column_l2_norm(1) == doctest::Approx(2.0));
}

TEST_CASE("identical in-neighborhoods give cosine 1") {
  const auto m = build_column_matrix(
      graph_from("x\ta\nx\tb\ny\ta\ny\tb\n"), orientation::in_neighborhood);
  const auto a = m.external_ids();
  // columns for "a" and "b"
  std::size_t ca = 0, cb = 0;
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    if (a[j] == "a") ca = j;
    if (a[j] == "b") cb = j;
  }
  CHECK(m.dot(ca, cb) == doctest::Approx(1.0));
}

TEST_CASE("path graph 0->1->2, in-orientation") {
  const auto m = build_column_matrix(graph_from("0\t1\n1\t2\n"),
                                     orientation::in_neighborhood);
  CHECK(m.column_empty(0));
  REQUIRE(m.column(1).size() == 1);
  CHECK(m.column(1)[0].index == 0);
  CHECK(m.column(1)[0].value == doctest::Approx(1.0));
  REQUIRE(m.column(2).size() == 1);
  CHECK(m.column(2)[0].index == 1);
}

TEST_CASE("columns are unit-norm and sorted by row index") {
  const auto m = testgen::random_sparse(60, 40, 6, 7);
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    const auto col = m.column(j);
    double sq = 0.0;
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (k > 0) CHECK(col[k].index > col[k - 1].index);
      CHECK(col[k].value > 0.0);
      sq += col[k].value * col[k].value;
    }
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-12);
  }
}

TEST_CASE("row L1 norms match the normalized entries") {
  const auto m = testgen::random_sparse(50, 30, 5, 11);
  std::vector<double> l1(m.n_rows(), 0.0);
  for (std::size_t j = 0; j < m.n_cols(); ++j)
    for (const auto& e : m.column(j)) l1[e.index] += e.value;
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    CHECK(m.row_l1_norm(r) == doctest::Approx(l1[r]).epsilon(1e-9));
}

TEST_CASE("sum of row L1 products equals |A^T B|_1") {
  const auto a = testgen::random_sparse(50, 50, 8, 3);
  double sum = 0.0;
  for (std::size_t r = 0; r < a.n_rows(); ++r)
    sum += a.row_l1_norm(r) * a.row_l1_norm(r);
  const double ref = testgen::brute_force_atb_l1(a, a);
  CHECK(sum == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("all pairwise dots of normalized non-negative columns lie in [0,1]") {
  const auto m = testgen::random_sparse(30, 25, 6, 13);
  for (std::size_t i = 0; i < m.n_cols(); ++i)
    for (std::size_t j = 0; j < m.n_cols(); ++j) {
      const double d = m.dot(i, j);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0 + 1e-12);
    }
}
