#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "imforge/generators.hpp"
#include "imforge/nibble.hpp"
#include "oracles.hpp"

using namespace imforge;

namespace {

std::vector<Triple> complete3(int n) {
  std::vector<Triple> ts;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) ts.push_back({a, b, c});
  return ts;
}

std::vector<Triple> fano() {
  return {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}};
}

// Lines of AG(2,3); point (x,y) is 3x+y.
std::vector<Triple> sts9() {
  std::vector<Triple> ts;
  auto pt = [](int x, int y) { return 3 * ((x % 3 + 3) % 3) + (y % 3 + 3) % 3; };
  for (int c = 0; c < 3; ++c) {
    ts.push_back({pt(c, 0), pt(c, 1), pt(c, 2)});
    ts.push_back({pt(0, c), pt(1, c), pt(2, c)});
    ts.push_back({pt(0, c), pt(1, c + 1), pt(2, c + 2)});
    ts.push_back({pt(0, c), pt(1, c + 2), pt(2, c + 4)});
  }
  return ts;
}

// Complete tripartite graph with parts of size a, b, c.
std::pair<Graph, std::vector<int>> complete_tripartite(int a, int b, int c) {
  std::vector<int> part;
  for (int i = 0; i < a; ++i) part.push_back(0);
  for (int i = 0; i < b; ++i) part.push_back(1);
  for (int i = 0; i < c; ++i) part.push_back(2);
  int n = a + b + c;
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (part[u] != part[v]) es.emplace_back(u, v);
  return {build_graph(n, es), part};
}

void check_packing(const Graph& g, const TrianglePacking& tp) {
  std::vector<Edge> used;
  for (const auto& t : tp.triangles) {
    CHECK(g.has_edge(t[0], t[1]));
    CHECK(g.has_edge(t[1], t[2]));
    CHECK(g.has_edge(t[0], t[2]));
    used.emplace_back(t[0], t[1]);
    used.emplace_back(t[1], t[2]);
    used.emplace_back(t[0], t[2]);
  }
  std::sort(used.begin(), used.end());
  CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
  CHECK(used.size() + tp.uncovered.size() == static_cast<std::size_t>(tp.edges_total));
  for (const auto& e : tp.uncovered) CHECK_FALSE(std::binary_search(used.begin(), used.end(), e));
}

}  // namespace

TEST_CASE("triangle_hypergraph examples", "[nibble]") {
  auto tri = build_graph(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}});
  auto h = triangle_hypergraph(tri, {0, 1, 2});
  CHECK(h.n_vertices == 3);
  CHECK(h.m() == 1);

  auto c6 = cycle_graph(6);
  auto h6 = triangle_hypergraph(c6, {0, 1, 2, 0, 1, 2});
  CHECK(h6.n_vertices == 6);
  CHECK(h6.m() == 0);
  CHECK(h6.isolated() == 6);

  auto [k222, part] = complete_tripartite(2, 2, 2);
  auto hk = triangle_hypergraph(k222, part);
  CHECK(hk.n_vertices == 12);
  CHECK(hk.m() == 8);
  CHECK(static_cast<int>(oracle::triangles(k222).size()) == 8);

  // Intra-part edges are not hypergraph vertices.
  auto k4 = complete_graph(4);
  auto h4 = triangle_hypergraph(k4, {0, 0, 1, 2});
  CHECK(h4.n_vertices == 5);
  CHECK(h4.m() == 2);
  auto h4x = triangle_hypergraph(k4, {0, 1, 2, -1});
  CHECK(h4x.n_vertices == 3);
  CHECK(h4x.m() == 1);
}

TEST_CASE("triangle_hypergraph errors", "[nibble]") {
  auto k3 = complete_graph(3);
  for (const auto& bad : {std::vector<int>{0, 1}, std::vector<int>{0, 1, 3}}) {
    try {
      triangle_hypergraph(k3, bad);
      FAIL("expected BadPartition");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadPartition);
    }
  }
}

TEST_CASE("triangle_hypergraph matches brute-force triangles", "[nibble][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [g, part] = random_tripartite(6, 7, 5, 0.5, seed);
    auto h = triangle_hypergraph(g, part);
    auto tris = oracle::triangles(g);
    CHECK(h.m() == static_cast<int>(tris.size()));
    std::set<std::array<int, 3>> want(tris.begin(), tris.end());
    for (const auto& t : h.hyperedges) {
      std::vector<Vertex> vs;
      for (int x : t) {
        vs.push_back(h.labels[x].u);
        vs.push_back(h.labels[x].v);
      }
      auto s = make_vertex_set(vs);
      REQUIRE(s.size() == 3);
      CHECK(want.count({s[0], s[1], s[2]}) == 1);
    }
    CHECK(hypergraph_stats(h, 0.5).max_codegree <= 1);
  }
}

TEST_CASE("near_perfect_matching small designs", "[nibble]") {
  auto k9 = make_hypergraph(9, complete3(9));
  auto f = make_hypergraph(7, fano());
  auto s9 = make_hypergraph(9, sts9());
  REQUIRE(s9.m() == 12);
  CHECK(oracle::max_matching(k9.hyperedges, 9) == 3);
  CHECK(oracle::max_matching(f.hyperedges, 7) == 1);
  CHECK(oracle::max_matching(s9.hyperedges, 9) == 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto mk = near_perfect_matching(k9, 0.0, seed);
    CHECK(mk.size() == 3);
    CHECK(is_matching(k9, mk.selected));
    CHECK(near_perfect_matching(f, 0.0, seed).size() == 1);
    auto ms = near_perfect_matching(s9, 0.0, seed);
    CHECK(ms.size() == 3);
    CHECK(is_matching(s9, ms.selected));
  }
}

TEST_CASE("edge_disjoint_triangles small cases", "[nibble]") {
  auto tri = build_graph(3, std::vector<std::pair<Vertex, Vertex>>{{0, 1}, {1, 2}, {0, 2}});
  auto tp = edge_disjoint_triangles(tri, {0, 1, 2}, 0.7, 1);
  CHECK(tp.size() == 1);
  CHECK(tp.uncovered.empty());

  auto [k222, part] = complete_tripartite(2, 2, 2);
  auto hk = triangle_hypergraph(k222, part);
  CHECK(oracle::max_matching(hk.hyperedges, hk.n_vertices) == 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = edge_disjoint_triangles(k222, part, 0.0, seed);
    CHECK(p.size() == 4);
    CHECK(p.uncovered.empty());
    check_packing(k222, p);
  }

  auto c6 = cycle_graph(6);
  auto none = edge_disjoint_triangles(c6, {0, 1, 2, 0, 1, 2}, 0.1, 1);
  CHECK(none.size() == 0);
  CHECK(none.uncovered.size() == 6);
}

TEST_CASE("matching properties on random hypergraphs", "[nibble][property]") {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    int n = 9 + static_cast<int>(rng.below(4));
    std::vector<Triple> ts;
    for (const auto& t : complete3(n))
      if (rng.bernoulli(0.15)) ts.push_back(t);
    auto h = make_hypergraph(n, ts);
    auto mt = near_perfect_matching(h, 0.1, seed);
    CHECK(is_matching(h, mt.selected));
    CHECK(mt.size() >= mt.greedy_size);
    CHECK(mt.size() <= oracle::max_matching(h.hyperedges, n));
    // Maximality: every triple meets the matching.
    std::vector<char> cov(static_cast<std::size_t>(n), 0);
    for (int i : mt.selected)
      for (int x : h.hyperedges[i]) cov[x] = 1;
    for (const auto& t : h.hyperedges) CHECK((cov[t[0]] || cov[t[1]] || cov[t[2]]));
    CHECK(near_perfect_matching(h, 0.1, seed).selected == mt.selected);
  }
}

TEST_CASE("packing properties on random tripartite graphs", "[nibble][property]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto [g, part] = random_tripartite(30, 30, 30, 0.4, seed);
    auto tp = edge_disjoint_triangles(g, part, 0.2, seed);
    check_packing(g, tp);
    CHECK(tp.stats.max_codegree <= 1);
  }
}

TEST_CASE("hypergraph stats", "[nibble]") {
  auto s = hypergraph_stats(make_hypergraph(9, sts9()), 0.1);
  CHECK(s.n_active == 9);
  CHECK(s.mean_degree == 4.0);
  CHECK(s.frac_near_mean == 1.0);
  CHECK(s.max_codegree == 1);
  CHECK(s.degree_stddev == 0.0);
  auto k = hypergraph_stats(make_hypergraph(5, complete3(5)), 0.1);
  CHECK(k.max_codegree == 3);
}

TEST_CASE("hypergraph dump round trip", "[nibble]") {
  auto h = make_hypergraph(9, sts9());
  std::stringstream ss;
  write_hypergraph(ss, h);
  auto back = read_hypergraph(ss);
  CHECK(back.n_vertices == 9);
  CHECK(back.hyperedges == h.hyperedges);

  std::stringstream bad("3 1\n0 1 7\n");
  try {
    read_hypergraph(bad);
    FAIL("expected Parse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(e.detail() == 2);
  }
  std::stringstream dup("3 1\n0 0 1\n");
  CHECK_THROWS_AS(read_hypergraph(dup), Error);
}
