#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "imforge/certify.hpp"
#include "imforge/gadgets.hpp"
#include "imforge/generators.hpp"
#include "oracles.hpp"

using namespace imforge;

namespace {

// Two 6-cycles 0..5 and 6..11 joined by the edge 2-6.
Graph twin_c6() {
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int base : {0, 6})
    for (int i = 0; i < 6; ++i) es.emplace_back(base + i, base + (i + 1) % 6);
  es.emplace_back(2, 6);
  return build_graph(12, es);
}

std::set<int> lengths(const std::vector<Path>& ps) {
  std::set<int> s;
  for (const auto& p : ps) s.insert(static_cast<int>(p.size()) - 1);
  return s;
}

}  // namespace

TEST_CASE("shortest_even_cycle examples", "[gadgets]") {
  auto c6 = shortest_even_cycle(cycle_graph(6));
  REQUIRE(c6);
  CHECK(c6->size() == 6);
  CHECK(c6->front() == 0);
  auto k4 = shortest_even_cycle(complete_graph(4));
  REQUIRE(k4);
  CHECK(k4->size() == 4);
  auto pet = shortest_even_cycle(petersen_graph());
  REQUIRE(pet);
  CHECK(pet->size() == 6);
  CHECK_FALSE(shortest_even_cycle(cycle_graph(7)));
  CHECK_FALSE(shortest_even_cycle(petersen_graph(), 4));
  std::vector<std::pair<Vertex, Vertex>> tree{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}};
  CHECK_FALSE(shortest_even_cycle(build_graph(6, tree)));
}

TEST_CASE("shortest_even_cycle matches enumeration", "[gadgets][property]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(derive_seed(seed, "even-cycle-test"));
    int n = 5 + static_cast<int>(seed % 6);
    std::vector<std::pair<Vertex, Vertex>> es;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng.bernoulli(0.35)) es.emplace_back(a, b);
    auto g = build_graph(n, es);
    int want = oracle::shortest_even_cycle_length(g);
    auto got = shortest_even_cycle(g);
    if (want == 0) {
      CHECK_FALSE(got);
      continue;
    }
    REQUIRE(got);
    CHECK(static_cast<int>(got->size()) == want);
    // It is a genuine cycle.
    Path closed = *got;
    closed.push_back(closed.front());
    for (std::size_t i = 0; i + 1 < closed.size(); ++i) CHECK(g.has_edge(closed[i], closed[i + 1]));
    auto s = *got;
    std::sort(s.begin(), s.end());
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  }
}

TEST_CASE("expansions", "[gadgets]") {
  // Star with centre 0 and leaves 1..5.
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int i = 1; i <= 5; ++i) es.emplace_back(0, i);
  auto star = build_graph(6, es);
  std::vector<char> none(6, 0);
  auto F = grow_expansion(view_minus(star, {}, {}), 0, 6, 1, none);
  CHECK(F.size() == 6);
  auto T = trim_expansion(F, 3);
  CHECK(T.vertices == std::vector<Vertex>{0, 1, 2});
  CHECK(T.parent == std::vector<Vertex>{-1, 0, 0});
  CHECK_THROWS_AS(trim_expansion(F, 0), Error);
  try {
    trim_expansion(F, 7);
    FAIL("expected BadSize");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadSize);
  }
  auto blocked = none;
  blocked[2] = 1;
  auto G = grow_expansion(view_minus(star, {}, {}), 0, 6, 1, blocked);
  CHECK(G.vertices == std::vector<Vertex>{0, 1, 3, 4, 5});
  // Depth limit.
  auto p = path_graph(6);
  auto H = grow_expansion(view_minus(p, {}, {}), 0, 6, 2, std::vector<char>(6, 0));
  CHECK(H.vertices == std::vector<Vertex>{0, 1, 2});
}

TEST_CASE("1-adjuster on C6", "[gadgets]") {
  auto g = cycle_graph(6);
  auto a = build_1_adjuster(g, {}, {}, 1, 1, 6);
  auto r = verify_adjuster(g, a);
  CHECK(r.valid);
  CHECK(a.k == 1);
  CHECK(a.ell == 2);
  CHECK(a.u1 == 0);
  CHECK(a.u2 == 2);
  CHECK(lengths(a.realizers) == std::set<int>{2, 4});
  // No room to grow an end of size 2.
  try {
    build_1_adjuster(g, {}, {}, 2, 4, 6);
    FAIL("expected ExpansionFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExpansionFailed);
  }
  // Default cap m/16 = 0 rules out every cycle.
  try {
    build_1_adjuster(g, {}, {}, 1, 1);
    FAIL("expected NoEvenCycle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoEvenCycle);
  }
}

TEST_CASE("1-adjuster on Petersen and grids", "[gadgets]") {
  auto g = petersen_graph();
  auto a = build_1_adjuster(g, {}, {}, 2, 2, 10);
  CHECK(verify_adjuster(g, a).valid);
  CHECK(a.ell == 2);
  CHECK(lengths(a.realizers) == std::set<int>{2, 4});
  CHECK(a.I1.size() == 2);
  CHECK(a.I2.size() == 2);

  // On Q4 the shortest even cycle is a 4-cycle: ell = 1.
  auto q = hypercube(4);
  auto b = build_1_adjuster(q, {}, {}, 4, 3, 8);
  CHECK(verify_adjuster(q, b).valid);
  CHECK(lengths(b.realizers) == std::set<int>{1, 3});

  // A tree has no even cycle.
  std::vector<std::pair<Vertex, Vertex>> tree{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}};
  try {
    build_1_adjuster(build_graph(6, tree), {}, {}, 1, 1, 10);
    FAIL("expected NoEvenCycle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoEvenCycle);
  }
}

TEST_CASE("chain_adjusters", "[gadgets]") {
  auto g = twin_c6();
  VertexSet left{0, 1, 2, 3, 4, 5};
  auto a1 = build_1_adjuster(g, {}, {}, 1, 1, 6);
  auto a2 = build_1_adjuster(g, left, {}, 1, 1, 6);
  CHECK(a1.u1 == 0);
  CHECK(a1.u2 == 2);
  CHECK(a2.u1 == 6);
  CHECK(a2.u2 == 8);
  auto c = chain_adjusters(g, a1, a2, {}, {}, 3);
  auto r = verify_adjuster(g, c);
  CHECK(r.valid);
  CHECK(c.k == 2);
  CHECK(c.ell == 5);
  CHECK(c.u1 == 0);
  CHECK(c.u2 == 8);
  CHECK(lengths(c.realizers) == std::set<int>{5, 7, 9});

  auto same = chain_adjusters(g, a1, std::nullopt, {}, {}, 3);
  CHECK(same.realizers == a1.realizers);

  // Remove the bridge: no connection.
  try {
    chain_adjusters(g, a1, a2, {}, {Edge(2, 6)}, 3);
    FAIL("expected NoConnection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConnection);
  }
}

TEST_CASE("chained adjuster on a random regular graph", "[gadgets]") {
  auto g = random_regular(400, 6, 3);
  auto a1 = build_1_adjuster(g, {}, {}, 8, 4, 12);
  std::vector<Vertex> used(a1.A.begin(), a1.A.end());
  used.insert(used.end(), a1.I1.vertices.begin(), a1.I1.vertices.end());
  used.insert(used.end(), a1.I2.vertices.begin(), a1.I2.vertices.end());
  auto a2 = build_1_adjuster(g, make_vertex_set(used), {}, 8, 4, 12);
  CHECK(verify_adjuster(g, a1).valid);
  CHECK(verify_adjuster(g, a2).valid);
  auto c = chain_adjusters(g, a1, a2, {}, {}, 12);
  CHECK(verify_adjuster(g, c).valid);
  auto ls = lengths(c.realizers);
  REQUIRE(ls.size() == 3);
  CHECK(*ls.begin() == c.ell);
  CHECK(ls == std::set<int>{c.ell, c.ell + 2, c.ell + 4});
}

TEST_CASE("bipartite K3 immersion on complete bipartite graphs", "[gadgets]") {
  auto h = complete_bipartite(64, 384);
  auto res = bipartite_k3_immersion(h, 64, 2, 1, RunMode::Strict);
  auto r = verify(h, res.cert);
  CHECK(r.valid);
  CHECK(res.cert.branch.size() == 2);
  CHECK(r.length_histogram == std::map<int, int>{{4, 1}});
  CHECK(res.diag.alpha == 1.0);
  CHECK(res.diag.p_bound == Catch::Approx(2.0));

  try {
    bipartite_k3_immersion(h, 64, 3, 1, RunMode::Strict);
    FAIL("expected PreconditionFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PreconditionFailed);
  }
  auto one = bipartite_k3_immersion(h, 64, 1, 1, RunMode::Strict);
  CHECK(one.cert.branch.size() == 1);
  CHECK(verify(h, one.cert).valid);

  // Larger p in best-effort still yields length-4 paths in a dense graph.
  auto big = bipartite_k3_immersion(h, 64, 6, 1, RunMode::BestEffort);
  auto rb = verify(h, big.cert);
  CHECK(rb.valid);
  CHECK(big.cert.branch.size() == 6);
  for (const auto& pp : big.cert.pairs) {
    CHECK(pp.path.size() == 5);
    CHECK(pp.path[1] >= 64);
    CHECK(pp.path[2] < 64);
    CHECK(pp.path[3] >= 64);
  }

  // An edge inside one side is rejected.
  std::vector<std::pair<Vertex, Vertex>> inner{{0, 1}, {0, 2}};
  auto bad = build_graph(4, inner);
  CHECK_THROWS_AS(bipartite_k3_immersion(bad, 2, 2, 1, RunMode::BestEffort), Error);
}

TEST_CASE("bipartite K3 immersion on a random bipartite graph", "[gadgets]") {
  auto h = random_bipartite(512, 4096, 0.5, 7);
  double alpha = static_cast<double>(h.m()) / (512.0 * 4096.0);
  int p = static_cast<int>(std::floor(std::min(alpha * 512 / 16, alpha * alpha * 4096 / 192)));
  REQUIRE(p >= 2);
  auto res = bipartite_k3_immersion(h, 512, p, 7, RunMode::Strict);
  auto r = verify(h, res.cert);
  CHECK(r.valid);
  CHECK(static_cast<int>(res.cert.branch.size()) == p);
  CHECK(r.length_histogram == std::map<int, int>{{4, p * (p - 1) / 2}});
  auto again = bipartite_k3_immersion(h, 512, p, 7, RunMode::Strict);
  CHECK(to_json(again.cert).dump() == to_json(res.cert).dump());
}
