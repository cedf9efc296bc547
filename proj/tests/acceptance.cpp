// Acceptance binary: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imforge/certify.hpp"
#include "imforge/gadgets.hpp"
#include "imforge/generators.hpp"
#include "imforge/immersion_dense.hpp"
#include "imforge/immersion_medium.hpp"
#include "imforge/nibble.hpp"
#include "imforge/spectral.hpp"
#include "imforge/subdivision.hpp"
#include "oracles.hpp"

using namespace imforge;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

// Certificate bytes from criteria 6-9, for the determinism check.
std::map<std::string, std::string> g_certs;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// All edges used by the certificate's paths must be distinct.
bool globally_edge_disjoint(const EmbeddingCertificate& c) {
  std::vector<Edge> es;
  for (const auto& p : c.pairs)
    for (std::size_t k = 0; k + 1 < p.path.size(); ++k) es.emplace_back(p.path[k], p.path[k + 1]);
  std::sort(es.begin(), es.end());
  return std::adjacent_find(es.begin(), es.end()) == es.end();
}

std::vector<oracle::Triple> complete3(int n) {
  std::vector<oracle::Triple> ts;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) ts.push_back({a, b, c});
  return ts;
}

std::vector<oracle::Triple> sts9() {
  std::vector<oracle::Triple> ts;
  auto pt = [](int x, int y) { return 3 * ((x % 3 + 3) % 3) + (y % 3 + 3) % 3; };
  for (int c = 0; c < 3; ++c) {
    ts.push_back({pt(0, c), pt(1, c), pt(2, c)});
    ts.push_back({pt(c, 0), pt(c, 1), pt(c, 2)});
    for (int s : {1, 2}) {
      oracle::Triple t{pt(0, c), pt(1, c + s), pt(2, c + 2 * s)};
      std::sort(t.begin(), t.end());
      ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

Verdict criterion1() {
  Verdict v;
  for (int q : {13, 101, 401}) {
    auto r = adjacency_spectrum(paley(q));
    double want = (1 + std::sqrt(static_cast<double>(q))) / 2;
    v.require(std::abs(r.lambda - want) <= 1e-6, "Paley(" + std::to_string(q) + ") lambda " + num(r.lambda));
  }
  auto pr = adjacency_spectrum(petersen_graph());
  v.require(std::abs(pr.lambda - 2) <= 1e-8, "Petersen lambda " + num(pr.lambda));
  auto kr = adjacency_spectrum(complete_graph(10));
  v.require(kr.n == 10 && kr.d == 9 && std::abs(kr.lambda - 1) <= 1e-8, "K10 report");
  if (v.pass) v.detail = "Paley 13/101/401, Petersen, K10 exact";
  return v;
}

Verdict criterion2() {
  Verdict v;
  std::vector<std::pair<std::string, Graph>> gs;
  gs.emplace_back("Paley(101)", paley(101));
  for (std::uint64_t s = 0; s < 10; ++s) gs.emplace_back("RR(1000,20,seed " + std::to_string(s) + ")", random_regular(1000, 20, s));
  long long checked = 0, violations = 0;
  for (const auto& [name, g] : gs) {
    auto rep = adjacency_spectrum(g);
    const int n = g.n();
    Rng rng(derive_seed(7, "mixing-acceptance", static_cast<std::uint64_t>(checked)));
    std::vector<Vertex> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::vector<char> inV(static_cast<std::size_t>(n));
    for (int trial = 0; trial < 10000; ++trial) {
      int su = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int sv = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      rng.shuffle(perm);
      std::vector<Vertex> U(perm.begin(), perm.begin() + su);
      rng.shuffle(perm);
      std::fill(inV.begin(), inV.end(), 0);
      for (int k = 0; k < sv; ++k) inV[perm[k]] = 1;
      long long e = 0;
      for (Vertex u : U)
        for (Vertex w : g.neighbors(u)) e += inV[w];
      double expected = static_cast<double>(rep.d) * su * sv / n;
      double bound = rep.lambda * std::sqrt(static_cast<double>(su) * sv);
      // Slack covers the eigensolver tolerance on lambda only.
      if (std::abs(e - expected) > bound + rep.tol * std::sqrt(static_cast<double>(su) * sv) + 1e-9) ++violations;
      ++checked;
    }
  }
  v.require(violations == 0, std::to_string(violations) + " violations");
  if (v.pass) v.detail = std::to_string(checked) + " pairs over 11 graphs, 0 violations";
  return v;
}

Verdict criterion3() {
  Verdict v;
  auto k9 = make_hypergraph(9, complete3(9));
  auto fano = make_hypergraph(7, {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}});
  auto s9 = make_hypergraph(9, sts9());
  struct Case {
    const char* name;
    const Hypergraph3* h;
    int want;
  };
  for (auto [name, h, want] : {Case{"K9^(3)", &k9, 3}, Case{"Fano", &fano, 1}, Case{"STS(9)", &s9, 3}}) {
    auto m = near_perfect_matching(*h, 0.0, 1);
    int brute = oracle::max_matching(h->hyperedges, h->n_vertices);
    v.require(is_matching(*h, m.selected), std::string(name) + " not a matching");
    v.require(m.size() == want && brute == want,
              std::string(name) + " got " + std::to_string(m.size()) + ", brute force " + std::to_string(brute));
  }
  v.require(s9.m() == 12, "STS(9) block count");
  // K_{2,2,2} with parts {0,1},{2,3},{4,5}.
  std::vector<std::pair<Vertex, Vertex>> es;
  std::vector<int> part{0, 0, 1, 1, 2, 2};
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      if (part[a] != part[b]) es.emplace_back(a, b);
  auto g = build_graph(6, es);
  auto tp = edge_disjoint_triangles(g, part, 0.0, 1);
  std::set<Edge> covered;
  for (const auto& t : tp.triangles) {
    v.require(g.has_edge(t[0], t[1]) && g.has_edge(t[1], t[2]) && g.has_edge(t[0], t[2]), "not a triangle");
    covered.insert(Edge(t[0], t[1]));
    covered.insert(Edge(t[1], t[2]));
    covered.insert(Edge(t[0], t[2]));
  }
  v.require(tp.size() == 4 && covered.size() == 12 && tp.uncovered.empty(),
            "K2,2,2 gave " + std::to_string(tp.size()) + " triangles covering " + std::to_string(covered.size()));
  if (v.pass) v.detail = "K9^(3)=3, Fano=1, STS(9)=3, K2,2,2: 4 triangles / 12 edges";
  return v;
}

Verdict criterion4() {
  Verdict v;
  const int t = 200;
  const double p = 0.5, q = 0.5;
  const int k = static_cast<int>(std::ceil(q * t / p));
  double worst = 1e9;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto tp = random_tripartite(t, t, k, p, seed);
    auto h = triangle_hypergraph(tp.graph, tp.part);
    auto m = near_perfect_matching(h, 0.2, seed);
    v.require(is_matching(h, m.selected), "seed " + std::to_string(seed) + " not a matching");
    double ratio = m.size() / (m.n_active / 3.0);
    worst = std::min(worst, ratio);
    v.require(m.size() >= 0.8 * m.n_active / 3.0, "seed " + std::to_string(seed) + " ratio " + num(ratio));
  }
  if (v.pass) v.detail = "k=" + std::to_string(k) + ", worst matching / (n_active/3) = " + num(worst);
  return v;
}

Verdict criterion5() {
  Verdict v;
  for (int M = 2; M <= 100; ++M) {
    auto f = one_factorization(M);
    int want = M % 2 == 0 ? M - 1 : M;
    v.require(f.chi() == want, "M1=" + std::to_string(M) + " chi=" + std::to_string(f.chi()));
    std::set<std::pair<int, int>> seen;
    for (const auto& cls : f.classes) {
      std::set<int> touched;
      for (auto [a, b] : cls) {
        int x = std::min(a, b), y = std::max(a, b);
        v.require(x >= 1 && y <= M && x != y, "bad edge");
        v.require(touched.insert(x).second && touched.insert(y).second, "class is not a matching");
        v.require(seen.insert({x, y}).second, "edge repeated");
      }
    }
    v.require(static_cast<int>(seen.size()) == M * (M - 1) / 2, "M1=" + std::to_string(M) + " classes miss edges");
    if (!v.pass) break;
  }
  if (v.pass) v.detail = "M1 = 2..100 partition E(K_M1), chi exact";
  return v;
}

Verdict criterion6() {
  Verdict v;
  struct G {
    std::string name;
    Graph g;
  };
  std::vector<G> gs;
  gs.push_back({"Paley(401)", paley(401)});
  gs.push_back({"RR(2000,600)", random_regular(2000, 600, 1)});
  std::string summary;
  for (const auto& [name, g] : gs) {
    auto rep = adjacency_spectrum(g);
    int prev = 1 << 30;
    for (double eta : {0.4, 0.45}) {
      auto t0 = std::chrono::steady_clock::now();
      auto res = build_dense_immersion(g, rep, eta, 6, RunMode::BestEffort);
      double secs = seconds_since(t0);
      auto r = verify(g, res.cert);
      std::string tag = name + " eta=" + num(eta);
      v.require(r.valid && r.violations.empty(), tag + " verify failed");
      for (const auto& [len, c] : r.length_histogram) v.require(len >= 1 && len <= 3, tag + " length " + std::to_string(len));
      v.require(globally_edge_disjoint(res.cert), tag + " edge reuse");
      int order = static_cast<int>(res.cert.branch.size());
      v.require(order > 0, tag + " order 0");
      v.require(order <= prev, tag + " order increased");
      v.require(secs < 120, tag + " took " + num(secs) + " s");
      prev = order;
      summary += (summary.empty() ? "" : ", ") + tag + ": " + std::to_string(order);
      g_certs["dense " + tag] = to_json(res.cert).dump();
    }
  }
  if (v.pass) v.detail = "orders " + summary;
  return v;
}

MediumOptions desk_medium_options() {
  MediumOptions o;
  o.h1 = 30;
  o.h2 = 10;
  o.h3 = 8;
  o.units = 31;
  return o;
}

Verdict criterion7() {
  Verdict v;
  auto g = random_regular(5000, 60, 1);
  auto rep = adjacency_spectrum(g);
  v.require(rep.d >= 2 * rep.lambda, "d < 2 lambda (lambda " + num(rep.lambda) + ")");
  auto t0 = std::chrono::steady_clock::now();
  auto res = build_medium_immersion(g, rep, 0.45, 7, RunMode::BestEffort, desk_medium_options());
  double secs = seconds_since(t0);
  auto r = verify(g, res.cert);
  v.require(r.valid, "verify failed");
  auto ledger = check_ledger(g, res.units, res.ledger);
  v.require(ledger.empty(), "ledger: " + (ledger.empty() ? std::string() : ledger.front()));
  v.require(res.diag.ledger_ok, "ledger flag");
  v.require(secs < 120, "took " + num(secs) + " s");
  g_certs["medium"] = to_json(res.cert).dump();
  if (v.pass)
    v.detail = "lambda=" + num(rep.lambda) + ", order " + std::to_string(res.cert.branch.size()) + " of " +
               std::to_string(res.diag.units_built) + " units, ledger clean";
  return v;
}

Verdict criterion8() {
  Verdict v;
  auto g = random_regular(4096, 16, 8);
  auto rep = adjacency_spectrum(g, -1.0, EigenMethod::Lanczos);
  auto t0 = std::chrono::steady_clock::now();
  auto res = build_balanced_subdivision(g, rep, 0.5, 0.1, 8, RunMode::BestEffort, SubdivisionVariant::D0Three);
  double secs = seconds_since(t0);
  auto r = verify(g, res.cert);
  v.require(r.valid && r.kind == EmbeddingKind::Subdivision, "verify as subdivision failed");
  v.require(r.length_histogram.size() == 1, "path lengths not uniform");
  v.require(res.cert.branch.size() >= 2, "achieved t < 2");
  v.require(secs < 120, "took " + num(secs) + " s");
  g_certs["subdivision"] = to_json(res.cert).dump();

  auto p1 = palpha_params(1e10, 0.2, SubdivisionVariant::D0Three);
  auto c1 = p_alpha_certificate(1e10, 1e5, 10, p1);
  const double hand1 = 1.5625e6 * 13.0 / 2e10 + 1e-4 * (1.0 + std::sqrt(6.0));
  v.require(std::abs(c1.rhs - hand1) <= 1e-12 && c1.pass, "p_alpha example 1 rhs " + num(c1.rhs));
  auto p2 = palpha_params(1e6, 0.2, SubdivisionVariant::D0Three);
  auto c2 = p_alpha_certificate(1e6, 1e3, 10, p2);
  const double hand2 = 156.25 * 13.0 / 2e6 + 1e-2 * (1.0 + std::sqrt(6.0));
  v.require(std::abs(c2.rhs - hand2) <= 1e-12 && !c2.pass, "p_alpha example 2 rhs " + num(c2.rhs));
  v.require(fixed_path_length(256, 3) == 11, "L(256, 3) != 11");
  if (v.pass)
    v.detail = "t=" + std::to_string(res.cert.branch.size()) + ", path length " +
               std::to_string(r.length_histogram.begin()->first) + ", rhs " + num(c1.rhs) + " / " + num(c2.rhs) +
               ", L=11";
  return v;
}

Verdict criterion9() {
  Verdict v;
  auto check = [&](const std::string& tag, const Graph& h, int n1, int p) {
    auto res = bipartite_k3_immersion(h, n1, p, 9, RunMode::Strict);
    auto r = verify(h, res.cert);
    v.require(r.valid, tag + " verify failed");
    v.require(static_cast<int>(res.cert.branch.size()) == p, tag + " order " + std::to_string(res.cert.branch.size()));
    v.require(r.length_histogram.size() == 1 && r.length_histogram.count(4), tag + " lengths not all 4");
    g_certs["k3 " + tag] = to_json(res.cert).dump();
  };
  check("K64,384", complete_bipartite(64, 384), 64, 2);
  // First seed whose density reaches 1/2.
  Graph h;
  double alpha = 0;
  std::uint64_t seed = 0;
  for (;; ++seed) {
    h = random_bipartite(512, 4096, 0.5, seed);
    alpha = static_cast<double>(h.m()) / (512.0 * 4096.0);
    if (alpha >= 0.5) break;
  }
  int p = static_cast<int>(floor_tol(std::min(alpha * 512 / 16, alpha * alpha * 4096 / 192)));
  check("bipartite(512,4096)", h, 512, p);
  if (v.pass) v.detail = "K64,384 p=2; random bipartite seed " + std::to_string(seed) + " density " + num(alpha) + " p=" + std::to_string(p);
  return v;
}

Verdict criterion10() {
  Verdict v;
  auto lengths = [](const Adjuster& a) {
    std::set<int> s;
    for (const auto& p : a.realizers) s.insert(static_cast<int>(p.size()) - 1);
    return s;
  };
  auto c6 = cycle_graph(6);
  auto a = build_1_adjuster(c6, {}, {}, 1, 1, 6);
  v.require(verify_adjuster(c6, a).valid, "C6 adjuster invalid");
  v.require(lengths(a) == std::set<int>{a.ell, a.ell + 2}, "C6 lengths");
  auto pet = petersen_graph();
  auto b = build_1_adjuster(pet, {}, {}, 2, 2, 10);
  v.require(verify_adjuster(pet, b).valid, "Petersen adjuster invalid");
  v.require(lengths(b) == std::set<int>{b.ell, b.ell + 2}, "Petersen lengths");
  // Two 6-cycles joined by one edge.
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int base : {0, 6})
    for (int i = 0; i < 6; ++i) es.emplace_back(base + i, base + (i + 1) % 6);
  es.emplace_back(2, 6);
  auto twin = build_graph(12, es);
  auto a1 = build_1_adjuster(twin, {}, {}, 1, 1, 6);
  auto a2 = build_1_adjuster(twin, {0, 1, 2, 3, 4, 5}, {}, 1, 1, 6);
  auto c = chain_adjusters(twin, a1, a2, {}, {}, 3);
  v.require(verify_adjuster(twin, c).valid, "chained adjuster invalid");
  v.require(c.k == 2 && lengths(c) == std::set<int>{c.ell, c.ell + 2, c.ell + 4}, "chained lengths");
  if (v.pass)
    v.detail = "C6 ell=" + std::to_string(a.ell) + ", Petersen ell=" + std::to_string(b.ell) + ", chained ell=" +
               std::to_string(c.ell) + " k=2";
  return v;
}

Verdict criterion11() {
  Verdict v;
  auto first = g_certs;
  v.require(first.size() == 8, "expected 8 certificates from criteria 6-9, have " + std::to_string(first.size()));
  g_certs.clear();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  for (const auto& [k, bytes] : first) {
    auto it = g_certs.find(k);
    v.require(it != g_certs.end() && it->second == bytes, k + " differs");
  }
  if (v.pass) v.detail = std::to_string(first.size()) + " certificates byte-identical on rerun";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<double, std::function<Verdict()>>> criteria = {
      {5, criterion1},   {30, criterion2},  {1, criterion3},  {60, criterion4},
      {1, criterion5},   {480, criterion6}, {120, criterion7}, {120, criterion8},
      {30, criterion9},  {5, criterion10},  {900, criterion11}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    double secs = seconds_since(t0);
    if (secs >= criteria[i].first) v.require(false, "over time budget " + num(criteria[i].first) + " s");
    if (!v.pass) ++failed;
    std::printf("criterion %zu: %s (%.2f s) %s\n", i + 1, v.pass ? "PASS" : "FAIL", secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
