#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"
#include "imforge/rng.hpp"

namespace imforge {

using Triple = std::array<int, 3>;

/// 3-uniform hypergraph. When built from a graph, vertex i stands for the
/// base edge labels[i].
struct Hypergraph3 {
  int n_vertices = 0;
  std::vector<Triple> hyperedges;  // sorted triples, sorted list
  std::vector<Edge> labels;        // empty for abstract hypergraphs

  int m() const { return static_cast<int>(hyperedges.size()); }
  std::vector<int> degrees() const {
    std::vector<int> d(static_cast<std::size_t>(n_vertices), 0);
    for (const auto& t : hyperedges)
      for (int x : t) ++d[x];
    return d;
  }
  int isolated() const {
    auto d = degrees();
    return static_cast<int>(std::count(d.begin(), d.end(), 0));
  }
  int n_active() const { return n_vertices - isolated(); }
};

inline Hypergraph3 make_hypergraph(int n, std::vector<Triple> triples) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative vertex count");
  for (auto& t : triples) {
    for (int x : t)
      if (x < 0 || x >= n) throw Error(ErrorCode::OutOfRange, "hyperedge vertex " + std::to_string(x), x);
    std::sort(t.begin(), t.end());
    if (t[0] == t[1] || t[1] == t[2]) throw Error(ErrorCode::InvalidArgument, "hyperedge with repeated vertex");
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  Hypergraph3 h;
  h.n_vertices = n;
  h.hyperedges = std::move(triples);
  return h;
}

/// One hypergraph vertex per cross-part edge of g; one triple per triangle.
/// part[v] in {0,1,2}, or -1 to leave v out.
inline Hypergraph3 triangle_hypergraph(const Graph& g, const std::vector<int>& part) {
  if (static_cast<int>(part.size()) != g.n())
    throw Error(ErrorCode::BadPartition, "partition size " + std::to_string(part.size()) + " != n");
  for (int v = 0; v < g.n(); ++v)
    if (part[v] < -1 || part[v] > 2) throw Error(ErrorCode::BadPartition, "bad part label", v, part[v]);
  Hypergraph3 h;
  std::vector<int> index(static_cast<std::size_t>(g.m()), -1);
  for (int id = 0; id < g.m(); ++id) {
    const auto& e = g.edge(id);
    if (part[e.u] < 0 || part[e.v] < 0 || part[e.u] == part[e.v]) continue;
    index[id] = static_cast<int>(h.labels.size());
    h.labels.push_back(e);
  }
  h.n_vertices = static_cast<int>(h.labels.size());
  // Triangles a<b<c: walk edge (a,b), intersect sorted neighbour lists above b.
  for (int id = 0; id < g.m(); ++id) {
    if (index[id] < 0) continue;
    auto [a, b] = g.edge(id);
    auto na = g.neighbors(a), nb = g.neighbors(b);
    auto ia = g.incident(a), ib = g.incident(b);
    std::size_t x = std::upper_bound(na.begin(), na.end(), b) - na.begin();
    std::size_t y = std::upper_bound(nb.begin(), nb.end(), b) - nb.begin();
    while (x < na.size() && y < nb.size()) {
      if (na[x] < nb[y]) ++x;
      else if (nb[y] < na[x]) ++y;
      else {
        int e2 = index[ia[x]], e3 = index[ib[y]];
        if (e2 >= 0 && e3 >= 0) {
          Triple t{index[id], e2, e3};
          std::sort(t.begin(), t.end());
          h.hyperedges.push_back(t);
        }
        ++x;
        ++y;
      }
    }
  }
  std::sort(h.hyperedges.begin(), h.hyperedges.end());
  return h;
}

/// Degree bookkeeping for the nibble hypotheses.
struct HypergraphStats {
  int n_active = 0;
  int isolated = 0;
  double mean_degree = 0.0;       // over active vertices
  double frac_near_mean = 0.0;    // active vertices with d(x) within (1 +- gamma) mean
  int max_degree = 0;
  int max_codegree = 0;
  double degree_stddev = 0.0;
};

inline HypergraphStats hypergraph_stats(const Hypergraph3& h, double gamma) {
  HypergraphStats s;
  auto d = h.degrees();
  s.isolated = static_cast<int>(std::count(d.begin(), d.end(), 0));
  s.n_active = h.n_vertices - s.isolated;
  double sum = 0, sq = 0;
  for (int x : d)
    if (x > 0) {
      sum += x;
      sq += static_cast<double>(x) * x;
      s.max_degree = std::max(s.max_degree, x);
    }
  if (s.n_active > 0) {
    s.mean_degree = sum / s.n_active;
    s.degree_stddev = std::sqrt(std::max(0.0, sq / s.n_active - s.mean_degree * s.mean_degree));
    int near = 0;
    for (int x : d)
      if (x > 0 && std::abs(x - s.mean_degree) <= gamma * s.mean_degree) ++near;
    s.frac_near_mean = static_cast<double>(near) / s.n_active;
  }
  std::unordered_map<std::uint64_t, int> co;
  co.reserve(h.hyperedges.size() * 3);
  for (const auto& t : h.hyperedges)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) s.max_codegree = std::max(s.max_codegree, ++co[edge_key(t[a], t[b])]);
  return s;
}

struct Matching3 {
  std::vector<int> selected;  // indices into hyperedges, ascending
  int n_active = 0;
  double target = 0.0;        // (1 - alpha) n_active / 3
  int rounds = 0;
  int nibble_size = 0;        // after bites, before cleanup
  int greedy_size = 0;        // plain seeded greedy, for comparison

  int size() const { return static_cast<int>(selected.size()); }
  bool meets_target() const { return size() + 1e-9 >= target; }
};

inline bool is_matching(const Hypergraph3& h, const std::vector<int>& sel) {
  std::vector<char> used(static_cast<std::size_t>(h.n_vertices), 0);
  for (int i : sel) {
    if (i < 0 || i >= h.m()) return false;
    for (int x : h.hyperedges[i]) {
      if (used[x]) return false;
      used[x] = 1;
    }
  }
  return true;
}

namespace detail {

inline void greedy_fill(const Hypergraph3& h, const std::vector<int>& order, std::vector<char>& covered,
                        std::vector<int>& out) {
  for (int i : order) {
    const auto& t = h.hyperedges[i];
    if (covered[t[0]] || covered[t[1]] || covered[t[2]]) continue;
    for (int x : t) covered[x] = 1;
    out.push_back(i);
  }
}

}  // namespace detail

/// Random-greedy bites, then a sweep in ascending triple order. Returns the
/// larger of that and a plain greedy pass over a seeded random order.
inline Matching3 near_perfect_matching(const Hypergraph3& h, double alpha_target, std::uint64_t seed,
                                       double bite = 0.1, int max_rounds = 50) {
  Matching3 out;
  out.n_active = h.n_active();
  out.target = (1.0 - alpha_target) * out.n_active / 3.0;
  const int m = h.m();
  std::vector<char> covered(static_cast<std::size_t>(h.n_vertices), 0);
  std::vector<int> chosen;
  Rng rng(derive_seed(seed, "nibble"));
  std::vector<int> alive(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) alive[i] = i;
  std::vector<int> hits(static_cast<std::size_t>(h.n_vertices), 0);
  std::vector<int> degree(static_cast<std::size_t>(h.n_vertices), 0);
  for (int round = 0; round < max_rounds && !alive.empty(); ++round) {
    out.rounds = round + 1;
    // Surviving degrees give the sampling rate: each vertex is hit ~bite times.
    std::fill(degree.begin(), degree.end(), 0);
    for (int i : alive)
      for (int x : h.hyperedges[i]) ++degree[x];
    double sum = 0;
    int cnt = 0;
    for (int v = 0; v < h.n_vertices; ++v)
      if (degree[v] > 0) {
        sum += degree[v];
        ++cnt;
      }
    double p = std::min(1.0, bite * cnt / std::max(1.0, sum));
    std::vector<int> sample;
    for (int i : alive)
      if (rng.bernoulli(p)) sample.push_back(i);
    for (int i : sample)
      for (int x : h.hyperedges[i]) ++hits[x];
    for (int i : sample) {
      const auto& t = h.hyperedges[i];
      if (hits[t[0]] == 1 && hits[t[1]] == 1 && hits[t[2]] == 1) chosen.push_back(i);
    }
    for (int i : sample)
      for (int x : h.hyperedges[i]) hits[x] = 0;
    for (int i : chosen)
      for (int x : h.hyperedges[i]) covered[x] = 1;
    std::vector<int> next;
    next.reserve(alive.size());
    for (int i : alive) {
      const auto& t = h.hyperedges[i];
      if (!covered[t[0]] && !covered[t[1]] && !covered[t[2]]) next.push_back(i);
    }
    alive.swap(next);
  }
  out.nibble_size = static_cast<int>(chosen.size());
  detail::greedy_fill(h, alive, covered, chosen);
  std::sort(chosen.begin(), chosen.end());
  if (!is_matching(h, chosen)) throw Error(ErrorCode::InvalidArgument, "nibble produced overlapping triples");

  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) order[i] = i;
  Rng grng(derive_seed(seed, "greedy"));
  grng.shuffle(order);
  std::vector<char> gcov(static_cast<std::size_t>(h.n_vertices), 0);
  std::vector<int> greedy;
  detail::greedy_fill(h, order, gcov, greedy);
  std::sort(greedy.begin(), greedy.end());
  out.greedy_size = static_cast<int>(greedy.size());
  out.selected = greedy.size() > chosen.size() ? std::move(greedy) : std::move(chosen);
  return out;
}

struct TrianglePacking {
  std::vector<std::array<Vertex, 3>> triangles;  // sorted vertex triples
  EdgeSet uncovered;
  int edges_total = 0;
  double target = 0.0;  // (1 - beta) e(G) / 3
  HypergraphStats stats;

  int size() const { return static_cast<int>(triangles.size()); }
};

/// Edge-disjoint triangles of a tripartite graph via the triangle hypergraph.
inline TrianglePacking edge_disjoint_triangles(const Graph& g, const std::vector<int>& part, double beta,
                                               std::uint64_t seed) {
  auto h = triangle_hypergraph(g, part);
  auto mt = near_perfect_matching(h, beta, seed);
  TrianglePacking out;
  out.edges_total = h.n_vertices;
  out.target = (1.0 - beta) * h.n_vertices / 3.0;
  out.stats = hypergraph_stats(h, 0.25);
  std::vector<char> cov(static_cast<std::size_t>(h.n_vertices), 0);
  for (int i : mt.selected) {
    std::array<Vertex, 3> tri{};
    std::vector<Vertex> vs;
    for (int x : h.hyperedges[i]) {
      cov[x] = 1;
      vs.push_back(h.labels[x].u);
      vs.push_back(h.labels[x].v);
    }
    auto set = make_vertex_set(vs);
    std::copy(set.begin(), set.end(), tri.begin());
    out.triangles.push_back(tri);
  }
  for (int x = 0; x < h.n_vertices; ++x)
    if (!cov[x]) out.uncovered.push_back(h.labels[x]);
  return out;
}

inline void write_hypergraph(std::ostream& os, const Hypergraph3& h) {
  os << h.n_vertices << ' ' << h.m() << '\n';
  for (const auto& t : h.hyperedges) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline Hypergraph3 read_hypergraph(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(is, out)) {
      ++lineno;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line(line)) throw Error(ErrorCode::Parse, "empty hypergraph dump", 0);
  long long n = -1, m = -1;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> n >> m) || (ss >> extra) || n < 0 || m < 0) throw Error(ErrorCode::Parse, "bad header", lineno);
  }
  std::vector<Triple> ts;
  for (long long i = 0; i < m; ++i) {
    if (!next_line(line)) throw Error(ErrorCode::Parse, "missing hyperedge line", lineno + 1);
    std::istringstream ss(line);
    Triple t{};
    std::string extra;
    if (!(ss >> t[0] >> t[1] >> t[2]) || (ss >> extra)) throw Error(ErrorCode::Parse, "bad hyperedge", lineno);
    for (int x : t)
      if (x < 0 || x >= n) throw Error(ErrorCode::Parse, "hyperedge vertex out of range", lineno);
    ts.push_back(t);
  }
  if (next_line(line)) throw Error(ErrorCode::Parse, "trailing content", lineno);
  try {
    return make_hypergraph(static_cast<int>(n), std::move(ts));
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, e.what(), lineno);
  }
}

}  // namespace imforge
