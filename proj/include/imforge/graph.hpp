#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imforge/error.hpp"

namespace imforge {

using Vertex = int;
using Path = std::vector<Vertex>;
using VertexSet = std::vector<Vertex>;  // sorted, unique

struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  Edge() = default;
  Edge(Vertex a, Vertex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeSet = std::vector<Edge>;  // sorted, unique, normalized

inline std::uint64_t edge_key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

inline VertexSet make_vertex_set(std::vector<Vertex> vs) {
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

inline EdgeSet make_edge_set(std::vector<Edge> es) {
  std::sort(es.begin(), es.end());
  es.erase(std::unique(es.begin(), es.end()), es.end());
  return es;
}

/// Edges traversed by a vertex sequence, in order.
inline std::vector<Edge> path_edges(const Path& p) {
  std::vector<Edge> out;
  for (std::size_t i = 1; i < p.size(); ++i) out.emplace_back(p[i - 1], p[i]);
  return out;
}

/// Immutable simple undirected graph on vertices 0..n-1.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : adj_(static_cast<std::size_t>(n)), eid_(static_cast<std::size_t>(n)) {}

  int n() const { return static_cast<int>(adj_.size()); }
  int m() const { return static_cast<int>(edges_.size()); }
  int degree(Vertex v) const { return static_cast<int>(adj_[v].size()); }

  std::span<const Vertex> neighbors(Vertex v) const { return adj_[v]; }
  /// Edge ids parallel to neighbors(v).
  std::span<const int> incident(Vertex v) const { return eid_[v]; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_[id]; }

  int edge_id(Vertex a, Vertex b) const {
    if (a < 0 || b < 0 || a >= n() || b >= n() || a == b) return -1;
    if (adj_[a].size() > adj_[b].size()) std::swap(a, b);
    const auto& na = adj_[a];
    auto it = std::lower_bound(na.begin(), na.end(), b);
    if (it == na.end() || *it != b) return -1;
    return eid_[a][static_cast<std::size_t>(it - na.begin())];
  }
  bool has_edge(Vertex a, Vertex b) const { return edge_id(a, b) >= 0; }

  bool is_regular() const {
    for (int v = 1; v < n(); ++v)
      if (degree(v) != degree(0)) return false;
    return true;
  }
  int max_degree() const {
    int d = 0;
    for (int v = 0; v < n(); ++v) d = std::max(d, degree(v));
    return d;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n() == b.n() && a.edges_ == b.edges_;
  }

  // Precondition: es sorted, unique, normalized, in range, loop-free.
  static Graph from_sorted_edges(int n, std::vector<Edge> es) {
    Graph g(n);
    g.edges_ = std::move(es);
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& e : g.edges_) {
      ++deg[e.u];
      ++deg[e.v];
    }
    for (int v = 0; v < n; ++v) {
      g.adj_[v].reserve(deg[v]);
      g.eid_[v].reserve(deg[v]);
    }
    // Edges are sorted by (u, v), so pushing in this order keeps each
    // adjacency list sorted: lower neighbours arrive first via e.v, and
    // higher ones via e.u in ascending v.
    for (int id = 0; id < g.m(); ++id) {
      const auto& e = g.edges_[id];
      g.adj_[e.v].push_back(e.u);
      g.eid_[e.v].push_back(id);
    }
    for (int id = 0; id < g.m(); ++id) {
      const auto& e = g.edges_[id];
      g.adj_[e.u].push_back(e.v);
      g.eid_[e.u].push_back(id);
    }
    return g;
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
  std::vector<std::vector<int>> eid_;
};

inline Graph build_graph(int n, std::span<const std::pair<Vertex, Vertex>> edge_list) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative vertex count");
  std::vector<Edge> es;
  es.reserve(edge_list.size());
  for (auto [a, b] : edge_list) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw Error(ErrorCode::OutOfRange,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") with n=" +
                      std::to_string(n));
    if (a == b) throw Error(ErrorCode::SelfLoop, "loop at " + std::to_string(a));
    es.emplace_back(a, b);
  }
  return Graph::from_sorted_edges(n, make_edge_set(std::move(es)));
}

inline Graph build_graph(int n, const std::vector<std::pair<Vertex, Vertex>>& edge_list) {
  return build_graph(n, std::span<const std::pair<Vertex, Vertex>>(edge_list));
}

inline Graph build_graph(int n, const std::vector<Edge>& es) {
  std::vector<std::pair<Vertex, Vertex>> pairs;
  pairs.reserve(es.size());
  for (const auto& e : es) pairs.emplace_back(e.u, e.v);
  return build_graph(n, pairs);
}

inline Graph complete_graph(int n) {
  std::vector<Edge> es;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) es.emplace_back(a, b);
  return Graph::from_sorted_edges(n, std::move(es));
}

inline Graph cycle_graph(int n) {
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int i = 0; i < n; ++i) es.emplace_back(i, (i + 1) % n);
  return build_graph(n, es);
}

inline Graph path_graph(int n) {
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
  return build_graph(n, es);
}

/// Outer 5-cycle 0..4, spokes i -- i+5, inner pentagram on 5..9.
inline Graph petersen_graph() {
  std::vector<std::pair<Vertex, Vertex>> es;
  for (int i = 0; i < 5; ++i) {
    es.emplace_back(i, (i + 1) % 5);
    es.emplace_back(i, i + 5);
    es.emplace_back(5 + i, 5 + (i + 2) % 5);
  }
  return build_graph(10, es);
}

inline Graph complement(const Graph& g) {
  std::vector<Edge> es;
  for (int a = 0; a < g.n(); ++a) {
    auto na = g.neighbors(a);
    std::size_t k = 0;
    for (int b = a + 1; b < g.n(); ++b) {
      while (k < na.size() && na[k] < b) ++k;
      if (k < na.size() && na[k] == b) continue;
      es.emplace_back(a, b);
    }
  }
  return Graph::from_sorted_edges(g.n(), std::move(es));
}

/// Induced subgraph on `keep` (sorted); returns the graph relabelled 0..|keep|-1.
inline Graph induced_subgraph(const Graph& g, const VertexSet& keep) {
  std::vector<int> idx(static_cast<std::size_t>(g.n()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) idx[keep[i]] = static_cast<int>(i);
  std::vector<Edge> es;
  for (const auto& e : g.edges())
    if (idx[e.u] >= 0 && idx[e.v] >= 0) es.emplace_back(idx[e.u], idx[e.v]);
  return Graph::from_sorted_edges(static_cast<int>(keep.size()), make_edge_set(std::move(es)));
}

/// G \ W - U, evaluated lazily against an immutable base graph.
class GraphView {
 public:
  explicit GraphView(const Graph& g)
      : g_(&g),
        vdead_(static_cast<std::size_t>(g.n()), 0),
        edead_(static_cast<std::size_t>(g.m()), 0) {}

  const Graph& base() const { return *g_; }
  int n() const { return g_->n(); }

  bool alive(Vertex v) const { return !vdead_[v]; }
  bool edge_alive(int id) const {
    const Edge& e = g_->edge(id);
    return !edead_[id] && !vdead_[e.u] && !vdead_[e.v];
  }
  bool has_edge(Vertex a, Vertex b) const {
    int id = g_->edge_id(a, b);
    return id >= 0 && edge_alive(id);
  }

  int degree(Vertex v) const {
    if (vdead_[v]) return 0;
    int d = 0;
    auto nb = g_->neighbors(v);
    auto ids = g_->incident(v);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (!edead_[ids[k]] && !vdead_[nb[k]]) ++d;
    return d;
  }

  template <class F>
  void for_each_neighbor(Vertex v, F&& f) const {
    if (vdead_[v]) return;
    auto nb = g_->neighbors(v);
    auto ids = g_->incident(v);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (!edead_[ids[k]] && !vdead_[nb[k]]) f(nb[k], ids[k]);
  }

  std::vector<Vertex> neighbors(Vertex v) const {
    std::vector<Vertex> out;
    for_each_neighbor(v, [&](Vertex w, int) { out.push_back(w); });
    return out;
  }

  void remove_vertex(Vertex v) { vdead_[v] = 1; }
  void restore_vertex(Vertex v) { vdead_[v] = 0; }
  void remove_edge_id(int id) { edead_[id] = 1; }
  void restore_edge_id(int id) { edead_[id] = 0; }
  /// Returns false (and counts the pair as ignored) when (a,b) is not an edge of the base.
  bool remove_edge(Vertex a, Vertex b) {
    int id = g_->edge_id(a, b);
    if (id < 0) {
      ++ignored_;
      return false;
    }
    edead_[id] = 1;
    return true;
  }

  int ignored_pairs() const { return ignored_; }

  int edge_count() const {
    int c = 0;
    for (int id = 0; id < g_->m(); ++id) c += edge_alive(id);
    return c;
  }

  /// Same vertex ids; removed vertices become isolated.
  Graph materialize() const {
    std::vector<Edge> es;
    for (int id = 0; id < g_->m(); ++id)
      if (edge_alive(id)) es.push_back(g_->edge(id));
    return Graph::from_sorted_edges(g_->n(), std::move(es));
  }

 private:
  const Graph* g_;
  std::vector<char> vdead_;
  std::vector<char> edead_;
  int ignored_ = 0;
};

inline GraphView view_minus(const Graph& g, const VertexSet& U, const EdgeSet& W) {
  GraphView view(g);
  for (Vertex v : U) {
    if (v < 0 || v >= g.n()) throw Error(ErrorCode::OutOfRange, "vertex " + std::to_string(v));
    view.remove_vertex(v);
  }
  for (const auto& e : W) view.remove_edge(e.u, e.v);
  return view;
}

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t a, std::int64_t b) {
    std::int64_t g = std::gcd(a, b);
    if (g == 0) g = 1;
    return {a / g, b / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
};

inline std::vector<char> membership(int n, const VertexSet& s) {
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Vertex v : s) in[v] = 1;
  return in;
}

/// e(A, B) for disjoint A, B.
inline std::int64_t edges_between(const Graph& g, const VertexSet& A, const VertexSet& B) {
  auto inB = membership(g.n(), B);
  std::int64_t e = 0;
  for (Vertex a : A)
    for (Vertex w : g.neighbors(a)) e += inB[w];
  return e;
}

inline Rational pair_density(const Graph& g, const VertexSet& A, const VertexSet& B) {
  if (A.empty() || B.empty()) throw Error(ErrorCode::EmptySide, "pair_density needs nonempty sides");
  auto inA = membership(g.n(), A);
  for (Vertex b : B)
    if (inA[b]) throw Error(ErrorCode::Overlap, "vertex " + std::to_string(b) + " on both sides");
  return Rational::make(edges_between(g, A, B),
                        static_cast<std::int64_t>(A.size()) * static_cast<std::int64_t>(B.size()));
}

inline int codegree(const Graph& g, Vertex u, Vertex v) {
  if (u == v) throw Error(ErrorCode::SameVertex, "codegree of a vertex with itself");
  auto a = g.neighbors(u);
  auto b = g.neighbors(v);
  int c = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (a[i] > b[j]) ++j;
    else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

// Edge-list text format: "n m" then m lines "u v".

inline void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.n() << ' ' << g.m() << '\n';
  for (const auto& e : g.edges()) os << e.u << ' ' << e.v << '\n';
}

inline Graph read_edge_list(std::istream& is) {
  std::string line;
  long long lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(is, out)) {
      ++lineno;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line(line)) throw Error(ErrorCode::Parse, "missing header", 1);
  long long n = -1, m = -1;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> n >> m) || (ss >> extra) || n < 0 || m < 0 || n > (1LL << 30))
      throw Error(ErrorCode::Parse, "bad header '" + line + "'", lineno);
  }
  std::vector<Edge> es;
  es.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    if (!next_line(line)) throw Error(ErrorCode::Parse, "expected edge line", lineno + 1);
    std::istringstream ss(line);
    long long a, b;
    std::string extra;
    if (!(ss >> a >> b) || (ss >> extra) || a < 0 || b < 0 || a >= n || b >= n || a == b)
      throw Error(ErrorCode::Parse, "bad edge '" + line + "'", lineno);
    es.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(b));
  }
  if (next_line(line)) throw Error(ErrorCode::Parse, "trailing content", lineno);
  return Graph::from_sorted_edges(static_cast<int>(n), make_edge_set(std::move(es)));
}

}  // namespace imforge
