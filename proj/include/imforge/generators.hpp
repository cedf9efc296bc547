#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"
#include "imforge/rng.hpp"

namespace imforge {

namespace detail {

// One attempt: random pairing of n*d points, then double-edge switches that
// remove loops and repeated pairs. Returns false when the failure budget runs out.
inline bool pairing_with_repair(int n, int d, Rng& rng, long long budget, std::vector<Edge>& out) {
  std::vector<Vertex> pts;
  pts.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) pts.push_back(v);
  rng.shuffle(pts);
  const std::size_t m = pts.size() / 2;
  std::vector<std::pair<Vertex, Vertex>> E(m);
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(m * 2);
  for (std::size_t i = 0; i < m; ++i) {
    E[i] = {pts[2 * i], pts[2 * i + 1]};
    if (E[i].first != E[i].second) ++count[edge_key(E[i].first, E[i].second)];
  }
  auto is_bad = [&](std::size_t i) {
    auto [a, b] = E[i];
    return a == b || count[edge_key(a, b)] > 1;
  };
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < m; ++i)
    if (is_bad(i)) bad.push_back(i);

  long long failures = 0;
  while (!bad.empty()) {
    std::size_t i = bad.back();
    if (!is_bad(i)) {
      bad.pop_back();
      continue;
    }
    std::size_t j = static_cast<std::size_t>(rng.below(m));
    auto [a, b] = E[i];
    auto [c, e] = E[j];
    if (rng.bernoulli(0.5)) std::swap(c, e);
    auto absent = [&](Vertex x, Vertex y) {
      if (x == y) return false;
      auto it = count.find(edge_key(x, y));
      return it == count.end() || it->second == 0;
    };
    if (j == i || !absent(a, c) || !absent(b, e) || edge_key(a, c) == edge_key(b, e)) {
      if (++failures > budget) return false;
      continue;
    }
    if (a != b) --count[edge_key(a, b)];
    if (c != e) --count[edge_key(c, e)];
    E[i] = {a, c};
    E[j] = {b, e};
    ++count[edge_key(a, c)];
    ++count[edge_key(b, e)];
    bad.pop_back();
  }
  out.clear();
  out.reserve(m);
  for (auto [a, b] : E) out.emplace_back(a, b);
  return true;
}

}  // namespace detail

/// Simple d-regular graph on n vertices, deterministic in seed.
inline Graph random_regular(int n, int d, std::uint64_t seed) {
  if (n <= 0 || d < 0 || d >= n)
    throw Error(ErrorCode::InvalidArgument, "need 0 <= d < n, got n=" + std::to_string(n) +
                                                " d=" + std::to_string(d));
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw Error(ErrorCode::ParityViolation, "n*d must be even");
  if (d == 0) return Graph(n);
  if (d > n / 2) return complement(random_regular(n, n - 1 - d, seed));
  Rng rng(derive_seed(seed, "random_regular"));
  std::vector<Edge> es;
  const long long budget = 100LL * n;
  for (int attempt = 0; attempt < 20; ++attempt)
    if (detail::pairing_with_repair(n, d, rng, budget, es))
      return Graph::from_sorted_edges(n, make_edge_set(std::move(es)));
  throw Error(ErrorCode::GenerationFailed, "pairing repair budget exhausted");
}

inline bool is_prime(long long q) {
  if (q < 2) return false;
  for (long long p = 2; p * p <= q; ++p)
    if (q % p == 0) return false;
  return true;
}

/// Paley graph on Z_q for a prime q ≡ 1 (mod 4).
inline Graph paley(int q) {
  if (!is_prime(q) || q % 4 != 1)
    throw Error(ErrorCode::BadModulus, std::to_string(q) + " is not a prime = 1 mod 4");
  std::vector<char> residue(static_cast<std::size_t>(q), 0);
  for (long long x = 1; x < q; ++x) residue[static_cast<std::size_t>(x * x % q)] = 1;
  std::vector<Edge> es;
  for (int a = 0; a < q; ++a)
    for (int b = a + 1; b < q; ++b)
      if (residue[static_cast<std::size_t>(b - a)]) es.emplace_back(a, b);
  return Graph::from_sorted_edges(q, std::move(es));
}

/// Sides are 0..n1-1 and n1..n1+n2-1.
inline Graph complete_bipartite(int n1, int n2) {
  std::vector<Edge> es;
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b) es.emplace_back(a, n1 + b);
  return Graph::from_sorted_edges(n1 + n2, std::move(es));
}

inline Graph random_bipartite(int n1, int n2, double p, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random_bipartite"));
  std::vector<Edge> es;
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b)
      if (rng.bernoulli(p)) es.emplace_back(a, n1 + b);
  return Graph::from_sorted_edges(n1 + n2, std::move(es));
}

struct Tripartite {
  Graph graph;
  std::vector<int> part;  // 0, 1 or 2 per vertex
};

/// Parts of sizes a, b, c in that order; each cross pair is an edge with probability p.
inline Tripartite random_tripartite(int a, int b, int c, double p, std::uint64_t seed) {
  if (a < 0 || b < 0 || c < 0) throw Error(ErrorCode::InvalidArgument, "part sizes must be >= 0");
  Rng rng(derive_seed(seed, "random_tripartite"));
  Tripartite t;
  t.part.insert(t.part.end(), static_cast<std::size_t>(a), 0);
  t.part.insert(t.part.end(), static_cast<std::size_t>(b), 1);
  t.part.insert(t.part.end(), static_cast<std::size_t>(c), 2);
  const int n = a + b + c;
  std::vector<Edge> es;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (t.part[u] != t.part[v] && rng.bernoulli(p)) es.emplace_back(u, v);
  t.graph = Graph::from_sorted_edges(n, std::move(es));
  return t;
}

inline Graph hypercube(int k) {
  const int n = 1 << k;
  std::vector<Edge> es;
  for (int v = 0; v < n; ++v)
    for (int b = 0; b < k; ++b) {
      int w = v ^ (1 << b);
      if (v < w) es.emplace_back(v, w);
    }
  return Graph::from_sorted_edges(n, make_edge_set(std::move(es)));
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_edge_list(in);
}

inline void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_edge_list(out, g);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace imforge
