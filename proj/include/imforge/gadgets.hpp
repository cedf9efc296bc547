#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imforge/certificate.hpp"
#include "imforge/error.hpp"
#include "imforge/expander.hpp"
#include "imforge/graph.hpp"
#include "imforge/pipeline.hpp"
#include "imforge/rng.hpp"

namespace imforge {

// ---------------------------------------------------------------------------
// Even cycles and expansions

/// Shortest even cycle of length <= max_len in the view, as a vertex cycle
/// c[0..L-1] with c[0] its minimum vertex. max_len < 0 means unbounded.
inline std::optional<Path> shortest_even_cycle(const GraphView& view, int max_len = -1) {
  const int n = view.n();
  if (max_len < 0) max_len = n;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<char> on(static_cast<std::size_t>(n), 0);
  for (int L = 4; L <= max_len; L += 2) {
    for (Vertex s = 0; s < n; ++s) {
      if (!view.alive(s)) continue;
      // Distances from s within vertices >= s, for pruning.
      std::fill(dist.begin(), dist.end(), -1);
      std::vector<Vertex> q{s};
      dist[s] = 0;
      for (std::size_t h = 0; h < q.size(); ++h)
        view.for_each_neighbor(q[h], [&](Vertex w, int) {
          if (w > s && dist[w] < 0) {
            dist[w] = dist[q[h]] + 1;
            q.push_back(w);
          }
        });
      Path path{s};
      on[s] = 1;
      std::function<bool(Vertex)> dfs = [&](Vertex x) -> bool {
        int len = static_cast<int>(path.size()) - 1;
        if (len == L - 1) {
          bool closes = false;
          view.for_each_neighbor(x, [&](Vertex w, int) { closes |= w == s; });
          return closes;
        }
        std::vector<Vertex> nb;
        view.for_each_neighbor(x, [&](Vertex w, int) { nb.push_back(w); });
        for (Vertex w : nb) {
          if (w <= s || on[w] || dist[w] < 0) continue;
          // Remaining steps after w: L - 1 - (len + 1), then one edge back to s.
          if (dist[w] > L - (len + 1)) continue;
          on[w] = 1;
          path.push_back(w);
          if (dfs(w)) return true;
          path.pop_back();
          on[w] = 0;
        }
        return false;
      };
      bool found = dfs(s);
      for (Vertex v : path) on[v] = 0;
      if (found) return path;
    }
  }
  return std::nullopt;
}

inline std::optional<Path> shortest_even_cycle(const Graph& g, int max_len = -1) {
  return shortest_even_cycle(view_minus(g, {}, {}), max_len);
}

/// BFS-order prefix of size D2 of an expansion.
inline Expansion trim_expansion(const Expansion& F, int D2) {
  if (D2 < 1 || D2 > F.size())
    throw Error(ErrorCode::BadSize, "trim size " + std::to_string(D2) + " outside [1, " + std::to_string(F.size()) + "]",
                D2, F.size());
  Expansion out;
  out.vertices.assign(F.vertices.begin(), F.vertices.begin() + D2);
  out.parent.assign(F.parent.begin(), F.parent.begin() + D2);
  return out;
}

/// BFS expansion of `root` with up to D vertices at depth <= m, neighbours in
/// ascending order, avoiding vertices with blocked[v] set.
inline Expansion grow_expansion(const GraphView& view, Vertex root, int D, int m, const std::vector<char>& blocked) {
  Expansion e;
  std::vector<int> depth(static_cast<std::size_t>(view.n()), -1);
  e.vertices.push_back(root);
  e.parent.push_back(-1);
  depth[root] = 0;
  for (std::size_t h = 0; h < e.vertices.size() && e.size() < D; ++h) {
    Vertex x = e.vertices[h];
    if (depth[x] >= m) continue;
    view.for_each_neighbor(x, [&](Vertex w, int) {
      if (e.size() >= D || depth[w] >= 0 || blocked[w]) return;
      depth[w] = depth[x] + 1;
      e.vertices.push_back(w);
      e.parent.push_back(x);
    });
  }
  return e;
}

// ---------------------------------------------------------------------------
// Adjusters

/// 1-adjuster from a shortest even cycle C (length 2r): cores at cycle distance
/// r-1, A = C minus the cores, ends grown alternately off C. cap < 0 uses m/16.
inline Adjuster build_1_adjuster(const Graph& g, const VertexSet& U, const EdgeSet& W, int D, int m, int cap = -1) {
  if (D < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "adjuster needs D, m >= 1");
  auto view = view_minus(g, U, W);
  if (cap < 0) cap = m / 16;
  auto cyc = shortest_even_cycle(view, cap);
  if (!cyc) throw Error(ErrorCode::NoEvenCycle, "no even cycle of length <= " + std::to_string(cap), cap);
  const Path& C = *cyc;
  const int L = static_cast<int>(C.size());
  const int r = L / 2;
  Adjuster a;
  a.D = D;
  a.m = m;
  a.k = 1;
  a.ell = r - 1;
  a.u1 = C[0];
  a.u2 = C[r - 1];
  for (int i = 0; i < L; ++i)
    if (i != 0 && i != r - 1) a.A.push_back(C[i]);
  a.A = make_vertex_set(a.A);
  Path p0(C.begin(), C.begin() + r);
  Path p1{C[0]};
  for (int i = L - 1; i >= r - 1; --i) p1.push_back(C[i]);
  a.realizers = {p0, p1};

  // Grow both ends one vertex at a time, alternating.
  std::vector<char> blocked(static_cast<std::size_t>(g.n()), 0);
  for (Vertex v : C) blocked[v] = 1;
  std::vector<int> depth(static_cast<std::size_t>(g.n()), -1);
  Expansion ends[2];
  std::size_t head[2] = {0, 0};
  Vertex roots[2] = {a.u1, a.u2};
  for (int s = 0; s < 2; ++s) {
    ends[s].vertices.push_back(roots[s]);
    ends[s].parent.push_back(-1);
    depth[roots[s]] = 0;
  }
  auto step = [&](int s) -> bool {
    auto& e = ends[s];
    while (head[s] < e.vertices.size()) {
      Vertex x = e.vertices[head[s]];
      if (depth[x] < m) {
        Vertex pick = -1;
        view.for_each_neighbor(x, [&](Vertex w, int) {
          if (pick < 0 && !blocked[w] && depth[w] < 0) pick = w;
        });
        if (pick >= 0) {
          depth[pick] = depth[x] + 1;
          e.vertices.push_back(pick);
          e.parent.push_back(x);
          return true;
        }
      }
      ++head[s];
    }
    return false;
  };
  while (ends[0].size() < D || ends[1].size() < D) {
    bool progress = false;
    for (int s = 0; s < 2; ++s)
      if (ends[s].size() < D) progress |= step(s);
    if (!progress) break;
  }
  if (ends[0].size() < D || ends[1].size() < D)
    throw Error(ErrorCode::ExpansionFailed,
                "ends reached " + std::to_string(ends[0].size()) + " and " + std::to_string(ends[1].size()) + " of D=" +
                    std::to_string(D),
                std::min(ends[0].size(), ends[1].size()), D);
  a.I1 = ends[0];
  a.I2 = ends[1];
  return a;
}

namespace detail {

inline Path reversed(Path p) {
  std::reverse(p.begin(), p.end());
  return p;
}

inline bool is_simple(const Path& p) {
  auto s = p;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}

}  // namespace detail

/// Joins an end of A1 to an end of A2 by a short avoiding path extended
/// through both ends; the result keeps the two unused ends. A missing A2
/// returns A1 unchanged.
inline Adjuster chain_adjusters(const Graph& g, const Adjuster& A1, const std::optional<Adjuster>& A2,
                                const VertexSet& U, const EdgeSet& W, int m) {
  if (!A2) return A1;
  const Adjuster& B = *A2;
  const Expansion* endsA[2] = {&A1.I1, &A1.I2};
  const Expansion* endsB[2] = {&B.I1, &B.I2};
  std::string last_reason = "no connecting path";
  for (int ea = 1; ea >= 0; --ea)
    for (int eb = 0; eb < 2; ++eb) {
      const Expansion& X = *endsA[ea];
      const Expansion& Y = *endsB[eb];
      const Expansion& keepA = *endsA[1 - ea];
      const Expansion& keepB = *endsB[1 - eb];
      // Forbid both centres and the two kept ends.
      std::vector<Vertex> forbid(U.begin(), U.end());
      forbid.insert(forbid.end(), A1.A.begin(), A1.A.end());
      forbid.insert(forbid.end(), B.A.begin(), B.A.end());
      forbid.insert(forbid.end(), keepA.vertices.begin(), keepA.vertices.end());
      forbid.insert(forbid.end(), keepB.vertices.begin(), keepB.vertices.end());
      auto view = view_minus(g, make_vertex_set(forbid), W);
      Path P;
      try {
        P = short_avoiding_path(view, X.vertex_set(), Y.vertex_set(), m);
      } catch (const Error& e) {
        last_reason = e.what();
        continue;
      }
      // Root of X ... P ... root of Y.
      Path Q = X.path_from_root(P.front());
      Q.insert(Q.end(), P.begin() + 1, P.end());
      Path tailY = detail::reversed(Y.path_from_root(P.back()));
      Q.insert(Q.end(), tailY.begin() + 1, tailY.end());
      auto fset = make_vertex_set(forbid);
      bool clash = !detail::is_simple(Q);
      for (std::size_t k = 1; k + 1 < Q.size() && !clash; ++k)
        clash = std::binary_search(fset.begin(), fset.end(), Q[k]);
      for (Vertex v : {Q.front(), Q.back()})
        clash = clash || std::binary_search(fset.begin(), fset.end(), v);
      if (clash) {
        last_reason = "connector meets a centre or kept end";
        continue;
      }
      // Realizers of A1 oriented towards X's root, of B away from Y's root.
      auto orientA = [&](const Path& p) { return ea == 1 ? p : detail::reversed(p); };
      auto orientB = [&](const Path& p) { return eb == 0 ? p : detail::reversed(p); };
      Adjuster out;
      out.D = std::min(A1.D, B.D);
      out.m = m;
      out.k = A1.k + B.k;
      const int lenQ = static_cast<int>(Q.size()) - 1;
      out.ell = A1.ell + B.ell + lenQ;
      out.I1 = keepA;
      out.I2 = keepB;
      out.u1 = keepA.root();
      out.u2 = keepB.root();
      std::vector<Vertex> cen(A1.A.begin(), A1.A.end());
      cen.insert(cen.end(), B.A.begin(), B.A.end());
      cen.insert(cen.end(), Q.begin(), Q.end());
      out.A = make_vertex_set(cen);
      bool ok = true;
      for (int s = 0; s <= out.k && ok; ++s) {
        int i = std::min(s, A1.k), j = s - i;
        Path ra = orientA(A1.realizers[i]);
        Path rb = orientB(B.realizers[j]);
        Path R = ra;
        R.insert(R.end(), Q.begin() + 1, Q.end());
        R.insert(R.end(), rb.begin() + 1, rb.end());
        if (!detail::is_simple(R)) ok = false;
        out.realizers.push_back(std::move(R));
      }
      if (!ok) {
        last_reason = "composed realizer not simple";
        continue;
      }
      return out;
    }
  throw Error(ErrorCode::NoConnection, "cannot chain adjusters: " + last_reason);
}

// ---------------------------------------------------------------------------
// Bipartite K_p^(3) immersion

struct K3Diagnostics {
  double alpha = 0;
  double p_bound = 0;  // min(alpha n1 / 16, alpha^2 n2 / 192)
  int b = -1;
  int candidates = 0;
  int A0 = 0, A1 = 0, A2 = 0;
  long long bad_pairs = 0;
  int paths = 0;
  int stuck = 0;
  int achieved_order = 0;
};

struct K3Result {
  EmbeddingCertificate cert;
  K3Diagnostics diag;
};

/// Side A is 0..n1-1, side B is n1..n-1; every edge crosses.
inline K3Result bipartite_k3_immersion(const Graph& h, int n1, int p, std::uint64_t seed, RunMode mode) {
  const int n = h.n();
  const int n2 = n - n1;
  if (n1 < 1 || n2 < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "need n1, n2, p >= 1");
  for (const auto& e : h.edges())
    if ((e.u < n1) == (e.v < n1)) throw Error(ErrorCode::BadPartition, "edge inside one side", e.u, e.v);
  K3Result res;
  auto& dg = res.diag;
  dg.alpha = static_cast<double>(h.m()) / (static_cast<double>(n1) * n2);
  dg.p_bound = std::min(dg.alpha * n1 / 16.0, dg.alpha * dg.alpha * n2 / 192.0);
  const bool strict = mode == RunMode::Strict;
  if (strict && p > dg.p_bound + 1e-9) throw Error(ErrorCode::PreconditionFailed, "p above min(alpha n1/16, alpha^2 n2/192)");
  auto& cert = res.cert;
  cert.kind = EmbeddingKind::Immersion;
  cert.ell = 3;
  if (p == 1) {
    cert.branch = {0};
    dg.achieved_order = 1;
    return res;
  }

  // Codegrees inside A via bitsets over B.
  const int words = (n2 + 63) / 64;
  std::vector<std::uint64_t> bits(static_cast<std::size_t>(n1) * words, 0);
  for (int a = 0; a < n1; ++a)
    for (Vertex b : h.neighbors(a)) {
      int x = b - n1;
      bits[static_cast<std::size_t>(a) * words + x / 64] |= 1ULL << (x % 64);
    }
  std::vector<int> co(static_cast<std::size_t>(n1) * n1, 0);
  for (int a = 0; a < n1; ++a)
    for (int c = a + 1; c < n1; ++c) {
      int s = 0;
      for (int w = 0; w < words; ++w)
        s += __builtin_popcountll(bits[static_cast<std::size_t>(a) * words + w] & bits[static_cast<std::size_t>(c) * words + w]);
      co[static_cast<std::size_t>(a) * n1 + c] = co[static_cast<std::size_t>(c) * n1 + a] = s;
    }
  auto codeg = [&](int a, int c) { return co[static_cast<std::size_t>(a) * n1 + c]; };
  const int thr = 3 * p;

  // Candidate b: maximise X^2 - E[X]^2 Y / (2 E[Y]) with E[Y] at its bound.
  std::vector<Vertex> cand;
  for (int b = n1; b < n; ++b) cand.push_back(b);
  if (cand.size() > 64) {
    Rng rng(derive_seed(seed, "k3-candidates"));
    rng.shuffle(cand);
    cand.resize(64);
    std::sort(cand.begin(), cand.end());
  }
  dg.candidates = static_cast<int>(cand.size());
  const double EX = dg.alpha * n1;
  const double EY = std::max(1e-9, 3.0 * p * n1 * static_cast<double>(n1) / (2.0 * n2));
  double best = -1e300;
  long long bestY = 0;
  for (Vertex b : cand) {
    auto nb = h.neighbors(b);
    long long Y = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) Y += codeg(nb[i], nb[j]) < thr;
    double X = static_cast<double>(nb.size());
    double score = X * X - EX * EX * static_cast<double>(Y) / (2.0 * EY);
    if (score > best) {
      best = score;
      dg.b = b;
      bestY = Y;
    }
  }
  dg.bad_pairs = bestY;
  VertexSet A0(h.neighbors(dg.b).begin(), h.neighbors(dg.b).end());
  dg.A0 = static_cast<int>(A0.size());
  VertexSet A2;
  for (Vertex u : A0) {
    int bad = 0;
    for (Vertex w : A0)
      if (w != u && codeg(u, w) < thr) ++bad;
    if (16 * bad > static_cast<int>(A0.size())) ++dg.A1;
    else A2.push_back(u);
  }
  dg.A2 = static_cast<int>(A2.size());
  if (static_cast<int>(A2.size()) < p + 1) {
    if (strict) throw Error(ErrorCode::Insufficient, "A2 too small", static_cast<std::int64_t>(A2.size()), p);
  }
  int p_eff = std::min<int>(p, static_cast<int>(A2.size()) - 1);
  if (p_eff < 1) p_eff = std::min<int>(1, static_cast<int>(A2.size()));
  VertexSet A4(A2.begin(), A2.begin() + p_eff);
  VertexSet A3(A2.begin() + p_eff, A2.end());

  EdgeLedger ledger(h);
  std::vector<char> appeared(static_cast<std::size_t>(n), 0);
  std::vector<int> occupancy(static_cast<std::size_t>(n1), 0);  // |N(a) n appeared| per a
  auto appear = [&](Vertex v) {
    if (appeared[v]) return;
    appeared[v] = 1;
    if (v >= n1)
      for (Vertex a : h.neighbors(v)) ++occupancy[a];
  };
  std::map<std::pair<int, int>, Path> link;
  std::vector<std::pair<int, int>> missing;
  auto common_free = [&](Vertex u, Vertex a, Vertex avoid) -> Vertex {
    auto nu = h.neighbors(u);
    auto na = h.neighbors(a);
    std::size_t x = 0, y = 0;
    while (x < nu.size() && y < na.size()) {
      if (nu[x] < na[y]) ++x;
      else if (na[y] < nu[x]) ++y;
      else {
        Vertex b = nu[x];
        if (b != avoid && ledger.is_free(u, b) && ledger.is_free(b, a)) return b;
        ++x;
        ++y;
      }
    }
    return -1;
  };
  for (int i = 0; i < p_eff; ++i)
    for (int j = i + 1; j < p_eff; ++j) {
      Vertex u = A4[i], v = A4[j];
      std::optional<Path> found;
      for (int pass = 0; pass < 2 && !found; ++pass)
        for (Vertex a : A3) {
          if (codeg(u, a) < thr || codeg(v, a) < thr) continue;
          bool nice = occupancy[a] <= p;
          if ((pass == 0) != nice) continue;
          Vertex bi = common_free(u, a, -1);
          if (bi < 0) continue;
          Vertex bj = common_free(v, a, bi);
          if (bj < 0) continue;
          found = Path{u, bi, a, bj, v};
          break;
        }
      if (found && ledger.claim(*found, static_cast<int>(link.size()))) {
        for (Vertex x : *found) appear(x);
        link[{i, j}] = *found;
      } else {
        if (strict) throw Error(ErrorCode::Stuck, "pair " + std::to_string(u) + "," + std::to_string(v), u, v);
        missing.emplace_back(i, j);
      }
    }
  dg.paths = static_cast<int>(link.size());
  dg.stuck = static_cast<int>(missing.size());
  auto keep = peel_missing(p_eff, missing);
  for (int k : keep) cert.branch.push_back(A4[k]);
  for (int x = 0; x < static_cast<int>(keep.size()); ++x)
    for (int y = x + 1; y < static_cast<int>(keep.size()); ++y) cert.pairs.push_back({x, y, link.at({keep[x], keep[y]})});
  dg.achieved_order = static_cast<int>(cert.branch.size());
  return res;
}

inline nlohmann::ordered_json to_json(const K3Diagnostics& d) {
  nlohmann::ordered_json j;
  j["alpha"] = d.alpha;
  j["p_bound"] = d.p_bound;
  j["b"] = d.b;
  j["candidates"] = d.candidates;
  j["A0"] = d.A0;
  j["A1"] = d.A1;
  j["A2"] = d.A2;
  j["bad_pairs"] = d.bad_pairs;
  j["paths"] = d.paths;
  j["stuck"] = d.stuck;
  j["achieved_order"] = d.achieved_order;
  return j;
}

}  // namespace imforge
