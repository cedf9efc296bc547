#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"
#include "imforge/rng.hpp"

namespace imforge {

struct ExpanderParams {
  double eps1 = 0.125;
  double eps2 = 0.2;
  double k = 1.0;
};

inline double rho(double x, const ExpanderParams& p) {
  if (x < p.k / 5.0) return 0.0;
  double l = std::log(15.0 * x / p.k);
  return p.eps1 / (l * l);
}

inline double mix_length_m(double n, double d, const ExpanderParams& p) {
  if (n <= 0 || d <= 0 || p.eps1 <= 0 || p.eps2 <= 0)
    throw Error(ErrorCode::DomainError, "m needs positive n, d, eps1, eps2");
  double ratio = 15.0 * n / (p.eps2 * d);
  if (ratio <= 1.0) throw Error(ErrorCode::DomainError, "m needs eps2*d < 15n");
  double l = std::log(ratio);
  return 2.0 / p.eps1 * l * l * l;
}

// ---------------------------------------------------------------------------
// Breadth-first routing

/// Reusable BFS scratch space; avoids O(n) clears between many small searches.
class BfsWorkspace {
 public:
  explicit BfsWorkspace(int n = 0) { resize(n); }
  void resize(int n) {
    if (static_cast<int>(stamp_.size()) < n) {
      stamp_.assign(static_cast<std::size_t>(n), 0);
      dist_.assign(static_cast<std::size_t>(n), 0);
      parent_.assign(static_cast<std::size_t>(n), -1);
      cur_ = 0;
    }
  }
  void next() {
    if (++cur_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      cur_ = 1;
    }
  }
  bool seen(Vertex v) const { return stamp_[v] == cur_; }
  void mark(Vertex v, int d, Vertex parent) {
    stamp_[v] = cur_;
    dist_[v] = d;
    parent_[v] = parent;
  }
  int dist(Vertex v) const { return dist_[v]; }
  Vertex parent(Vertex v) const { return parent_[v]; }
  std::vector<Vertex>& queue() { return queue_; }

 private:
  std::vector<unsigned> stamp_;
  std::vector<int> dist_;
  std::vector<Vertex> parent_;
  std::vector<Vertex> queue_;
  unsigned cur_ = 0;
};

/// Shortest path from any source to a vertex accepted by is_target. Interior
/// vertices must satisfy interior_ok and every edge edge_ok(edge id). Sources
/// are scanned in the given order; neighbours in ascending id.
template <class TargetF, class InteriorF, class EdgeF>
std::optional<Path> bfs_route(const Graph& g, const std::vector<Vertex>& sources,
                              TargetF&& is_target, InteriorF&& interior_ok, EdgeF&& edge_ok,
                              int max_len, BfsWorkspace& ws) {
  ws.resize(g.n());
  ws.next();
  auto& q = ws.queue();
  q.clear();
  for (Vertex s : sources) {
    if (ws.seen(s)) continue;
    if (is_target(s)) return Path{s};
    ws.mark(s, 0, -1);
    q.push_back(s);
  }
  for (std::size_t head = 0; head < q.size(); ++head) {
    Vertex u = q[head];
    int du = ws.dist(u);
    if (du >= max_len) continue;
    auto nb = g.neighbors(u);
    auto ids = g.incident(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      Vertex w = nb[k];
      if (ws.seen(w) || !edge_ok(ids[k])) continue;
      if (is_target(w)) {
        Path p{w};
        for (Vertex x = u; x >= 0; x = ws.parent(x)) p.push_back(x);
        std::reverse(p.begin(), p.end());
        return p;
      }
      if (!interior_ok(w)) continue;
      ws.mark(w, du + 1, u);
      q.push_back(w);
    }
  }
  return std::nullopt;
}

/// (X1, X2)-path in the view: endpoints in X1 and X2, interior outside both.
inline Path short_avoiding_path(const GraphView& view, const VertexSet& X1, const VertexSet& X2,
                                int max_len) {
  const Graph& g = view.base();
  auto in1 = membership(g.n(), X1);
  auto in2 = membership(g.n(), X2);
  std::vector<Vertex> src;
  for (Vertex x : X1)
    if (view.alive(x)) src.push_back(x);
  bool any2 = false;
  for (Vertex x : X2) any2 |= view.alive(x);
  if (src.empty() || !any2) throw Error(ErrorCode::InvalidArgument, "X1 and X2 must meet the view");
  BfsWorkspace ws(g.n());
  auto p = bfs_route(
      g, src, [&](Vertex v) { return in2[v] && view.alive(v); },
      [&](Vertex v) { return view.alive(v) && !in1[v] && !in2[v]; },
      [&](int id) { return view.edge_alive(id); }, max_len, ws);
  if (!p) throw Error(ErrorCode::NoPath, "no path within " + std::to_string(max_len), max_len);
  return *p;
}

// ---------------------------------------------------------------------------
// Robust expansion audit

struct ExpansionWitness {
  VertexSet X;
  EdgeSet F;
  int neighborhood = 0;
  double required = 0.0;
};

struct ExpansionAudit {
  bool pass = true;
  int checked = 0;
  std::optional<ExpansionWitness> witness;
};

namespace detail {

// Adversary: delete whole outside neighbours, cheapest first, within the edge budget.
inline ExpansionWitness expansion_attack(const Graph& g, const VertexSet& X, double budget) {
  auto inX = membership(g.n(), X);
  std::vector<std::vector<Edge>> into;  // boundary edges grouped by outside endpoint
  std::vector<int> slot(static_cast<std::size_t>(g.n()), -1);
  std::vector<Vertex> outside;
  for (Vertex x : X)
    for (Vertex w : g.neighbors(x)) {
      if (inX[w]) continue;
      if (slot[w] < 0) {
        slot[w] = static_cast<int>(outside.size());
        outside.push_back(w);
        into.emplace_back();
      }
      into[slot[w]].emplace_back(x, w);
    }
  std::vector<int> order(outside.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (into[a].size() != into[b].size()) return into[a].size() < into[b].size();
    return outside[a] < outside[b];
  });
  ExpansionWitness w;
  w.X = X;
  long long left = static_cast<long long>(std::floor(budget + 1e-9));
  int remaining = static_cast<int>(outside.size());
  for (int i : order) {
    if (static_cast<long long>(into[i].size()) > left) break;
    left -= static_cast<long long>(into[i].size());
    for (const auto& e : into[i]) w.F.push_back(e);
    --remaining;
  }
  w.F = make_edge_set(std::move(w.F));
  w.neighborhood = remaining;
  return w;
}

}  // namespace detail

/// Sampled refutation search for robust expansion; a pass means no witness was found.
inline ExpansionAudit robust_expansion_audit(const Graph& g, const ExpanderParams& params,
                                             double d_ref, int trials, std::uint64_t seed) {
  ExpansionAudit out;
  const int n = g.n();
  const int lo = std::max(1, static_cast<int>(std::ceil(params.k / 2.0 - 1e-9)));
  const int hi = n / 2;
  if (lo > hi || n == 0) return out;
  Rng rng(seed);
  std::vector<Vertex> all(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) all[v] = v;
  auto check = [&](const VertexSet& X) {
    ++out.checked;
    double r = rho(static_cast<double>(X.size()), params);
    double required = r * static_cast<double>(X.size());
    auto w = detail::expansion_attack(g, X, d_ref * required);
    if (w.neighborhood < required - 1e-12) {
      w.required = required;
      out.pass = false;
      if (!out.witness) out.witness = w;
      return true;
    }
    return false;
  };
  for (int t = 0; t < trials; ++t) {
    int size = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    VertexSet X;
    if (t % 2 == 0) {
      // BFS ball from a random root, truncated to `size`.
      Vertex root = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(n)));
      std::vector<char> seen(static_cast<std::size_t>(n), 0);
      std::vector<Vertex> q{root};
      seen[root] = 1;
      for (std::size_t h = 0; h < q.size() && static_cast<int>(q.size()) < size; ++h)
        for (Vertex w : g.neighbors(q[h])) {
          if (seen[w]) continue;
          seen[w] = 1;
          q.push_back(w);
          if (static_cast<int>(q.size()) == size) break;
        }
      X = make_vertex_set(q);
      if (static_cast<int>(X.size()) < lo) continue;
    } else {
      auto perm = all;
      rng.shuffle(perm);
      perm.resize(static_cast<std::size_t>(size));
      X = make_vertex_set(perm);
    }
    if (check(X)) return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stars and units

struct Star {
  Vertex center = -1;
  VertexSet leaves;
};

struct StarSpec {
  int count = 1;
  int size = 1;
};

namespace detail {

inline std::uint64_t tie_key(std::uint64_t seed, Vertex v) {
  return seed == 0 ? static_cast<std::uint64_t>(v) : splitmix64(seed ^ static_cast<std::uint64_t>(v));
}

// Alive vertices ordered by (view degree ascending, tie key).
inline std::vector<Vertex> by_degree(const GraphView& view, std::uint64_t seed, bool descending) {
  std::vector<std::pair<std::pair<int, std::uint64_t>, Vertex>> key;
  for (int v = 0; v < view.n(); ++v)
    if (view.alive(v)) {
      int d = view.degree(v);
      key.push_back({{descending ? -d : d, tie_key(seed, v)}, v});
    }
  std::sort(key.begin(), key.end());
  std::vector<Vertex> out;
  out.reserve(key.size());
  for (auto& k : key) out.push_back(k.second);
  return out;
}

}  // namespace detail

/// Greedy vertex-disjoint stars, filling specs in order. `taken` marks vertices
/// unavailable on entry and is updated.
inline std::vector<Star> pack_stars_into(const GraphView& view, const std::vector<StarSpec>& specs,
                                         std::uint64_t order_seed, std::vector<char>& taken,
                                         int max_leaves_factor = 1) {
  std::vector<Star> out;
  auto order = detail::by_degree(view, order_seed, false);
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const auto& spec = specs[si];
    for (int c = 0; c < spec.count; ++c) {
      int best_found = 0;
      bool placed = false;
      for (Vertex u : order) {
        if (taken[u]) continue;
        std::vector<Vertex> leaves;
        view.for_each_neighbor(u, [&](Vertex w, int) {
          if (!taken[w]) leaves.push_back(w);
        });
        best_found = std::max(best_found, static_cast<int>(leaves.size()));
        if (static_cast<int>(leaves.size()) < spec.size) continue;
        leaves.resize(static_cast<std::size_t>(
            std::min<long long>(leaves.size(), static_cast<long long>(spec.size) * max_leaves_factor)));
        taken[u] = 1;
        for (Vertex w : leaves) taken[w] = 1;
        out.push_back({u, VertexSet(leaves.begin(), leaves.end())});
        placed = true;
        break;
      }
      if (!placed)
        throw Error(ErrorCode::Insufficient,
                    "star spec " + std::to_string(si) + " unfilled, best " + std::to_string(best_found),
                    best_found, static_cast<std::int64_t>(si));
    }
  }
  return out;
}

inline std::vector<Star> pack_stars(const GraphView& view, const std::vector<StarSpec>& specs,
                                    std::uint64_t order_seed) {
  std::vector<char> taken(static_cast<std::size_t>(view.n()), 0);
  for (int v = 0; v < view.n(); ++v) taken[v] = !view.alive(v);
  return pack_stars_into(view, specs, order_seed, taken);
}

struct Unit {
  Vertex center = -1;
  std::vector<Path> branches;  // branches[i] runs from center to stars[i].center
  std::vector<Star> stars;
  int h1 = 0, h2 = 0, h3 = 0;

  VertexSet exterior() const {
    std::vector<Vertex> out;
    for (const auto& s : stars) out.insert(out.end(), s.leaves.begin(), s.leaves.end());
    return make_vertex_set(std::move(out));
  }
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& b : branches)
      for (const auto& e : path_edges(b)) out.push_back(e);
    for (const auto& s : stars)
      for (Vertex l : s.leaves) out.emplace_back(s.center, l);
    return out;
  }
};

enum class UnitStage { Stars = 0, Connect = 1, Prune = 2 };

inline std::string to_string(UnitStage s) {
  switch (s) {
    case UnitStage::Stars: return "stars";
    case UnitStage::Connect: return "connect";
    case UnitStage::Prune: return "prune";
  }
  return "?";
}

struct UnitOptions {
  int max_center_attempts = 24;
  /// Stars are packed with up to this many times h2 leaves before trimming.
  int leaf_slack = 2;
  /// Extra stars packed beyond h1 to absorb discards.
  int extra_stars = 0;
};

namespace detail {

// Attempt a unit at centre v. Returns the unit or the stage that failed.
inline std::pair<std::optional<Unit>, UnitStage> unit_at(const GraphView& view, Vertex v, int h1,
                                                         int h2, int h3, std::uint64_t seed,
                                                         const UnitOptions& opt, BfsWorkspace& ws) {
  const Graph& g = view.base();
  const int n = g.n();
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int x = 0; x < n; ++x) taken[x] = !view.alive(x);
  taken[v] = 1;
  // Stars: as many as possible up to h1 + extra, each with h2..slack*h2 leaves.
  std::vector<Star> stars;
  const int want = h1 + std::max(opt.extra_stars, h1 / 2);
  auto order = by_degree(view, seed, false);
  for (Vertex u : order) {
    if (static_cast<int>(stars.size()) >= want) break;
    if (taken[u]) continue;
    std::vector<Vertex> leaves;
    view.for_each_neighbor(u, [&](Vertex w, int) {
      if (!taken[w]) leaves.push_back(w);
    });
    // Keep one neighbour free so a branch can still enter u, unless u is adjacent to v.
    bool direct = false;
    view.for_each_neighbor(u, [&](Vertex w, int) { direct |= w == v; });
    const std::size_t cap = leaves.size() - (direct || leaves.empty() ? 0 : 1);
    if (static_cast<int>(cap) < h2) continue;
    // Prefer leaves that are not neighbours of v, keeping v's edges for branches.
    std::stable_partition(leaves.begin(), leaves.end(), [&](Vertex w) { return !g.has_edge(v, w); });
    leaves.resize(std::min<std::size_t>(cap, static_cast<std::size_t>(h2) * opt.leaf_slack));
    std::sort(leaves.begin(), leaves.end());
    taken[u] = 1;
    for (Vertex w : leaves) taken[w] = 1;
    stars.push_back({u, VertexSet(leaves.begin(), leaves.end())});
  }
  if (static_cast<int>(stars.size()) < h1) return {std::nullopt, UnitStage::Stars};

  // Branches: v to each star centre, avoiding star edges, other star centres
  // and earlier branch edges. Interiors may pass through leaves; those leaves
  // are consumed.
  std::vector<char> is_center(static_cast<std::size_t>(n), 0);
  std::vector<int> leaf_owner(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < stars.size(); ++i) {
    is_center[stars[i].center] = 1;
    for (Vertex l : stars[i].leaves) leaf_owner[l] = static_cast<int>(i);
  }
  std::vector<char> star_edge(static_cast<std::size_t>(g.m()), 0), used(static_cast<std::size_t>(g.m()), 0);
  for (const auto& s : stars)
    for (Vertex l : s.leaves) star_edge[g.edge_id(s.center, l)] = 1;
  std::vector<char> consumed(static_cast<std::size_t>(n), 0);
  std::vector<std::optional<Path>> branch(stars.size());
  int connected = 0;
  for (std::size_t i = 0; i < stars.size(); ++i) {
    Vertex target = stars[i].center;
    auto p = bfs_route(
        g, {v}, [&](Vertex w) { return w == target; },
        [&](Vertex w) { return view.alive(w) && !is_center[w] && w != v && leaf_owner[w] != static_cast<int>(i); },
        [&](int id) { return view.edge_alive(id) && !star_edge[id] && !used[id]; }, h3, ws);
    if (!p) continue;
    for (std::size_t k = 1; k < p->size(); ++k) used[g.edge_id((*p)[k - 1], (*p)[k])] = 1;
    for (std::size_t k = 1; k + 1 < p->size(); ++k) consumed[(*p)[k]] = 1;
    branch[i] = std::move(p);
    ++connected;
  }
  if (connected < h1) return {std::nullopt, UnitStage::Connect};

  // Prune: drop stars that lost half their leaves, then trim to h2 leaves.
  Unit u;
  u.center = v;
  u.h1 = h1;
  u.h2 = h2;
  u.h3 = h3;
  for (std::size_t i = 0; i < stars.size() && static_cast<int>(u.stars.size()) < h1; ++i) {
    if (!branch[i]) continue;
    VertexSet keep;
    for (Vertex l : stars[i].leaves)
      if (!consumed[l]) keep.push_back(l);
    if (2 * (stars[i].leaves.size() - keep.size()) >= stars[i].leaves.size()) continue;
    if (static_cast<int>(keep.size()) < h2) continue;
    keep.resize(static_cast<std::size_t>(h2));
    u.stars.push_back({stars[i].center, keep});
    u.branches.push_back(*branch[i]);
  }
  if (static_cast<int>(u.stars.size()) < h1) return {std::nullopt, UnitStage::Prune};
  return {u, UnitStage::Prune};
}

}  // namespace detail

/// An (h1, h2, h3)-unit in G \ W - U. Tries centres in descending degree order.
inline Unit build_unit(const Graph& g, const VertexSet& U, const EdgeSet& W, int h1, int h2, int h3,
                       std::uint64_t seed, const UnitOptions& opt = {}) {
  if (h1 < 1 || h2 < 1 || h3 < 1) throw Error(ErrorCode::InvalidArgument, "unit parameters must be positive");
  auto view = view_minus(g, U, W);
  BfsWorkspace ws(g.n());
  auto centers = detail::by_degree(view, derive_seed(seed, "unit-centers"), true);
  int furthest = static_cast<int>(UnitStage::Stars);
  int attempts = 0;
  for (Vertex v : centers) {
    if (view.degree(v) < 1) continue;
    if (attempts++ >= opt.max_center_attempts) break;
    auto [unit, stage] = detail::unit_at(view, v, h1, h2, h3, derive_seed(seed, "unit-stars", v), opt, ws);
    if (unit) return *unit;
    furthest = std::max(furthest, static_cast<int>(stage));
  }
  auto st = static_cast<UnitStage>(furthest);
  throw Error(ErrorCode::UnitFailed, "no unit, stage " + to_string(st), furthest);
}

/// Up to `count` pairwise edge-disjoint units with distinct centres.
inline std::vector<Unit> collect_units(const Graph& g, int count, int h1, int h2, int h3,
                                       std::uint64_t seed, const UnitOptions& opt = {}) {
  std::vector<Unit> units;
  std::vector<Vertex> centers;
  std::vector<Edge> used;
  for (int i = 0; i < count; ++i) {
    try {
      auto u = build_unit(g, make_vertex_set(centers), make_edge_set(used), h1, h2, h3,
                          derive_seed(seed, "unit", static_cast<std::uint64_t>(i)), opt);
      centers.push_back(u.center);
      for (const auto& e : u.edges()) used.push_back(e);
      units.push_back(std::move(u));
    } catch (const Error&) {
      break;
    }
  }
  return units;
}

inline nlohmann::ordered_json to_json(const Unit& u) {
  nlohmann::ordered_json j;
  j["center"] = u.center;
  j["branches"] = nlohmann::ordered_json::array();
  for (const auto& b : u.branches) j["branches"].push_back(b);
  j["stars"] = nlohmann::ordered_json::array();
  for (const auto& s : u.stars) {
    nlohmann::ordered_json sj;
    sj["center"] = s.center;
    sj["leaves"] = s.leaves;
    j["stars"].push_back(sj);
  }
  return j;
}

}  // namespace imforge
