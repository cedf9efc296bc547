#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imforge/certificate.hpp"
#include "imforge/error.hpp"
#include "imforge/graph.hpp"
#include "imforge/nibble.hpp"
#include "imforge/pipeline.hpp"
#include "imforge/rng.hpp"
#include "imforge/spectral.hpp"

namespace imforge {

/// Vertex partition for the dense pipeline. V[0] and U[0] are the short
/// remainder parts; V[1..M1] have t vertices, U[1..M2] have s.
struct PartitionScheme {
  double c = 0, q = 0, eta = 0;
  int n = 0, d = 0;
  int f = 0, t = 0, s = 0, M1 = 0, M2 = 0;
  bool t_clamped = false;  // best-effort raised t from 0 to 1
  double eps = 0, delta = 0, K = 0;
  VertexSet F;
  std::vector<VertexSet> V;
  std::vector<VertexSet> U;
  std::vector<int> v_part;  // part index per vertex in F (-1 outside F)
  std::vector<int> u_part;  // part index per vertex outside F (-1 inside F)
};

/// Sizes from the scheme formulas; F is the lowest f ids, parts are consecutive.
inline PartitionScheme dense_partition(const Graph& g, const SpectralReport& report, double eta,
                                       bool clamp_t = false) {
  PartitionScheme p;
  p.n = g.n();
  p.d = report.d;
  p.eta = eta;
  if (p.n <= 0 || p.d <= 0 || p.d >= p.n) throw Error(ErrorCode::InvalidArgument, "need 0 < d < n");
  if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0,1)");
  p.c = static_cast<double>(p.d) / p.n;
  p.q = 1.0 - p.c;
  p.f = static_cast<int>(floor_tol((1.0 - eta) * p.d));
  p.t = static_cast<int>(floor_tol(p.c * eta * eta * p.d / 10.0));
  if (p.t == 0) {
    if (!clamp_t) throw Error(ErrorCode::DegenerateT, "t = floor(c eta^2 d / 10) = 0");
    p.t = 1;
    p.t_clamped = true;
  }
  p.M1 = p.f / p.t;
  p.s = static_cast<int>(ceil_tol(p.q * p.t / p.c));
  p.M2 = (p.n - p.f) / p.s;
  double m = std::min({p.c, p.q, eta});
  p.eps = m * m / 64.0;
  p.delta = std::min(p.c * eta * eta, p.q * eta * eta) / 20.0;
  p.K = 10.0 / (p.eps * p.eps * p.delta);

  p.v_part.assign(static_cast<std::size_t>(p.n), -1);
  p.u_part.assign(static_cast<std::size_t>(p.n), -1);
  for (int v = 0; v < p.f; ++v) p.F.push_back(v);
  p.V.assign(static_cast<std::size_t>(p.M1) + 1, {});
  for (int v = 0; v < p.f; ++v) {
    int part = v / p.t + 1;
    if (part > p.M1) part = 0;
    p.V[part].push_back(v);
    p.v_part[v] = part;
  }
  p.U.assign(static_cast<std::size_t>(p.M2) + 1, {});
  for (int v = p.f; v < p.n; ++v) {
    int part = (v - p.f) / p.s + 1;
    if (part > p.M2) part = 0;
    p.U[part].push_back(v);
    p.u_part[v] = part;
  }
  return p;
}

/// Red pairs are complement pairs inside F across two full V-parts; black
/// edges are G-edges between F and the rest. Other complement pairs inside F
/// form the E0 bucket.
struct RedBlackGraph {
  EdgeSet black;
  std::map<std::pair<int, int>, std::vector<Edge>> red;  // keyed by V-part pair (j<k, both >= 1)
  std::vector<Edge> e0;
  long long red_count = 0;
  long long e0_bound = 0;  // t f + M1 C(t,2)
};

inline RedBlackGraph build_red_black(const Graph& g, const PartitionScheme& p) {
  RedBlackGraph rb;
  for (const auto& e : g.edges())
    if ((p.v_part[e.u] >= 0) != (p.v_part[e.v] >= 0)) rb.black.push_back(e);
  for (int a = 0; a < p.f; ++a)
    for (int b = a + 1; b < p.f; ++b) {
      if (g.has_edge(a, b)) continue;
      int ja = p.v_part[a], jb = p.v_part[b];
      if (ja == 0 || jb == 0 || ja == jb) {
        rb.e0.emplace_back(a, b);
      } else {
        rb.red[{std::min(ja, jb), std::max(ja, jb)}].emplace_back(a, b);
        ++rb.red_count;
      }
    }
  rb.e0_bound = static_cast<long long>(p.t) * p.f + static_cast<long long>(p.M1) * p.t * (p.t - 1) / 2;
  return rb;
}

/// Proper edge colouring of the clique on parts 1..M1 by the circle method.
struct Factorization {
  int M1 = 0;
  std::vector<std::vector<std::pair<int, int>>> classes;
  int chi() const { return static_cast<int>(classes.size()); }
};

inline Factorization one_factorization(int M1) {
  if (M1 < 2) throw Error(ErrorCode::InvalidArgument, "one_factorization needs M1 >= 2");
  Factorization out;
  out.M1 = M1;
  const int N = M1 % 2 == 0 ? M1 : M1 + 1;  // vertex N-1 is a dummy when M1 is odd
  for (int r = 0; r < N - 1; ++r) {
    std::vector<std::pair<int, int>> cls;
    auto add = [&](int a, int b) {
      if (a >= M1 || b >= M1) return;
      cls.emplace_back(std::min(a, b) + 1, std::max(a, b) + 1);
    };
    add(r, N - 1);
    for (int i = 1; i < N / 2; ++i) add((r + i) % (N - 1), (r - i + N - 1) % (N - 1));
    std::sort(cls.begin(), cls.end());
    out.classes.push_back(std::move(cls));
  }
  return out;
}

struct RedReplacement {
  std::vector<Path> two_paths;        // a - u - b with u outside F
  std::vector<Edge> replaced;         // red pairs served, parallel to two_paths
  std::vector<Edge> leftovers;        // E0 plus unreplaced reds, sorted
  std::vector<int> class_u_part;      // U-part used per colour class
  bool reused_u_parts = false;
};

/// Replaces red pairs of each colour class by 2-black-paths through that
/// class's U-part, using edge-disjoint triangles of the tripartite graph
/// (V_j, V_k, U_i) with red(V_j,V_k) and free black edges.
inline RedReplacement replace_red_edges(const Graph& g, const PartitionScheme& p, const RedBlackGraph& rb,
                                        const Factorization& fact, double beta, std::uint64_t seed,
                                        EdgeLedger& ledger) {
  RedReplacement out;
  out.reused_u_parts = p.M2 < fact.chi();
  for (int ci = 0; ci < fact.chi(); ++ci) {
    if (p.M2 < 1) break;
    int ui = ci % p.M2 + 1;
    out.class_u_part.push_back(ui);
    const auto& Ui = p.U[ui];
    for (auto [j, k] : fact.classes[ci]) {
      auto it = rb.red.find({j, k});
      if (it == rb.red.end() || it->second.empty()) continue;
      const auto& Vj = p.V[j];
      const auto& Vk = p.V[k];
      std::vector<Vertex> local_to_global;
      local_to_global.insert(local_to_global.end(), Vj.begin(), Vj.end());
      local_to_global.insert(local_to_global.end(), Vk.begin(), Vk.end());
      local_to_global.insert(local_to_global.end(), Ui.begin(), Ui.end());
      std::vector<int> part;
      for (std::size_t x = 0; x < Vj.size(); ++x) part.push_back(0);
      for (std::size_t x = 0; x < Vk.size(); ++x) part.push_back(1);
      for (std::size_t x = 0; x < Ui.size(); ++x) part.push_back(2);
      auto local = [&](Vertex v) {
        return static_cast<Vertex>(std::find(local_to_global.begin(), local_to_global.end(), v) -
                                   local_to_global.begin());
      };
      std::vector<std::pair<Vertex, Vertex>> es;
      for (const auto& e : it->second) es.emplace_back(local(e.u), local(e.v));
      int off_u = static_cast<int>(Vj.size() + Vk.size());
      for (int side = 0; side < 2; ++side) {
        const auto& Vs = side == 0 ? Vj : Vk;
        int off = side == 0 ? 0 : static_cast<int>(Vj.size());
        for (std::size_t a = 0; a < Vs.size(); ++a)
          for (std::size_t b = 0; b < Ui.size(); ++b)
            if (g.has_edge(Vs[a], Ui[b]) && ledger.is_free(Vs[a], Ui[b])) es.emplace_back(off + static_cast<int>(a), off_u + static_cast<int>(b));
      }
      auto h = build_graph(static_cast<int>(local_to_global.size()), es);
      auto pack = edge_disjoint_triangles(
          h, part, beta, derive_seed(seed, "red", static_cast<std::uint64_t>(ci) * 1000003ULL + j * 1009ULL + k));
      for (const auto& tri : pack.triangles) {
        // Local ids sort as V_j < V_k < U_i.
        Vertex a = local_to_global[tri[0]], b = local_to_global[tri[1]], u = local_to_global[tri[2]];
        Path path{a, u, b};
        if (!ledger.claim(path, static_cast<int>(out.two_paths.size()))) continue;
        out.two_paths.push_back(path);
        out.replaced.emplace_back(a, b);
      }
    }
  }
  std::vector<Edge> rep = out.replaced;
  std::sort(rep.begin(), rep.end());
  for (const auto& [key, reds] : rb.red)
    for (const auto& e : reds)
      if (!std::binary_search(rep.begin(), rep.end(), e)) out.leftovers.push_back(e);
  out.leftovers.insert(out.leftovers.end(), rb.e0.begin(), rb.e0.end());
  std::sort(out.leftovers.begin(), out.leftovers.end());
  return out;
}

struct ThreePathResult {
  std::vector<std::optional<Path>> paths;  // parallel to the input pairs
  std::vector<std::pair<Vertex, Vertex>> stuck;
  int two_paths = 0;
  int three_paths = 0;
};

/// Links each pair u, v in F by u-a-b-v (or u-w-v when a common free
/// neighbour exists) through vertices outside F over free edges.
/// cap_per_vertex bounds how often an outside vertex serves as interior (0: no cap).
inline ThreePathResult greedy_three_paths(const Graph& g, const std::vector<std::pair<Vertex, Vertex>>& pairs,
                                          EdgeLedger& used, const std::vector<char>& inF, int cap_per_vertex = 0,
                                          int owner_base = 0) {
  ThreePathResult out;
  const int n = g.n();
  std::vector<int> mark(static_cast<std::size_t>(n), -1);
  std::vector<int> load(static_cast<std::size_t>(n), 0);
  auto ok_mid = [&](Vertex w) { return !inF[w] && (cap_per_vertex <= 0 || load[w] < cap_per_vertex); };
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    auto [u, v] = pairs[pi];
    int tag = static_cast<int>(pi);
    // Mark N'(v).
    auto nv = g.neighbors(v);
    auto iv = g.incident(v);
    for (std::size_t x = 0; x < nv.size(); ++x)
      if (ok_mid(nv[x]) && used.is_free_id(iv[x])) mark[nv[x]] = tag;
    std::optional<Path> found;
    auto nu = g.neighbors(u);
    auto iu = g.incident(u);
    for (std::size_t x = 0; x < nu.size() && !found; ++x)
      if (ok_mid(nu[x]) && used.is_free_id(iu[x]) && mark[nu[x]] == tag) found = Path{u, nu[x], v};
    for (std::size_t x = 0; x < nu.size() && !found; ++x) {
      Vertex a = nu[x];
      if (!ok_mid(a) || !used.is_free_id(iu[x])) continue;
      auto na = g.neighbors(a);
      auto ia = g.incident(a);
      for (std::size_t y = 0; y < na.size(); ++y) {
        Vertex b = na[y];
        if (b != a && mark[b] == tag && used.is_free_id(ia[y])) {
          found = Path{u, a, b, v};
          break;
        }
      }
    }
    if (found && used.claim(*found, owner_base + tag)) {
      for (std::size_t k = 1; k + 1 < found->size(); ++k) ++load[(*found)[k]];
      if (found->size() == 3) ++out.two_paths;
      else ++out.three_paths;
      out.paths.push_back(found);
    } else {
      out.paths.push_back(std::nullopt);
      out.stuck.push_back(pairs[pi]);
    }
  }
  return out;
}

struct DenseDiagnostics {
  std::string run_id;
  int n = 0, d = 0;
  double lambda = 0, eta = 0;
  int f = 0, t = 0, s = 0, M1 = 0, M2 = 0, chi = 0;
  double eps = 0, delta = 0, K = 0;
  bool kappa_ok = false;  // d >= K lambda
  long long reds_total = 0, e0_size = 0, e0_bound = 0;
  long long reds_replaced_2path = 0;
  long long pairs_3path = 0, pairs_2path_greedy = 0;
  long long adjacent_pairs = 0;
  long long stuck = 0;
  long long leftover_budget = 0;  // c eta^2 d^2 / 2
  double part_density_within_eps = 0;  // fraction of sampled V-part pairs with d_G within c +- eps
  double red_density_within_eps = 0;   // same for red density against q +- eps
  int achieved_order = 0;
  bool globally_disjoint = false;
  double seconds = 0;

  static std::string csv_header() {
    return "run_id,n,d,lambda,eta,t,M1,M2,reds_total,reds_replaced_2path,pairs_3path,stuck,achieved_order,seconds";
  }
  std::string csv_row() const {
    std::ostringstream os;
    os << run_id << ',' << n << ',' << d << ',' << lambda << ',' << eta << ',' << t << ',' << M1 << ',' << M2
       << ',' << reds_total << ',' << reds_replaced_2path << ',' << pairs_3path << ',' << stuck << ','
       << achieved_order << ',' << seconds;
    return os.str();
  }
};

inline nlohmann::ordered_json to_json(const DenseDiagnostics& x) {
  nlohmann::ordered_json j;
  j["run_id"] = x.run_id;
  j["n"] = x.n;
  j["d"] = x.d;
  j["lambda"] = x.lambda;
  j["eta"] = x.eta;
  j["f"] = x.f;
  j["t"] = x.t;
  j["s"] = x.s;
  j["M1"] = x.M1;
  j["M2"] = x.M2;
  j["chi"] = x.chi;
  j["eps"] = x.eps;
  j["delta"] = x.delta;
  j["K"] = x.K;
  j["kappa_ok"] = x.kappa_ok;
  j["reds_total"] = x.reds_total;
  j["e0_size"] = x.e0_size;
  j["e0_bound"] = x.e0_bound;
  j["reds_replaced_2path"] = x.reds_replaced_2path;
  j["pairs_3path"] = x.pairs_3path;
  j["pairs_2path_greedy"] = x.pairs_2path_greedy;
  j["adjacent_pairs"] = x.adjacent_pairs;
  j["stuck"] = x.stuck;
  j["leftover_budget"] = x.leftover_budget;
  j["part_density_within_eps"] = x.part_density_within_eps;
  j["red_density_within_eps"] = x.red_density_within_eps;
  j["achieved_order"] = x.achieved_order;
  j["globally_disjoint"] = x.globally_disjoint;
  j["seconds"] = x.seconds;
  return j;
}

struct DenseResult {
  EmbeddingCertificate cert;
  DenseDiagnostics diag;
};

namespace detail {

// Samples up to `limit` V-part pairs and reports how many have G-density
// within c +- eps and red density within q +- eps.
inline std::pair<double, double> audit_part_densities(const Graph& g, const PartitionScheme& p, int limit,
                                                      std::uint64_t seed) {
  if (p.M1 < 2) return {1.0, 1.0};
  Rng rng(derive_seed(seed, "dense-audit"));
  int ok_g = 0, ok_r = 0, cnt = 0;
  for (int s = 0; s < limit; ++s) {
    int j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.M1)));
    int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.M1 - 1)));
    if (k >= j) ++k;
    double e = static_cast<double>(edges_between(g, p.V[j], p.V[k]));
    double tot = static_cast<double>(p.V[j].size() * p.V[k].size());
    ok_g += std::abs(e / tot - p.c) <= p.eps;
    ok_r += std::abs((tot - e) / tot - p.q) <= p.eps;
    ++cnt;
  }
  return {static_cast<double>(ok_g) / cnt, static_cast<double>(ok_r) / cnt};
}

}  // namespace detail

/// Dense-case immersion over branch set F (strict) or the largest fully
/// linked subset of F found by peeling (best-effort).
inline DenseResult build_dense_immersion(const Graph& g, const SpectralReport& report, double eta,
                                         std::uint64_t seed, RunMode mode) {
  auto t0 = std::chrono::steady_clock::now();
  DenseResult res;
  auto& dg = res.diag;
  dg.n = g.n();
  dg.d = report.d;
  dg.lambda = report.lambda;
  dg.eta = eta;

  const bool strict = mode == RunMode::Strict;
  PartitionScheme p;
  try {
    p = dense_partition(g, report, eta, !strict);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateT) throw Error(ErrorCode::PreconditionFailed, e.what());
    throw;
  }
  dg.f = p.f;
  dg.t = p.t;
  dg.s = p.s;
  dg.M1 = p.M1;
  dg.M2 = p.M2;
  dg.eps = p.eps;
  dg.delta = p.delta;
  dg.K = p.K;
  dg.kappa_ok = report.d >= p.K * report.lambda;
  dg.leftover_budget = static_cast<long long>(p.c * eta * eta * report.d * static_cast<double>(report.d) / 2.0);
  if (strict && !dg.kappa_ok) throw Error(ErrorCode::PreconditionFailed, "d < K lambda");

  auto rb = build_red_black(g, p);
  dg.reds_total = rb.red_count;
  dg.e0_size = static_cast<long long>(rb.e0.size());
  dg.e0_bound = rb.e0_bound;

  std::vector<char> inF(static_cast<std::size_t>(g.n()), 0);
  for (Vertex v : p.F) inF[v] = 1;

  // Length-1 paths: every edge inside F is reserved up front.
  EdgeLedger ledger(g);
  std::map<std::pair<Vertex, Vertex>, Path> link;
  for (const auto& e : g.edges())
    if (inF[e.u] && inF[e.v]) {
      Path p1{e.u, e.v};
      ledger.claim(p1, 0);
      link[{e.u, e.v}] = p1;
    }
  dg.adjacent_pairs = static_cast<long long>(link.size());

  RedReplacement rr;
  if (p.M1 >= 2) {
    auto fact = one_factorization(p.M1);
    dg.chi = fact.chi();
    if (strict && p.M2 < fact.chi()) throw Error(ErrorCode::PreconditionFailed, "M2 < chi");
    rr = replace_red_edges(g, p, rb, fact, 0.2, seed, ledger);
  } else {
    for (const auto& [key, reds] : rb.red) rr.leftovers.insert(rr.leftovers.end(), reds.begin(), reds.end());
    rr.leftovers.insert(rr.leftovers.end(), rb.e0.begin(), rb.e0.end());
    std::sort(rr.leftovers.begin(), rr.leftovers.end());
  }
  dg.reds_replaced_2path = static_cast<long long>(rr.two_paths.size());
  for (std::size_t i = 0; i < rr.two_paths.size(); ++i) link[{rr.replaced[i].u, rr.replaced[i].v}] = rr.two_paths[i];

  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (const auto& e : rr.leftovers) pairs.emplace_back(e.u, e.v);
  auto tp = greedy_three_paths(g, pairs, ledger, inF, 0, 1 << 20);
  dg.pairs_3path = tp.three_paths;
  dg.pairs_2path_greedy = tp.two_paths;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (tp.paths[i]) link[pairs[i]] = *tp.paths[i];
  dg.stuck = static_cast<long long>(tp.stuck.size());
  if (strict && !tp.stuck.empty())
    throw Error(ErrorCode::Incomplete, std::to_string(tp.stuck.size()) + " pairs unlinked",
                static_cast<std::int64_t>(tp.stuck.size()));

  // Peel to a fully linked branch set.
  std::vector<std::pair<int, int>> missing;
  for (auto [u, v] : tp.stuck) missing.emplace_back(u, v);  // F is 0..f-1, so ids are indices
  auto keep = peel_missing(p.f, missing);

  auto& cert = res.cert;
  cert.kind = EmbeddingKind::Immersion;
  for (int i : keep) cert.branch.push_back(p.F[i]);
  std::vector<Path> all;
  for (int a = 0; a < static_cast<int>(cert.branch.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(cert.branch.size()); ++b) {
      Vertex x = cert.branch[a], y = cert.branch[b];
      auto it = link.find({std::min(x, y), std::max(x, y)});
      if (it == link.end()) throw Error(ErrorCode::Incomplete, "peeling left an unlinked pair");
      Path path = it->second;
      if (path.front() != x) std::reverse(path.begin(), path.end());
      cert.pairs.push_back({a, b, path});
      all.push_back(path);
    }
  dg.achieved_order = static_cast<int>(cert.branch.size());
  dg.globally_disjoint = paths_edge_disjoint(all);
  auto [pg, pr] = detail::audit_part_densities(g, p, 500, seed);
  dg.part_density_within_eps = pg;
  dg.red_density_within_eps = pr;
  dg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace imforge
