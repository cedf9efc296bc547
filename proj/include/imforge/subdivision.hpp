#pragma once

#include <algorithm>
#include <chrono>
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
#include "imforge/spectral.hpp"

namespace imforge {

// ---------------------------------------------------------------------------
// Stars and reservoir

struct StarSystem {
  std::vector<Star> stars;
  VertexSet S;                                  // reservoir
  std::map<std::pair<int, int>, Vertex> chosen;  // (i, j) -> u_ij in A_i n S

  VertexSet centers() const {
    std::vector<Vertex> c;
    for (const auto& s : stars) c.push_back(s.center);
    return make_vertex_set(c);
  }
};

inline int star_count(int d, double eta) { return static_cast<int>(floor_tol((1.0 - eta) * d)); }
inline int star_size(int d, double eta) { return static_cast<int>(floor_tol((1.0 - eta / 2.0) * d)); }

/// t = floor((1-eta)d) vertex-disjoint stars of size floor((1-eta/2)d), placed
/// greedily by ascending degree. Throws Insufficient(found) when fewer fit.
inline StarSystem pack_disjoint_stars(const Graph& g, const SpectralReport& report, double eta,
                                      RunMode mode = RunMode::BestEffort) {
  if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
  const int d = report.d;
  if (mode == RunMode::Strict && !(2.0 / eta <= d && d <= eta * std::sqrt(static_cast<double>(g.n()))))
    throw Error(ErrorCode::PreconditionFailed, "star packing needs 2/eta <= d <= eta sqrt(n)");
  const int t = star_count(d, eta);
  const int size = star_size(d, eta);
  auto view = view_minus(g, {}, {});
  std::vector<char> taken(static_cast<std::size_t>(g.n()), 0);
  StarSystem sys;
  for (int i = 0; i < t; ++i) {
    try {
      auto s = pack_stars_into(view, {StarSpec{1, size}}, 0, taken);
      sys.stars.push_back(std::move(s.front()));
    } catch (const Error&) {
      throw Error(ErrorCode::Insufficient,
                  "packed " + std::to_string(i) + " of " + std::to_string(t) + " stars of size " + std::to_string(size), i,
                  t);
    }
  }
  return sys;
}

struct ReservoirCheck {
  int star_violations = 0;    // stars with |A_i n S| < (1-eta)d
  int vertex_violations = 0;  // vertices with |N(v) \ (U u S)| < eta^2 d / 8
  bool ok() const { return star_violations == 0 && vertex_violations == 0; }
  int total() const { return star_violations + vertex_violations; }
};

/// Reservoir predicate, evaluated from scratch.
inline ReservoirCheck check_reservoir(const Graph& g, const std::vector<Star>& stars, const VertexSet& S, double eta,
                                      int d) {
  std::vector<char> inS(static_cast<std::size_t>(g.n()), 0), inU(static_cast<std::size_t>(g.n()), 0);
  for (Vertex v : S) inS[v] = 1;
  for (const auto& s : stars) inU[s.center] = 1;
  ReservoirCheck c;
  const double need_leaves = (1.0 - eta) * d;
  const double need_out = eta * eta * d / 8.0;
  for (const auto& s : stars) {
    int k = 0;
    for (Vertex l : s.leaves) k += inS[l];
    if (k + 1e-9 < need_leaves) ++c.star_violations;
  }
  for (Vertex v = 0; v < g.n(); ++v) {
    int k = 0;
    for (Vertex w : g.neighbors(v)) k += !inS[w] && !inU[w];
    if (k + 1e-9 < need_out) ++c.vertex_violations;
  }
  return c;
}

struct ReservoirResult {
  VertexSet S;
  bool accepted = false;
  int attempts = 0;
  ReservoirCheck check;
};

/// Bernoulli(1 - eta/4) sample of V \ U, retried on fresh seeds until the
/// predicate holds. With keep_best, the sample with fewest violations (first
/// by attempt order) is returned instead of throwing SampleFailed.
inline ReservoirResult sample_reservoir(const Graph& g, const std::vector<Star>& stars, double eta, std::uint64_t seed,
                                        int retries, bool keep_best = false) {
  if (retries < 1) throw Error(ErrorCode::InvalidArgument, "retries must be >= 1");
  int d = 0;
  for (Vertex v = 0; v < g.n(); ++v) d = std::max(d, g.degree(v));
  std::vector<char> inU(static_cast<std::size_t>(g.n()), 0);
  for (const auto& s : stars) inU[s.center] = 1;
  const double p = 1.0 - eta / 4.0;
  ReservoirResult best;
  bool have = false;
  for (int r = 0; r < retries; ++r) {
    Rng rng(derive_seed(seed, "reservoir", static_cast<std::uint64_t>(r)));
    VertexSet S;
    for (Vertex v = 0; v < g.n(); ++v)
      if (!inU[v] && rng.bernoulli(p)) S.push_back(v);
    auto c = check_reservoir(g, stars, S, eta, d);
    if (!have || c.total() < best.check.total()) {
      best.S = std::move(S);
      best.check = c;
      have = true;
    }
    best.attempts = r + 1;
    if (c.ok()) {
      best.accepted = true;
      return best;
    }
  }
  if (!keep_best) throw Error(ErrorCode::SampleFailed, "no accepted sample in " + std::to_string(retries) + " tries", retries);
  return best;
}

// ---------------------------------------------------------------------------
// P_alpha certificate and path length

enum class SubdivisionVariant { D0Three, D0Power };

inline std::string to_string(SubdivisionVariant v) { return v == SubdivisionVariant::D0Three ? "d0=3" : "d0=n^eta"; }

inline SubdivisionVariant parse_variant(const std::string& s) {
  if (s == "d0=3" || s == "3") return SubdivisionVariant::D0Three;
  if (s == "d0=n^eta" || s == "power") return SubdivisionVariant::D0Power;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + s + "'");
}

struct PAlphaParams {
  double n0 = 0;
  double d0 = 3;
  double alpha = 0;
  double beta = 0;
};

inline PAlphaParams palpha_params(double n, double eta, SubdivisionVariant v) {
  PAlphaParams p;
  p.alpha = 1.0 - eta * eta / 16.0;
  p.beta = 2.0 * p.alpha - 1.0;
  if (v == SubdivisionVariant::D0Three) {
    p.d0 = 3;
    p.n0 = eta * eta * n / 256.0;
  } else {
    p.d0 = std::pow(n, eta);
    p.n0 = eta / 8.0 * std::pow(n, 1.0 - eta);
  }
  return p;
}

struct PAlphaCertificate {
  bool pass = false;
  double rhs = 0;
  double margin = 0;
};

/// 1 - alpha > n0 (1 + 4 d0) / (2n) + (lambda / d)(1 + sqrt(2 d0)).
inline PAlphaCertificate p_alpha_certificate(double n, double d, double lambda, const PAlphaParams& p) {
  if (!(n > 0 && d > 0 && lambda >= 0)) throw Error(ErrorCode::InvalidArgument, "n, d must be positive, lambda >= 0");
  PAlphaCertificate c;
  c.rhs = p.n0 * (1.0 + 4.0 * p.d0) / (2.0 * n) + (lambda / d) * (1.0 + std::sqrt(2.0 * p.d0));
  c.margin = (1.0 - p.alpha) - c.rhs;
  c.pass = c.margin > 0;
  return c;
}

/// 2 ceil(log(n0/16) / log(d0-1)) + 3.
inline int fixed_path_length(double n0, double d0) {
  if (!(d0 > 2 && n0 > 0)) throw Error(ErrorCode::InvalidArgument, "need d0 > 2 and n0 > 0");
  return 2 * static_cast<int>(ceil_tol(std::log(n0 / 16.0) / std::log(d0 - 1.0))) + 3;
}

/// Headline length 2 ceil(log2(eta^2 n / 4096)) + 5 of the d0 = 3 case.
inline int headline_path_length(double n, double eta) {
  return 2 * static_cast<int>(ceil_tol(std::log2(eta * eta * n / 4096.0))) + 5;
}

/// Smallest odd length the graph can plausibly route: 2 ceil(ln(n/16)/ln(d-1)) + 3.
inline int routable_path_length(double n, double d) {
  if (d <= 2) return 3;
  return 2 * static_cast<int>(ceil_tol(std::max(0.0, std::log(n / 16.0) / std::log(d - 1.0)))) + 3;
}

// ---------------------------------------------------------------------------
// Fixed-length vertex-disjoint routing

struct FixedLengthResult {
  std::map<std::pair<int, int>, Path> paths;  // keyed by index into the pair list (k, k)
  std::vector<int> failed;                    // indices into the pair list
  int reroutes = 0;
  int beta_violations = 0;
  long long nodes = 0;
};

namespace detail {

/// Exact-length simple path u -> v whose interior avoids `blocked`; DFS pruned
/// by residual distance to v.
inline std::optional<Path> exact_length_path(const Graph& g, Vertex u, Vertex v, int L, const std::vector<char>& blocked,
                                             std::uint64_t order_seed, long long budget, long long& nodes) {
  const int n = g.n();
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<Vertex> q{v};
  dist[v] = 0;
  for (std::size_t h = 0; h < q.size(); ++h)
    for (Vertex w : g.neighbors(q[h]))
      if (dist[w] < 0 && (!blocked[w] || w == u)) {
        dist[w] = dist[q[h]] + 1;
        if (w != u) q.push_back(w);
      }
  if (dist[u] < 0 || dist[u] > L) return std::nullopt;
  std::vector<char> on(static_cast<std::size_t>(n), 0);
  Path path{u};
  on[u] = 1;
  long long spent = 0;
  Rng rng(order_seed);
  std::function<bool(Vertex, int)> dfs = [&](Vertex x, int rem) -> bool {
    if (++spent > budget) return false;
    if (rem == 1) {
      if (g.has_edge(x, v)) {
        path.push_back(v);
        return true;
      }
      return false;
    }
    std::vector<Vertex> nb;
    for (Vertex w : g.neighbors(x))
      if (w != v && w != u && !blocked[w] && !on[w] && dist[w] > 0 && dist[w] <= rem - 1) nb.push_back(w);
    rng.shuffle(nb);
    // Prefer vertices with slack so the walk does not reach v's ball too early.
    std::stable_sort(nb.begin(), nb.end(), [&](Vertex a, Vertex b) {
      return std::abs(dist[a] - (rem - 1)) < std::abs(dist[b] - (rem - 1));
    });
    for (Vertex w : nb) {
      on[w] = 1;
      path.push_back(w);
      if (dfs(w, rem - 1)) return true;
      path.pop_back();
      on[w] = 0;
      if (spent > budget) return false;
    }
    return false;
  };
  bool ok = L >= 1 && (L == 1 ? g.has_edge(u, v) : dfs(u, L));
  if (L == 1 && ok) path.push_back(v);
  nodes += spent;
  if (!ok) return std::nullopt;
  return path;
}

}  // namespace detail

/// Vertex-disjoint paths of length exactly L between the given pairs, interiors
/// avoiding S' and each other. One rollback per failed pair: unroute the most
/// recent path, retry with another ordering, then restore.
inline FixedLengthResult connect_fixed_length(const Graph& g, const std::vector<std::pair<Vertex, Vertex>>& pairs,
                                              const VertexSet& Sprime, int L, double beta, std::uint64_t seed,
                                              RunMode mode = RunMode::BestEffort, long long budget = 200000) {
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "path length must be >= 1");
  FixedLengthResult res;
  std::vector<char> blocked(static_cast<std::size_t>(g.n()), 0);
  for (Vertex s : Sprime) blocked[s] = 1;
  for (Vertex x = 0; x < g.n(); ++x) {
    int k = 0;
    for (Vertex w : g.neighbors(x)) k += blocked[w];
    if (k > beta * g.degree(x) + 1e-9) ++res.beta_violations;
  }
  for (const auto& [a, b] : pairs)
    if (!blocked[a] || !blocked[b]) throw Error(ErrorCode::InvalidArgument, "pair endpoints must lie in S'", a, b);
  auto mark = [&](const Path& p, char val) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) blocked[p[k]] = val;
  };
  auto route = [&](int idx, std::uint64_t attempt) {
    return detail::exact_length_path(g, pairs[idx].first, pairs[idx].second, L, blocked,
                                     derive_seed(seed, "route", static_cast<std::uint64_t>(idx) * 4 + attempt), budget,
                                     res.nodes);
  };
  std::vector<int> order;  // routed indices, most recent last
  for (int idx = 0; idx < static_cast<int>(pairs.size()); ++idx) {
    if (auto p = route(idx, 0)) {
      mark(*p, 1);
      res.paths[{idx, idx}] = *p;
      order.push_back(idx);
      continue;
    }
    bool fixed = false;
    if (!order.empty()) {
      ++res.reroutes;
      int prev = order.back();
      Path old = res.paths.at({prev, prev});
      mark(old, 0);
      if (auto p = route(idx, 1)) {
        mark(*p, 1);
        if (auto q = route(prev, 2)) {
          mark(*q, 1);
          res.paths[{prev, prev}] = *q;
          res.paths[{idx, idx}] = *p;
          order.push_back(idx);
          fixed = true;
        } else {
          mark(*p, 0);
        }
      }
      if (!fixed) mark(old, 1);
    }
    if (!fixed) {
      if (mode == RunMode::Strict)
        throw Error(ErrorCode::RoutingFailed,
                    "pair " + std::to_string(pairs[idx].first) + "," + std::to_string(pairs[idx].second),
                    pairs[idx].first, pairs[idx].second);
      res.failed.push_back(idx);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Balanced subdivision driver

struct SubdivisionDiagnostics {
  SubdivisionVariant variant = SubdivisionVariant::D0Three;
  double eta = 0, eps = 0;
  int n = 0, d = 0;
  double lambda = 0;
  int t_target = 0;
  int star_size = 0;
  int stars_found = 0;
  int reservoir_attempts = 0;
  bool reservoir_accepted = false;
  int reservoir_star_violations = 0;
  int reservoir_vertex_violations = 0;
  PAlphaParams params;
  PAlphaCertificate palpha;
  int L_formula = 0;
  int L_headline = 0;
  int L_used = 0;
  int beta_violations = 0;
  int routed = 0;
  int failed = 0;
  int reroutes = 0;
  int achieved_t = 0;
  int path_length = 0;
  std::string failing_stage;
};

struct SubdivisionResult {
  EmbeddingCertificate cert;
  SubdivisionDiagnostics diag;
  StarSystem system;
};

inline SubdivisionResult build_balanced_subdivision(const Graph& g, const SpectralReport& report, double eta, double eps,
                                                    std::uint64_t seed, RunMode mode,
                                                    SubdivisionVariant variant = SubdivisionVariant::D0Three,
                                                    int reservoir_retries = 16) {
  if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
  SubdivisionResult res;
  auto& dg = res.diag;
  dg.variant = variant;
  dg.eta = eta;
  dg.eps = eps;
  dg.n = g.n();
  dg.d = report.d;
  dg.lambda = report.lambda;
  const double n = g.n(), d = report.d;
  dg.t_target = star_count(report.d, eta);
  dg.star_size = star_size(report.d, eta);
  dg.params = palpha_params(n, eta, variant);
  dg.palpha = p_alpha_certificate(n, d, report.lambda, dg.params);
  dg.L_headline = headline_path_length(n, eta);
  dg.L_formula = fixed_path_length(dg.params.n0, std::max(dg.params.d0, 3.0));
  const bool strict = mode == RunMode::Strict;
  if (strict) {
    bool spectral_ok = 2048.0 * report.lambda / (eta * eta) < d;
    bool degree_ok = d <= eta * std::pow(n, 0.5 - eps);
    if (!spectral_ok || !degree_ok || !dg.palpha.pass) {
      dg.failing_stage = "precondition";
      throw Error(ErrorCode::PreconditionFailed, std::string("subdivision needs ") +
                                                      (!spectral_ok ? "2048 lambda / eta^2 < d" :
                                                       !degree_ok   ? "d <= eta n^(1/2 - eps)" :
                                                                      "the P_alpha inequality"));
    }
  }
  auto& cert = res.cert;
  cert.kind = EmbeddingKind::Subdivision;
  auto trivial = [&](const std::string& stage) {
    dg.failing_stage = stage;
    cert.branch = {0};
    cert.pairs.clear();
    cert.ell.reset();
    dg.achieved_t = 1;
    return res;
  };

  // Stars.
  try {
    res.system = pack_disjoint_stars(g, report, eta, mode);
  } catch (const Error& e) {
    if (strict || e.code() != ErrorCode::Insufficient) throw;
    dg.failing_stage = "stars";
    // Keep what fits.
    auto view = view_minus(g, {}, {});
    std::vector<char> taken(static_cast<std::size_t>(g.n()), 0);
    for (std::int64_t i = 0; i < e.detail(); ++i)
      res.system.stars.push_back(pack_stars_into(view, {StarSpec{1, dg.star_size}}, 0, taken).front());
  }
  auto& sys = res.system;
  const int t = static_cast<int>(sys.stars.size());
  dg.stars_found = t;
  if (t < 2) return trivial("stars");

  // Reservoir.
  auto rs = sample_reservoir(g, sys.stars, eta, seed, reservoir_retries, !strict);
  sys.S = rs.S;
  dg.reservoir_attempts = rs.attempts;
  dg.reservoir_accepted = rs.accepted;
  dg.reservoir_star_violations = rs.check.star_violations;
  dg.reservoir_vertex_violations = rs.check.vertex_violations;

  // Leaves u_ij in A_i n S, ascending.
  std::vector<char> inS(static_cast<std::size_t>(g.n()), 0);
  for (Vertex v : sys.S) inS[v] = 1;
  std::vector<std::vector<Vertex>> pool(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i)
    for (Vertex l : sys.stars[i].leaves)
      if (inS[l]) pool[i].push_back(l);
  // Each surviving star needs one reservoir leaf per partner.
  std::vector<int> alive(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) alive[i] = i;
  for (bool changed = true; changed;) {
    std::vector<int> next;
    for (int i : alive)
      if (static_cast<int>(pool[i].size()) >= static_cast<int>(alive.size()) - 1) next.push_back(i);
    changed = next.size() != alive.size();
    alive = std::move(next);
  }
  if (static_cast<int>(alive.size()) < t) {
    if (strict) throw Error(ErrorCode::Insufficient, "stars short of reservoir leaves");
    if (dg.failing_stage.empty()) dg.failing_stage = "reservoir";
  }
  const int ta = static_cast<int>(alive.size());
  if (ta < 2) return trivial("reservoir");
  std::vector<Vertex> sprime;
  for (int x = 0; x < ta; ++x) {
    sprime.push_back(sys.stars[alive[x]].center);
    int used = 0;
    for (int y = 0; y < ta; ++y)
      if (y != x) {
        Vertex l = pool[alive[x]][used++];
        sys.chosen[{x, y}] = l;
        sprime.push_back(l);
      }
  }
  VertexSet Sp = make_vertex_set(sprime);

  // Routing.
  dg.L_used = std::max(dg.L_formula, routable_path_length(n, d));
  std::vector<std::pair<Vertex, Vertex>> pairs;
  std::vector<std::pair<int, int>> pair_ix;
  for (int x = 0; x < ta; ++x)
    for (int y = x + 1; y < ta; ++y) {
      pairs.emplace_back(sys.chosen.at({x, y}), sys.chosen.at({y, x}));
      pair_ix.emplace_back(x, y);
    }
  auto fl = connect_fixed_length(g, pairs, Sp, dg.L_used, dg.params.beta, derive_seed(seed, "connect"), mode);
  dg.beta_violations = fl.beta_violations;
  dg.reroutes = fl.reroutes;
  dg.failed = static_cast<int>(fl.failed.size());
  dg.routed = static_cast<int>(fl.paths.size());
  std::vector<std::pair<int, int>> missing;
  for (int k : fl.failed) missing.push_back(pair_ix[k]);
  if (!missing.empty() && dg.failing_stage.empty()) dg.failing_stage = "routing";
  auto keep = peel_missing(ta, missing);
  if (keep.size() < 2) return trivial("routing");

  std::map<std::pair<int, int>, int> index_of;
  for (int k = 0; k < static_cast<int>(pair_ix.size()); ++k) index_of[pair_ix[k]] = k;
  for (int x : keep) cert.branch.push_back(sys.stars[alive[x]].center);
  for (int a = 0; a < static_cast<int>(keep.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(keep.size()); ++b) {
      int k = index_of.at({keep[a], keep[b]});
      Path p{cert.branch[a]};
      const Path& mid = fl.paths.at({k, k});
      p.insert(p.end(), mid.begin(), mid.end());
      p.push_back(cert.branch[b]);
      cert.pairs.push_back({a, b, std::move(p)});
    }
  dg.achieved_t = static_cast<int>(keep.size());
  dg.path_length = dg.L_used + 2;
  cert.ell = dg.path_length - 1;
  return res;
}

inline nlohmann::ordered_json to_json(const SubdivisionDiagnostics& d) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(d.variant);
  j["eta"] = d.eta;
  j["eps"] = d.eps;
  j["n"] = d.n;
  j["d"] = d.d;
  j["lambda"] = d.lambda;
  j["t_target"] = d.t_target;
  j["star_size"] = d.star_size;
  j["stars_found"] = d.stars_found;
  j["reservoir"] = {{"attempts", d.reservoir_attempts},
                    {"accepted", d.reservoir_accepted},
                    {"star_violations", d.reservoir_star_violations},
                    {"vertex_violations", d.reservoir_vertex_violations}};
  j["p_alpha"] = {{"n0", d.params.n0},     {"d0", d.params.d0},     {"alpha", d.params.alpha},
                  {"beta", d.params.beta}, {"rhs", d.palpha.rhs},   {"margin", d.palpha.margin},
                  {"pass", d.palpha.pass}};
  j["L_formula"] = d.L_formula;
  j["L_headline"] = d.L_headline;
  j["L_used"] = d.L_used;
  j["beta_violations"] = d.beta_violations;
  j["routed"] = d.routed;
  j["failed"] = d.failed;
  j["reroutes"] = d.reroutes;
  j["achieved_t"] = d.achieved_t;
  j["path_length"] = d.path_length;
  j["failing_stage"] = d.failing_stage;
  return j;
}

}  // namespace imforge
