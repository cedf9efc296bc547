#pragma once

#include <algorithm>
#include <chrono>
#include <iterator>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imforge/certificate.hpp"
#include "imforge/error.hpp"
#include "imforge/expander.hpp"
#include "imforge/graph.hpp"
#include "imforge/pipeline.hpp"
#include "imforge/spectral.hpp"

namespace imforge {

struct Connection {
  int i = 0, j = 0;
  int star_i = 0, star_j = 0;  // star (branch) index occupied in each unit
  Path segment;                // Ext(F_i) to Ext(F_j) route
  Path full;                   // center i to center j, loop-erased
  EdgeSet claimed;             // every edge of the unerased walk
};

/// Greedy connection state between units.
struct ConnectionLedger {
  std::map<std::pair<int, int>, Connection> paths;
  EdgeSet used_edges;                         // union of claimed walks
  std::vector<std::vector<char>> occupied;    // occupied[unit][star]
  VertexSet forbidden_centers;
  std::vector<std::pair<int, int>> missing;   // pairs with no route after the retry pass
  int first_pass = 0;
  int retry_found = 0;
};

/// Walk with cycles erased in order of appearance.
inline Path loop_erase(const Path& walk) {
  Path out;
  std::map<Vertex, std::size_t> pos;
  for (Vertex v : walk) {
    auto it = pos.find(v);
    if (it != pos.end()) {
      for (std::size_t k = it->second + 1; k < out.size(); ++k) pos.erase(out[k]);
      out.resize(it->second + 1);
    } else {
      pos[v] = out.size();
      out.push_back(v);
    }
  }
  return out;
}

/// For unordered pairs in ascending order, route a short (Ext(F_i), Ext(F_j))
/// path avoiding all centers, branch edges and used edges, ending at leaves of
/// unoccupied stars with free pendant edges; then a retry pass over misses.
inline ConnectionLedger connect_units(const Graph& g, const std::vector<Unit>& units, int max_len,
                                      std::uint64_t seed = 0) {
  (void)seed;  // routing is deterministic BFS
  ConnectionLedger L;
  const int n = g.n();
  const int t = static_cast<int>(units.size());
  std::vector<char> is_center(static_cast<std::size_t>(n), 0);
  std::vector<Vertex> cs;
  for (const auto& u : units) {
    is_center[u.center] = 1;
    cs.push_back(u.center);
  }
  L.forbidden_centers = make_vertex_set(cs);
  std::vector<char> branch_edge(static_cast<std::size_t>(g.m()), 0);
  for (const auto& u : units)
    for (const auto& b : u.branches)
      for (std::size_t k = 1; k < b.size(); ++k) branch_edge[g.edge_id(b[k - 1], b[k])] = 1;
  L.occupied.resize(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) L.occupied[i].assign(units[i].stars.size(), 0);
  EdgeLedger ledger(g);
  BfsWorkspace ws(n);
  // leaf_star[v] for the unit currently marked; stamp arrays keep this O(unit size).
  std::vector<int> star_a(static_cast<std::size_t>(n), -1), star_b(static_cast<std::size_t>(n), -1);
  std::vector<char> ext_a(static_cast<std::size_t>(n), 0), ext_b(static_cast<std::size_t>(n), 0);

  auto mark = [&](int ui, std::vector<int>& star, std::vector<char>& ext, bool on) {
    const auto& u = units[ui];
    for (int s = 0; s < static_cast<int>(u.stars.size()); ++s)
      for (Vertex l : u.stars[s].leaves) {
        ext[l] = on;
        bool eligible = on && !L.occupied[ui][s] && !is_center[l] && ledger.is_free(u.stars[s].center, l);
        star[l] = eligible ? s : -1;
      }
  };

  auto attempt = [&](int i, int j) -> bool {
    mark(i, star_a, ext_a, true);
    mark(j, star_b, ext_b, true);
    std::vector<Vertex> src;
    for (int s = 0; s < static_cast<int>(units[i].stars.size()); ++s)
      for (Vertex l : units[i].stars[s].leaves)
        if (star_a[l] >= 0) src.push_back(l);
    std::optional<Path> seg;
    if (!src.empty())
      seg = bfs_route(
          g, src, [&](Vertex w) { return star_b[w] >= 0; },
          [&](Vertex w) { return !is_center[w] && !ext_a[w] && !ext_b[w]; },
          [&](int id) { return !branch_edge[id] && ledger.is_free_id(id); }, max_len, ws);
    bool ok = false;
    if (seg) {
      int si = star_a[seg->front()], sj = star_b[seg->back()];
      Path walk = units[i].branches[si];
      walk.insert(walk.end(), seg->begin(), seg->end());
      const auto& bj = units[j].branches[sj];
      walk.insert(walk.end(), bj.rbegin(), bj.rend());
      Path full = loop_erase(walk);
      auto claimed = make_edge_set(path_edges(walk));
      if (ledger.claim_edges(claimed, static_cast<int>(L.paths.size()))) {
        L.occupied[i][si] = 1;
        L.occupied[j][sj] = 1;
        L.paths[{i, j}] = Connection{i, j, si, sj, *seg, full, std::move(claimed)};
        ok = true;
      }
    }
    mark(i, star_a, ext_a, false);
    mark(j, star_b, ext_b, false);
    return ok;
  };

  std::vector<std::pair<int, int>> miss;
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j)
      if (attempt(i, j)) ++L.first_pass;
      else miss.emplace_back(i, j);
  for (auto [i, j] : miss)
    if (attempt(i, j)) ++L.retry_found;
    else L.missing.emplace_back(i, j);

  std::vector<Edge> used;
  for (const auto& [key, c] : L.paths) used.insert(used.end(), c.claimed.begin(), c.claimed.end());
  std::sort(used.begin(), used.end());
  L.used_edges = std::move(used);
  return L;
}

/// Checks the ledger from its stored data. Returns violation codes.
inline std::vector<std::string> check_ledger(const Graph& g, const std::vector<Unit>& units,
                                             const ConnectionLedger& L) {
  std::vector<std::string> out;
  std::vector<Edge> seg_edges, full_edges, claimed, branch;
  for (const auto& u : units)
    for (const auto& b : u.branches)
      for (const auto& e : path_edges(b)) branch.push_back(e);
  std::sort(branch.begin(), branch.end());
  auto centers = L.forbidden_centers;
  for (const auto& [key, c] : L.paths) {
    for (const auto& e : path_edges(c.segment)) seg_edges.push_back(e);
    for (const auto& e : path_edges(c.full)) full_edges.push_back(e);
    claimed.insert(claimed.end(), c.claimed.begin(), c.claimed.end());
    for (const auto& e : path_edges(c.full))
      if (!std::binary_search(c.claimed.begin(), c.claimed.end(), e)) out.push_back("UNCLAIMED_EDGE");
    for (const auto& e : path_edges(c.segment))
      if (!std::binary_search(c.claimed.begin(), c.claimed.end(), e)) out.push_back("UNCLAIMED_EDGE");
    for (Vertex v : c.segment)
      if (std::binary_search(centers.begin(), centers.end(), v)) out.push_back("SEGMENT_TOUCHES_CENTER");
    for (std::size_t k = 1; k < c.full.size(); ++k)
      if (!g.has_edge(c.full[k - 1], c.full[k])) out.push_back("MISSING_EDGE");
    if (c.full.front() != units[c.i].center || c.full.back() != units[c.j].center) out.push_back("ENDPOINT_MISMATCH");
  }
  std::sort(seg_edges.begin(), seg_edges.end());
  std::sort(full_edges.begin(), full_edges.end());
  if (std::adjacent_find(seg_edges.begin(), seg_edges.end()) != seg_edges.end()) out.push_back("SEGMENT_EDGE_REUSE");
  if (std::adjacent_find(full_edges.begin(), full_edges.end()) != full_edges.end()) out.push_back("PATH_EDGE_REUSE");
  std::vector<Edge> both;
  std::set_intersection(seg_edges.begin(), seg_edges.end(), branch.begin(), branch.end(), std::back_inserter(both));
  if (!both.empty()) out.push_back("SEGMENT_USES_BRANCH");
  std::sort(claimed.begin(), claimed.end());
  if (std::adjacent_find(claimed.begin(), claimed.end()) != claimed.end()) out.push_back("CLAIM_OVERLAP");
  if (claimed != L.used_edges) out.push_back("USED_EDGES_STALE");
  return out;
}

/// Units with more than `threshold` pendant (star) edges on ledger paths.
inline std::vector<int> filter_bad_units(const Graph& g, const std::vector<Unit>& units, const ConnectionLedger& L,
                                         double threshold) {
  if (!(threshold > 0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  (void)g;
  std::vector<int> good;
  for (int i = 0; i < static_cast<int>(units.size()); ++i) {
    int consumed = 0;
    for (const auto& s : units[i].stars)
      for (Vertex l : s.leaves)
        consumed += std::binary_search(L.used_edges.begin(), L.used_edges.end(), Edge(s.center, l));
    if (!(consumed > threshold)) good.push_back(i);
  }
  return good;
}

struct MediumOptions {
  double eps1 = 0.125, eps2 = 0.2;
  double y = 1.0;
  int h1 = 0, h2 = 0, h3 = 0;  // 0: formula default
  int units = 0;               // 0: floor((1 - 5 eta) d)
  int max_len = 0;             // 0: h3
  UnitOptions unit;
};

struct MediumStage {
  std::string stage;
  long long count = 0;
  double seconds = 0;
};

struct MediumDiagnostics {
  std::string run_id;
  int n = 0, d = 0;
  double lambda = 0, eta = 0;
  double m = 0;
  int h1 = 0, h2 = 0, h3 = 0, max_len = 0;
  int units_requested = 0, units_built = 0;
  int pairs_connected = 0, pairs_missing = 0, retry_found = 0;
  int bad_units = 0;
  double bad_threshold = 0;
  bool ledger_ok = false;
  std::vector<std::string> ledger_violations;
  bool trivial = false;
  int achieved_order = 0;
  double seconds = 0;
  std::vector<MediumStage> stages;

  static std::string csv_header() { return "run_id,stage,count,seconds"; }
  std::vector<std::string> csv_rows() const {
    std::vector<std::string> rows;
    for (const auto& s : stages) {
      std::ostringstream os;
      os << run_id << ',' << s.stage << ',' << s.count << ',' << s.seconds;
      rows.push_back(os.str());
    }
    return rows;
  }
};

inline nlohmann::ordered_json to_json(const MediumDiagnostics& x) {
  nlohmann::ordered_json j;
  j["run_id"] = x.run_id;
  j["n"] = x.n;
  j["d"] = x.d;
  j["lambda"] = x.lambda;
  j["eta"] = x.eta;
  j["m"] = x.m;
  j["h1"] = x.h1;
  j["h2"] = x.h2;
  j["h3"] = x.h3;
  j["max_len"] = x.max_len;
  j["units_requested"] = x.units_requested;
  j["units_built"] = x.units_built;
  j["pairs_connected"] = x.pairs_connected;
  j["pairs_missing"] = x.pairs_missing;
  j["retry_found"] = x.retry_found;
  j["bad_units"] = x.bad_units;
  j["bad_threshold"] = x.bad_threshold;
  j["ledger_ok"] = x.ledger_ok;
  j["ledger_violations"] = x.ledger_violations;
  j["trivial"] = x.trivial;
  j["achieved_order"] = x.achieved_order;
  j["seconds"] = x.seconds;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : x.stages) j["stages"].push_back({{"stage", s.stage}, {"count", s.count}, {"seconds", s.seconds}});
  return j;
}

struct MediumResult {
  EmbeddingCertificate cert;
  MediumDiagnostics diag;
  std::vector<Unit> units;
  ConnectionLedger ledger;
};

/// Medium-case immersion: units, connections, bad-unit filter, then peeling
/// to a fully connected set of centers (best-effort).
inline MediumResult build_medium_immersion(const Graph& g, const SpectralReport& report, double eta,
                                           std::uint64_t seed, RunMode mode, const MediumOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  auto lap = [&]() { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  MediumResult res;
  auto& dg = res.diag;
  const int n = g.n(), d = report.d;
  dg.n = n;
  dg.d = d;
  dg.lambda = report.lambda;
  dg.eta = eta;
  const bool strict = mode == RunMode::Strict;
  if (strict && !(d > 2.0 * report.lambda)) throw Error(ErrorCode::PreconditionFailed, "d <= 2 lambda");

  ExpanderParams ep{opt.eps1, opt.eps2, 1.0};
  double m = 2.0;
  try {
    m = mix_length_m(n, std::max(1, d), ep);
  } catch (const Error&) {
  }
  m = std::clamp(m, 2.0, static_cast<double>(std::max(2, n)));
  dg.m = m;
  auto clampi = [](double x, int lo, int hi) { return static_cast<int>(std::clamp(x, double(lo), double(std::max(lo, hi)))); };
  dg.h1 = opt.h1 > 0 ? opt.h1 : clampi(ceil_tol((1.0 - 4.0 * eta) * d), 1, d);
  dg.h2 = opt.h2 > 0 ? opt.h2 : clampi(ceil_tol(std::pow(m, opt.y)), 1, d);
  dg.h3 = opt.h3 > 0 ? opt.h3 : clampi(ceil_tol(m), 1, n);
  dg.max_len = opt.max_len > 0 ? opt.max_len : dg.h3;
  int want = opt.units > 0 ? opt.units : static_cast<int>(floor_tol((1.0 - 5.0 * eta) * d));
  dg.units_requested = want;
  dg.bad_threshold = eta * d * dg.h2 / 2.0;

  auto& cert = res.cert;
  cert.kind = EmbeddingKind::Immersion;
  if (want < 2) {
    // Trivial clique: one branch vertex, no paths.
    dg.trivial = true;
    if (n > 0) cert.branch = {0};
    dg.achieved_order = static_cast<int>(cert.branch.size());
    dg.ledger_ok = true;
    dg.seconds = lap();
    return res;
  }

  res.units = collect_units(g, want, dg.h1, dg.h2, dg.h3, derive_seed(seed, "medium-units"), opt.unit);
  dg.units_built = static_cast<int>(res.units.size());
  dg.stages.push_back({"units", dg.units_built, lap()});
  if (dg.units_built < want && (strict || dg.units_built == 0))
    throw Error(ErrorCode::UnitShortfall, std::to_string(dg.units_built) + " of " + std::to_string(want) + " units",
                dg.units_built, want);

  res.ledger = connect_units(g, res.units, dg.max_len, seed);
  auto& L = res.ledger;
  dg.pairs_connected = static_cast<int>(L.paths.size());
  dg.pairs_missing = static_cast<int>(L.missing.size());
  dg.retry_found = L.retry_found;
  dg.stages.push_back({"connect", L.first_pass, lap()});
  dg.stages.push_back({"retry", L.retry_found, lap()});
  dg.ledger_violations = check_ledger(g, res.units, L);
  dg.ledger_ok = dg.ledger_violations.empty();

  auto good = filter_bad_units(g, res.units, L, std::max(dg.bad_threshold, 1e-9));
  dg.bad_units = dg.units_built - static_cast<int>(good.size());
  dg.stages.push_back({"filter", static_cast<long long>(good.size()), lap()});

  std::vector<int> index_of(res.units.size(), -1);
  for (int k = 0; k < static_cast<int>(good.size()); ++k) index_of[good[k]] = k;
  std::vector<std::pair<int, int>> missing;
  for (int a = 0; a < static_cast<int>(good.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(good.size()); ++b)
      if (!L.paths.count({good[a], good[b]})) missing.emplace_back(a, b);
  if (strict && !missing.empty())
    throw Error(ErrorCode::Incomplete, std::to_string(missing.size()) + " unit pairs unconnected",
                static_cast<std::int64_t>(missing.size()));
  auto keep = peel_missing(static_cast<int>(good.size()), missing);
  dg.stages.push_back({"peel", static_cast<long long>(keep.size()), lap()});

  for (int k : keep) cert.branch.push_back(res.units[good[k]].center);
  for (int a = 0; a < static_cast<int>(keep.size()); ++a)
    for (int b = a + 1; b < static_cast<int>(keep.size()); ++b)
      cert.pairs.push_back({a, b, L.paths.at({good[keep[a]], good[keep[b]]}).full});
  dg.achieved_order = static_cast<int>(cert.branch.size());
  dg.seconds = lap();
  return res;
}

}  // namespace imforge
