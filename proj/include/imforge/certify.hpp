#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imforge/certificate.hpp"
#include "imforge/expander.hpp"
#include "imforge/graph.hpp"

// Checks rely only on the graph and the certificate data itself.

namespace imforge {

struct Violation {
  std::string code;
  std::string detail;
};

struct VerifyReport {
  bool valid = true;
  EmbeddingKind kind = EmbeddingKind::Immersion;
  int t = 0;
  int path_count = 0;
  bool strong = true;
  std::map<int, int> length_histogram;
  std::vector<Violation> violations;

  void add(std::string code, std::string detail) {
    violations.push_back({std::move(code), std::move(detail)});
    valid = false;
  }
  bool has(const std::string& code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.code == code; });
  }
};

namespace detail {

inline std::string path_str(const Path& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "-" : "") + std::to_string(p[i]);
  return s;
}

inline bool in_range(const Graph& g, Vertex v) { return v >= 0 && v < g.n(); }

// Appends MISSING_EDGE / NOT_SIMPLE / VERTEX_OUT_OF_RANGE for one walk.
inline bool check_walk(const Graph& g, const Path& p, const std::string& what, VerifyReport& r) {
  bool ok = true;
  for (Vertex v : p)
    if (!in_range(g, v)) {
      r.add("VERTEX_OUT_OF_RANGE", what + " uses vertex " + std::to_string(v));
      return false;
    }
  for (std::size_t k = 1; k < p.size(); ++k)
    if (!g.has_edge(p[k - 1], p[k])) {
      r.add("MISSING_EDGE", what + " edge " + std::to_string(p[k - 1]) + "-" + std::to_string(p[k]));
      ok = false;
    }
  std::unordered_set<Vertex> seen;
  for (Vertex v : p)
    if (!seen.insert(v).second) {
      r.add("NOT_SIMPLE", what + " repeats vertex " + std::to_string(v));
      ok = false;
      break;
    }
  return ok;
}

}  // namespace detail

inline VerifyReport verify(const Graph& g, const EmbeddingCertificate& cert) {
  VerifyReport r;
  r.kind = cert.kind;
  r.t = static_cast<int>(cert.branch.size());
  r.path_count = static_cast<int>(cert.pairs.size());
  const int t = r.t;

  std::unordered_map<Vertex, int> branch_index;
  for (int i = 0; i < t; ++i) {
    Vertex b = cert.branch[i];
    if (!detail::in_range(g, b)) r.add("VERTEX_OUT_OF_RANGE", "branch vertex " + std::to_string(b));
    if (!branch_index.emplace(b, i).second)
      r.add("BRANCH_NOT_INJECTIVE", "vertex " + std::to_string(b) + " used twice");
  }

  std::set<std::pair<int, int>> seen_pairs;
  std::unordered_map<std::uint64_t, int> edge_owner;
  std::unordered_map<Vertex, int> internal_owner;
  for (int pi = 0; pi < static_cast<int>(cert.pairs.size()); ++pi) {
    const auto& pp = cert.pairs[pi];
    std::string what = "pair (" + std::to_string(pp.i) + "," + std::to_string(pp.j) + ")";
    int a = std::min(pp.i, pp.j), b = std::max(pp.i, pp.j);
    if (a < 0 || b >= t || a == b) {
      r.add("BAD_PAIR_INDEX", what);
      continue;
    }
    if (!seen_pairs.insert({a, b}).second) r.add("DUPLICATE_PAIR", what);
    const Path& p = pp.path;
    if (p.size() < 2) {
      r.add("EMPTY_PATH", what);
      continue;
    }
    Vertex bi = cert.branch[pp.i], bj = cert.branch[pp.j];
    if (!((p.front() == bi && p.back() == bj) || (p.front() == bj && p.back() == bi)))
      r.add("ENDPOINT_MISMATCH", what + " path " + detail::path_str(p));
    if (!detail::check_walk(g, p, what, r)) continue;
    int len = static_cast<int>(p.size()) - 1;
    ++r.length_histogram[len];
    if (cert.ell && len != *cert.ell + 1)
      r.add("LENGTH_MISMATCH", what + " has length " + std::to_string(len) + ", expected " +
                                   std::to_string(*cert.ell + 1));
    for (std::size_t k = 1; k < p.size(); ++k) {
      auto key = edge_key(p[k - 1], p[k]);
      auto [it, fresh] = edge_owner.emplace(key, pi);
      if (!fresh && cert.kind == EmbeddingKind::Immersion)
        r.add("EDGE_REUSE", what + " reuses edge " + std::to_string(p[k - 1]) + "-" +
                                std::to_string(p[k]) + " of path " + std::to_string(it->second));
    }
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      Vertex v = p[k];
      bool is_branch = branch_index.count(v) > 0;
      if (is_branch) r.strong = false;
      if (cert.kind == EmbeddingKind::Subdivision) {
        if (is_branch) r.add("BRANCH_INTERNAL", what + " passes branch vertex " + std::to_string(v));
        auto [it, fresh] = internal_owner.emplace(v, pi);
        if (!fresh)
          r.add("INTERNAL_REUSE", what + " shares internal vertex " + std::to_string(v) +
                                      " with path " + std::to_string(it->second));
      }
    }
  }
  long long expected = static_cast<long long>(t) * (t - 1) / 2;
  long long missing = 0;
  for (int a = 0; a < t; ++a)
    for (int b = a + 1; b < t; ++b)
      if (!seen_pairs.count({a, b})) {
        if (missing < 20)
          r.add("MISSING_PAIR", "(" + std::to_string(a) + "," + std::to_string(b) + ")");
        ++missing;
      }
  if (missing >= 20)
    r.add("MISSING_PAIR", std::to_string(missing) + " of " + std::to_string(expected) + " pairs missing");
  return r;
}

inline VerifyReport verify_unit(const Graph& g, const Unit& u) {
  VerifyReport r;
  r.t = static_cast<int>(u.stars.size());
  r.path_count = static_cast<int>(u.branches.size());
  if (static_cast<int>(u.stars.size()) != u.h1)
    r.add("STAR_COUNT", std::to_string(u.stars.size()) + " stars, h1=" + std::to_string(u.h1));
  if (u.branches.size() != u.stars.size())
    r.add("BRANCH_COUNT", std::to_string(u.branches.size()) + " branches for " +
                              std::to_string(u.stars.size()) + " stars");
  std::unordered_map<Vertex, int> star_vertex;
  std::unordered_set<Vertex> leaves;
  for (int i = 0; i < static_cast<int>(u.stars.size()); ++i) {
    const auto& s = u.stars[i];
    if (static_cast<int>(s.leaves.size()) < u.h2)
      r.add("STAR_SMALL", "star " + std::to_string(i) + " has " + std::to_string(s.leaves.size()) + " leaves");
    std::vector<Vertex> vs{s.center};
    vs.insert(vs.end(), s.leaves.begin(), s.leaves.end());
    for (Vertex v : vs) {
      if (!detail::in_range(g, v)) {
        r.add("VERTEX_OUT_OF_RANGE", "star " + std::to_string(i));
        continue;
      }
      auto [it, fresh] = star_vertex.emplace(v, i);
      if (!fresh)
        r.add("STAR_OVERLAP", "vertex " + std::to_string(v) + " in stars " + std::to_string(it->second) +
                                  " and " + std::to_string(i));
    }
    for (Vertex l : s.leaves) {
      leaves.insert(l);
      if (detail::in_range(g, l) && detail::in_range(g, s.center) && !g.has_edge(s.center, l))
        r.add("MISSING_EDGE", "star edge " + std::to_string(s.center) + "-" + std::to_string(l));
    }
    if (s.center == u.center || std::binary_search(s.leaves.begin(), s.leaves.end(), u.center))
      r.add("STAR_OVERLAP", "star " + std::to_string(i) + " contains the unit centre");
  }
  std::unordered_map<std::uint64_t, int> edge_owner;
  for (int i = 0; i < static_cast<int>(u.branches.size()); ++i) {
    const auto& b = u.branches[i];
    std::string what = "branch " + std::to_string(i);
    if (b.empty()) {
      r.add("EMPTY_PATH", what);
      continue;
    }
    ++r.length_histogram[static_cast<int>(b.size()) - 1];
    if (b.front() != u.center || (i < static_cast<int>(u.stars.size()) && b.back() != u.stars[i].center))
      r.add("BRANCH_ENDPOINT", what + " " + detail::path_str(b));
    if (static_cast<int>(b.size()) - 1 > u.h3)
      r.add("BRANCH_TOO_LONG", what + " length " + std::to_string(b.size() - 1));
    detail::check_walk(g, b, what, r);
    for (std::size_t k = 1; k < b.size(); ++k) {
      auto key = edge_key(b[k - 1], b[k]);
      auto [it, fresh] = edge_owner.emplace(key, i);
      if (!fresh) r.add("BRANCH_EDGE_REUSE", what + " shares an edge with branch " + std::to_string(it->second));
    }
    for (std::size_t k = 1; k + 1 < b.size(); ++k)
      if (leaves.count(b[k])) r.add("EXT_INT_OVERLAP", what + " passes leaf " + std::to_string(b[k]));
  }
  // Star edges are part of the unit too; they must not double as branch edges.
  for (const auto& s : u.stars)
    for (Vertex l : s.leaves)
      if (edge_owner.count(edge_key(s.center, l)))
        r.add("BRANCH_EDGE_REUSE", "star edge " + std::to_string(s.center) + "-" + std::to_string(l) +
                                       " is also a branch edge");
  return r;
}

namespace detail {

inline void check_expansion(const Graph& g, const Expansion& e, Vertex root, int D, int m,
                            const std::string& what, VerifyReport& r) {
  if (e.size() != D) r.add("EXPANSION_SIZE", what + " has " + std::to_string(e.size()) + " vertices, D=" + std::to_string(D));
  if (e.vertices.empty() || e.root() != root) {
    r.add("EXPANSION_ROOT", what + " is not rooted at its core");
    return;
  }
  if (e.parent.size() != e.vertices.size()) {
    r.add("EXPANSION_SHAPE", what + " parent list size");
    return;
  }
  std::unordered_map<Vertex, int> depth;
  for (std::size_t i = 0; i < e.vertices.size(); ++i) {
    Vertex v = e.vertices[i];
    if (!in_range(g, v)) {
      r.add("VERTEX_OUT_OF_RANGE", what);
      return;
    }
    if (depth.count(v)) {
      r.add("EXPANSION_SHAPE", what + " repeats " + std::to_string(v));
      continue;
    }
    if (i == 0) {
      depth[v] = 0;
      continue;
    }
    auto it = depth.find(e.parent[i]);
    if (it == depth.end()) {
      r.add("EXPANSION_SHAPE", what + " parent of " + std::to_string(v) + " not earlier");
      continue;
    }
    if (!g.has_edge(v, e.parent[i]))
      r.add("MISSING_EDGE", what + " tree edge " + std::to_string(e.parent[i]) + "-" + std::to_string(v));
    depth[v] = it->second + 1;
    if (depth[v] > m) r.add("EXPANSION_DISTANCE", what + " vertex " + std::to_string(v) + " at depth " + std::to_string(depth[v]));
  }
}

}  // namespace detail

inline VerifyReport verify_adjuster(const Graph& g, const Adjuster& a) {
  VerifyReport r;
  r.t = 2;
  r.path_count = static_cast<int>(a.realizers.size());
  detail::check_expansion(g, a.I1, a.u1, a.D, a.m, "end I1", r);
  detail::check_expansion(g, a.I2, a.u2, a.D, a.m, "end I2", r);
  auto s1 = a.I1.vertex_set(), s2 = a.I2.vertex_set();
  std::unordered_set<Vertex> inA(a.A.begin(), a.A.end());
  if (inA.size() != a.A.size()) r.add("CENTER_SHAPE", "A has repeated vertices");
  for (Vertex v : s1) {
    if (inA.count(v)) r.add("ENDS_OVERLAP", "A meets I1 at " + std::to_string(v));
    if (std::binary_search(s2.begin(), s2.end(), v)) r.add("ENDS_OVERLAP", "I1 meets I2 at " + std::to_string(v));
  }
  for (Vertex v : s2)
    if (inA.count(v)) r.add("ENDS_OVERLAP", "A meets I2 at " + std::to_string(v));
  if (static_cast<long long>(a.A.size()) > 10LL * a.m * a.k)
    r.add("CENTER_BUDGET", "|A|=" + std::to_string(a.A.size()) + " > 10mk=" + std::to_string(10LL * a.m * a.k));
  if (a.ell > static_cast<int>(a.A.size()) + 1)
    r.add("ELL_BOUND", "ell=" + std::to_string(a.ell) + " > |A|+1");
  if (static_cast<int>(a.realizers.size()) != a.k + 1)
    r.add("REALIZER_COUNT", std::to_string(a.realizers.size()) + " realizers for k=" + std::to_string(a.k));
  for (int i = 0; i < static_cast<int>(a.realizers.size()); ++i) {
    const auto& p = a.realizers[i];
    std::string what = "realizer " + std::to_string(i);
    if (p.size() < 2) {
      r.add("EMPTY_PATH", what);
      continue;
    }
    if (p.front() != a.u1 || p.back() != a.u2) r.add("ENDPOINT_MISMATCH", what + " " + detail::path_str(p));
    detail::check_walk(g, p, what, r);
    int len = static_cast<int>(p.size()) - 1;
    ++r.length_histogram[len];
    int want = a.ell + 2 * i;
    if ((len - a.ell) % 2 != 0)
      r.add("LENGTH_PARITY", what + " length " + std::to_string(len) + " vs ell " + std::to_string(a.ell));
    else if (len != want)
      r.add("LENGTH_MISMATCH", what + " length " + std::to_string(len) + ", expected " + std::to_string(want));
    for (std::size_t k = 1; k + 1 < p.size(); ++k)
      if (!inA.count(p[k])) r.add("REALIZER_OUTSIDE_A", what + " passes " + std::to_string(p[k]));
  }
  return r;
}

inline nlohmann::ordered_json to_json(const VerifyReport& r) {
  nlohmann::ordered_json j;
  j["valid"] = r.valid;
  j["kind"] = to_string(r.kind);
  j["t"] = r.t;
  j["path_count"] = r.path_count;
  j["strong"] = r.strong;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (auto [len, c] : r.length_histogram) h[std::to_string(len)] = c;
  j["length_histogram"] = h;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) j["violations"].push_back({{"code", v.code}, {"detail", v.detail}});
  return j;
}

}  // namespace imforge
