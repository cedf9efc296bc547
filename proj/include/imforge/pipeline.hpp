#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"

namespace imforge {

enum class RunMode { Strict, BestEffort };

inline std::string to_string(RunMode m) { return m == RunMode::Strict ? "strict" : "best-effort"; }

inline RunMode parse_run_mode(const std::string& s) {
  if (s == "strict") return RunMode::Strict;
  if (s == "best-effort" || s == "best_effort") return RunMode::BestEffort;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + s + "'");
}

/// Edge ownership by graph edge id; -1 is free.
class EdgeLedger {
 public:
  explicit EdgeLedger(const Graph& g) : g_(&g), owner_(static_cast<std::size_t>(g.m()), -1) {}

  bool is_free(Vertex a, Vertex b) const {
    int id = g_->edge_id(a, b);
    return id >= 0 && owner_[id] < 0;
  }
  bool is_free_id(int id) const { return owner_[id] < 0; }
  int owner(Vertex a, Vertex b) const {
    int id = g_->edge_id(a, b);
    return id < 0 ? -2 : owner_[id];
  }
  /// Claims every edge of p for `who` (>= 0), or nothing if any edge is taken or missing.
  bool claim(const Path& p, int who) {
    std::vector<int> ids;
    for (std::size_t k = 1; k < p.size(); ++k) {
      int id = g_->edge_id(p[k - 1], p[k]);
      if (id < 0 || owner_[id] >= 0 || std::find(ids.begin(), ids.end(), id) != ids.end()) return false;
      ids.push_back(id);
    }
    for (int id : ids) owner_[id] = who;
    used_ += static_cast<int>(ids.size());
    return true;
  }
  /// Claims a set of edges (duplicates allowed) atomically.
  bool claim_edges(std::vector<Edge> es, int who) {
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    std::vector<int> ids;
    for (const auto& e : es) {
      int id = g_->edge_id(e.u, e.v);
      if (id < 0 || owner_[id] >= 0) return false;
      ids.push_back(id);
    }
    for (int id : ids) owner_[id] = who;
    used_ += static_cast<int>(ids.size());
    return true;
  }
  void release(const Path& p) {
    for (std::size_t k = 1; k < p.size(); ++k) {
      int id = g_->edge_id(p[k - 1], p[k]);
      if (id >= 0 && owner_[id] >= 0) {
        owner_[id] = -1;
        --used_;
      }
    }
  }
  int used() const { return used_; }
  const Graph& graph() const { return *g_; }

 private:
  const Graph* g_;
  std::vector<int> owner_;
  int used_ = 0;
};

/// Removes, one at a time, the index with the most missing pairs (ties: lowest
/// index) until no missing pair remains. Returns the survivors, ascending.
inline std::vector<int> peel_missing(int t, const std::vector<std::pair<int, int>>& missing) {
  std::vector<char> alive(static_cast<std::size_t>(t), 1);
  std::vector<int> count(static_cast<std::size_t>(t), 0);
  for (auto [a, b] : missing) {
    ++count[a];
    ++count[b];
  }
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(t));
  for (auto [a, b] : missing) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  while (true) {
    int worst = -1;
    for (int i = 0; i < t; ++i)
      if (alive[i] && count[i] > 0 && (worst < 0 || count[i] > count[worst])) worst = i;
    if (worst < 0) break;
    alive[worst] = 0;
    for (int j : adj[worst])
      if (alive[j]) --count[j];
    count[worst] = 0;
  }
  std::vector<int> out;
  for (int i = 0; i < t; ++i)
    if (alive[i]) out.push_back(i);
  return out;
}

/// True iff no edge appears in two paths or twice in one (global sorted sweep).
inline bool paths_edge_disjoint(const std::vector<Path>& paths) {
  std::vector<Edge> all;
  for (const auto& p : paths)
    for (std::size_t k = 1; k < p.size(); ++k) all.emplace_back(p[k - 1], p[k]);
  std::sort(all.begin(), all.end());
  return std::adjacent_find(all.begin(), all.end()) == all.end();
}

inline double floor_tol(double x) { return std::floor(x + 1e-9); }
inline double ceil_tol(double x) { return std::ceil(x - 1e-9); }

}  // namespace imforge
