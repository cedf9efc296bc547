#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"

namespace imforge {

enum class EmbeddingKind { Immersion, Subdivision };

inline std::string to_string(EmbeddingKind k) {
  return k == EmbeddingKind::Immersion ? "immersion" : "subdivision";
}

struct PairPath {
  int i = 0;
  int j = 0;
  Path path;
};

/// Branch vertices plus one path per unordered branch pair.
struct EmbeddingCertificate {
  EmbeddingKind kind = EmbeddingKind::Immersion;
  std::vector<Vertex> branch;
  std::vector<PairPath> pairs;
  std::optional<int> ell;
};

inline nlohmann::ordered_json to_json(const EmbeddingCertificate& c) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(c.kind);
  j["branch"] = c.branch;
  j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : c.pairs) {
    nlohmann::ordered_json pj;
    pj["i"] = p.i;
    pj["j"] = p.j;
    pj["path"] = p.path;
    j["pairs"].push_back(pj);
  }
  if (c.ell) j["ell"] = *c.ell;
  else j["ell"] = nullptr;
  return j;
}

inline EmbeddingCertificate certificate_from_json(const nlohmann::json& j) {
  try {
    EmbeddingCertificate c;
    auto kind = j.at("kind").get<std::string>();
    if (kind == "immersion") c.kind = EmbeddingKind::Immersion;
    else if (kind == "subdivision") c.kind = EmbeddingKind::Subdivision;
    else throw Error(ErrorCode::Parse, "unknown kind '" + kind + "'");
    c.branch = j.at("branch").get<std::vector<Vertex>>();
    for (const auto& pj : j.at("pairs")) {
      PairPath p;
      p.i = pj.at("i").get<int>();
      p.j = pj.at("j").get<int>();
      p.path = pj.at("path").get<Path>();
      c.pairs.push_back(std::move(p));
    }
    if (j.contains("ell") && !j.at("ell").is_null()) c.ell = j.at("ell").get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("certificate: ") + e.what());
  }
}

/// A (D, m)-expansion stored as a BFS tree: vertices[0] is the root and
/// parent[i] is the tree parent of vertices[i] (-1 for the root).
struct Expansion {
  std::vector<Vertex> vertices;
  std::vector<Vertex> parent;

  Vertex root() const { return vertices.empty() ? -1 : vertices.front(); }
  int size() const { return static_cast<int>(vertices.size()); }
  VertexSet vertex_set() const { return make_vertex_set(vertices); }
  /// Tree path from the root to v (v must be a member).
  Path path_from_root(Vertex v) const {
    Path p;
    while (v >= 0) {
      p.push_back(v);
      Vertex next = -1;
      for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == v) {
          next = parent[i];
          break;
        }
      v = next;
    }
    std::reverse(p.begin(), p.end());
    return p;
  }
};

/// (D, m, k)-adjuster: cores u1, u2 rooting ends I1, I2, a centre set A, and
/// realizers[i] a (u1, u2)-path of length ell + 2i with interior in A.
struct Adjuster {
  Vertex u1 = -1;
  Vertex u2 = -1;
  Expansion I1;
  Expansion I2;
  VertexSet A;
  int D = 0;
  int m = 0;
  int k = 0;
  int ell = 0;
  std::vector<Path> realizers;
};

inline nlohmann::ordered_json to_json(const Expansion& e) {
  nlohmann::ordered_json j;
  j["root"] = e.root();
  j["vertices"] = e.vertices;
  j["parent"] = e.parent;
  return j;
}

inline nlohmann::ordered_json to_json(const Adjuster& a) {
  nlohmann::ordered_json j;
  j["u1"] = a.u1;
  j["u2"] = a.u2;
  j["ends"] = nlohmann::ordered_json::array({to_json(a.I1), to_json(a.I2)});
  j["A"] = a.A;
  j["k"] = a.k;
  j["ell"] = a.ell;
  j["realizers"] = a.realizers;
  return j;
}

}  // namespace imforge
