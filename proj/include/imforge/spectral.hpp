#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "imforge/error.hpp"
#include "imforge/graph.hpp"
#include "imforge/rng.hpp"

namespace imforge {

enum class EigenMethod { Auto, Dense, Lanczos };

struct SpectralReport {
  int n = 0;
  int d = 0;
  /// Descending. Full length n for the dense method; {λ1, λ2, λn} for Lanczos.
  std::vector<double> spectrum;
  double lambda = 0.0;
  double lambda2 = 0.0;
  double lambdan = 0.0;
  bool is_regular = false;
  double tol = 1e-8;
  EigenMethod method = EigenMethod::Dense;

  double lambda1() const { return spectrum.empty() ? 0.0 : spectrum.front(); }
  bool full_spectrum() const { return static_cast<int>(spectrum.size()) == n; }
};

inline constexpr int kDenseLimit = 4096;

namespace detail {

inline void adj_multiply(const Graph& g, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  for (int v = 0; v < g.n(); ++v) {
    double s = 0.0;
    for (Vertex u : g.neighbors(v)) s += x[u];
    y[v] = s;
  }
}

struct LanczosResult {
  double top = 0.0;
  double bottom = 0.0;
  Eigen::VectorXd top_vector;
};

// Lanczos with full reorthogonalisation, optionally restricted to the
// orthogonal complement of `deflate`. Converged when the residual bound of
// both extreme Ritz pairs is below tol.
inline LanczosResult lanczos(const Graph& g, const std::vector<Eigen::VectorXd>& deflate,
                             double tol, std::uint64_t seed, int max_iter) {
  const int n = g.n();
  const int dim = n - static_cast<int>(deflate.size());
  Rng rng(seed);
  std::vector<Eigen::VectorXd> Q;
  std::vector<double> alpha, beta;

  auto project = [&](Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& y : deflate) w -= y.dot(w) * y;
      for (const auto& q : Q) w -= q.dot(w) * q;
    }
  };
  auto fresh = [&]() -> std::optional<Eigen::VectorXd> {
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = rng.uniform() - 0.5;
      project(w);
      double nw = w.norm();
      if (nw > 1e-8) return Eigen::VectorXd(w / nw);
    }
    return std::nullopt;
  };

  auto q0 = fresh();
  if (!q0) throw Error(ErrorCode::NotConverged, "empty Krylov space");
  Q.push_back(*q0);
  max_iter = std::min(max_iter, dim);

  Eigen::VectorXd w(n);
  int next_check = std::min(20, max_iter);
  for (;;) {
    const int j = static_cast<int>(Q.size()) - 1;
    adj_multiply(g, Q[j], w);
    double a = Q[j].dot(w);
    alpha.push_back(a);
    w -= a * Q[j];
    if (j > 0) w -= beta[j - 1] * Q[j - 1];
    project(w);
    double b = w.norm();
    std::optional<Eigen::VectorXd> next;
    // A breakdown means the Krylov space of a random start is invariant, so it
    // already holds every extreme eigenvalue; a restart only keeps dimensions right.
    const bool breakdown = b < 1e-10;
    if (breakdown) b = 0.0;
    else next = Eigen::VectorXd(w / b);
    beta.push_back(b);
    const int k = j + 1;
    const bool exhausted = breakdown || k >= dim;

    if (exhausted || k >= next_check || k >= max_iter) {
      Eigen::VectorXd diag(k), sub(k - 1);
      for (int i = 0; i < k; ++i) diag[i] = alpha[i];
      for (int i = 0; i + 1 < k; ++i) sub[i] = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const auto& vals = es.eigenvalues();
      const auto& vecs = es.eigenvectors();
      double r_top = std::abs(b * vecs(k - 1, k - 1));
      double r_bot = std::abs(b * vecs(k - 1, 0));
      if (exhausted || (r_top <= tol && r_bot <= tol)) {
        LanczosResult out;
        out.top = vals[k - 1];
        out.bottom = vals[0];
        out.top_vector = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) out.top_vector += vecs(i, k - 1) * Q[i];
        out.top_vector.normalize();
        return out;
      }
      if (k >= max_iter)
        throw Error(ErrorCode::NotConverged,
                    "Lanczos residuals " + std::to_string(r_top) + ", " + std::to_string(r_bot));
      next_check = std::min(max_iter, k + std::max(10, k / 4));
    }
    Q.push_back(std::move(*next));
  }
}

inline void finish_report(const Graph& g, SpectralReport& r) {
  r.n = g.n();
  r.d = g.n() > 0 ? g.max_degree() : 0;
  const auto& s = r.spectrum;
  if (s.size() >= 2) {
    r.lambda2 = s[1];
    r.lambdan = s.back();
  } else {
    r.lambda2 = r.lambdan = s.empty() ? 0.0 : s[0];
  }
  r.lambda = s.size() >= 2 ? std::max(std::abs(r.lambda2), std::abs(r.lambdan)) : 0.0;
  r.is_regular = g.is_regular() && std::abs(r.lambda1() - r.d) <= r.tol;
}

}  // namespace detail

inline SpectralReport adjacency_spectrum(const Graph& g, double tol = -1.0,
                                         EigenMethod method = EigenMethod::Auto) {
  if (g.n() < 1) throw Error(ErrorCode::InvalidArgument, "spectrum of the empty graph");
  if (method == EigenMethod::Auto)
    method = g.n() <= kDenseLimit ? EigenMethod::Dense : EigenMethod::Lanczos;
  // Lanczos needs a handful of vectors beyond the three wanted values.
  if (method == EigenMethod::Lanczos && g.n() < 8) method = EigenMethod::Dense;
  SpectralReport r;
  r.method = method;
  r.tol = tol > 0 ? tol : (method == EigenMethod::Dense ? 1e-8 : 1e-6);
  const int n = g.n();
  if (method == EigenMethod::Dense) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) {
      A(e.u, e.v) = 1.0;
      A(e.v, e.u) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NotConverged, "dense eigensolve");
    r.spectrum.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r.spectrum[static_cast<std::size_t>(i)] = es.eigenvalues()[n - 1 - i];
  } else {
    const int budget = std::min(n, 1200);
    auto first = detail::lanczos(g, {}, r.tol * 0.1, derive_seed(0, "lanczos", 1), budget);
    auto second =
        detail::lanczos(g, {first.top_vector}, r.tol * 0.1, derive_seed(0, "lanczos", 2), budget);
    r.spectrum = {first.top, second.top, first.bottom};
  }
  detail::finish_report(g, r);
  return r;
}

struct ComplementReport {
  /// Spectrum of the complement obtained algebraically from the original.
  SpectralReport report;
  /// The complement's second-eigenvalue parameter -(λn + 1).
  double fact_parameter = 0.0;
};

inline ComplementReport complement_report(const SpectralReport& r) {
  if (!r.is_regular) throw Error(ErrorCode::NotRegular, "complement needs a regular graph");
  ComplementReport out;
  SpectralReport& c = out.report;
  c.n = r.n;
  c.d = r.n - 1 - r.d;
  c.tol = r.tol;
  c.method = r.method;
  c.spectrum.push_back(static_cast<double>(c.d));
  for (std::size_t i = 1; i < r.spectrum.size(); ++i) c.spectrum.push_back(-1.0 - r.spectrum[i]);
  std::sort(c.spectrum.begin(), c.spectrum.end(), std::greater<>());
  if (c.spectrum.size() >= 2) {
    c.lambda2 = c.spectrum[1];
    c.lambdan = c.spectrum.back();
    c.lambda = std::max(std::abs(c.lambda2), std::abs(c.lambdan));
  }
  c.is_regular = true;
  out.fact_parameter = -(r.lambdan + 1.0);
  return out;
}

struct MixingResult {
  double e_observed = 0.0;
  double e_expected = 0.0;
  double bound = 0.0;
  bool pass = true;
};

/// e(U,V) counts ordered pairs (u,v) with u in U, v in V, uv an edge.
inline MixingResult mixing_discrepancy(const Graph& g, const SpectralReport& r, const VertexSet& U,
                                       const VertexSet& V) {
  auto inV = membership(g.n(), V);
  std::int64_t e = 0;
  for (Vertex u : U)
    for (Vertex w : g.neighbors(u)) e += inV[w];
  MixingResult out;
  double su = static_cast<double>(U.size()), sv = static_cast<double>(V.size());
  out.e_observed = static_cast<double>(e);
  out.e_expected = r.n > 0 ? r.d * su * sv / r.n : 0.0;
  out.bound = r.lambda * std::sqrt(su * sv);
  // λ is only known to within tol.
  double slack = r.tol * std::sqrt(su * sv) + 1e-9;
  out.pass = std::abs(out.e_observed - out.e_expected) <= out.bound + slack;
  return out;
}

struct CutResult {
  double e_observed = 0.0;
  double bound = 0.0;
  bool pass = true;
};

inline CutResult cut_lower_bound(const Graph& g, const SpectralReport& r, const VertexSet& B) {
  if (B.empty() || static_cast<int>(B.size()) >= g.n())
    throw Error(ErrorCode::DegenerateCut, "B must be a proper nonempty subset");
  auto inB = membership(g.n(), B);
  std::int64_t e = 0;
  for (Vertex b : B)
    for (Vertex w : g.neighbors(b)) e += !inB[w];
  double sb = static_cast<double>(B.size());
  double sc = static_cast<double>(g.n()) - sb;
  CutResult out;
  out.e_observed = static_cast<double>(e);
  out.bound = (r.d - r.lambda) * sb * sc / g.n();
  double slack = r.tol * sb * sc / g.n() + 1e-9;
  out.pass = out.e_observed + slack >= out.bound;
  return out;
}

struct RegularityAudit {
  double epsilon = 0.0;
  Rational base_density;
  double worst_deviation = 0.0;
  std::optional<std::pair<VertexSet, VertexSet>> witness;
  int samples = 0;

  bool pass() const { return !witness.has_value(); }
};

namespace detail {

inline int ceil_eps(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

// Vertices of S ordered by their neighbour count into `other`, ascending, ties by id.
inline std::vector<Vertex> order_by_degree_into(const Graph& g, const VertexSet& S,
                                                const std::vector<char>& other) {
  std::vector<std::pair<int, Vertex>> key;
  key.reserve(S.size());
  for (Vertex s : S) {
    int c = 0;
    for (Vertex w : g.neighbors(s)) c += other[w];
    key.emplace_back(c, s);
  }
  std::sort(key.begin(), key.end());
  std::vector<Vertex> out;
  out.reserve(S.size());
  for (auto& kv : key) out.push_back(kv.second);
  return out;
}

inline VertexSet prefix_set(const std::vector<Vertex>& ordered, int k, bool from_top) {
  VertexSet out;
  int sz = static_cast<int>(ordered.size());
  for (int i = 0; i < k && i < sz; ++i) out.push_back(from_top ? ordered[sz - 1 - i] : ordered[i]);
  return make_vertex_set(std::move(out));
}

}  // namespace detail

/// Sampled search for a refutation of ε-regularity of (A,B). A passing audit
/// means no counterexample was found. `probes` are extra B' sets that are
/// always examined together with the best A' response.
inline RegularityAudit regular_pair_audit(const Graph& g, const VertexSet& A, const VertexSet& B,
                                          double epsilon, int sample_budget, std::uint64_t seed,
                                          const std::vector<VertexSet>& probes = {}) {
  if (epsilon <= 0.0 || epsilon > 1.0) throw Error(ErrorCode::InvalidArgument, "epsilon in (0,1]");
  if (A.size() + 1e-9 < 1.0 / epsilon || B.size() + 1e-9 < 1.0 / epsilon)
    throw Error(ErrorCode::TooSmall, "sides must have at least 1/epsilon vertices");
  RegularityAudit out;
  out.epsilon = epsilon;
  out.base_density = pair_density(g, A, B);
  const double base = out.base_density.value();
  const int kA = std::max(1, detail::ceil_eps(epsilon * A.size()));
  const int kB = std::max(1, detail::ceil_eps(epsilon * B.size()));
  const auto inA = membership(g.n(), A);
  const auto inB = membership(g.n(), B);

  VertexSet bestA, bestB;
  auto consider = [&](const VertexSet& a, const VertexSet& b) {
    ++out.samples;
    double dev = std::abs(pair_density(g, a, b).value() - base);
    if (dev > out.worst_deviation) {
      out.worst_deviation = dev;
      bestA = a;
      bestB = b;
    }
  };
  // For fixed A', the extremal B' of size k are the k vertices with most/fewest
  // neighbours in A'; and symmetrically.
  auto respond_B = [&](const VertexSet& a, int k) {
    auto ord = detail::order_by_degree_into(g, B, membership(g.n(), a));
    auto hi = detail::prefix_set(ord, k, true);
    auto lo = detail::prefix_set(ord, k, false);
    consider(a, hi);
    consider(a, lo);
    return std::pair{hi, lo};
  };
  auto respond_A = [&](const VertexSet& b, int k) {
    auto ord = detail::order_by_degree_into(g, A, membership(g.n(), b));
    consider(detail::prefix_set(ord, k, true), b);
    consider(detail::prefix_set(ord, k, false), b);
  };

  auto ordA = detail::order_by_degree_into(g, A, inB);
  auto ordB = detail::order_by_degree_into(g, B, inA);
  std::vector<int> sizesA = {kA, std::max(kA, static_cast<int>(A.size()) / 4),
                             std::max(kA, static_cast<int>(A.size()) / 2)};
  std::vector<int> sizesB = {kB, std::max(kB, static_cast<int>(B.size()) / 4),
                             std::max(kB, static_cast<int>(B.size()) / 2)};
  for (int sa : sizesA)
    for (bool ta : {false, true}) {
      auto a = detail::prefix_set(ordA, sa, ta);
      for (int sb : sizesB)
        for (bool tb : {false, true}) consider(a, detail::prefix_set(ordB, sb, tb));
      auto [hi, lo] = respond_B(a, kB);
      respond_A(hi, kA);
      respond_A(lo, kA);
    }

  for (const auto& b : probes)
    if (!b.empty()) respond_A(b, kA);

  Rng rng(seed);
  for (int s = 0; s < sample_budget; ++s) {
    int sa = kA + static_cast<int>(rng.below(A.size() - kA + 1));
    int sb = kB + static_cast<int>(rng.below(B.size() - kB + 1));
    std::vector<Vertex> pa(A.begin(), A.end()), pb(B.begin(), B.end());
    rng.shuffle(pa);
    rng.shuffle(pb);
    pa.resize(sa);
    pb.resize(sb);
    auto a = make_vertex_set(pa);
    consider(a, make_vertex_set(pb));
    if (s % 4 == 0) respond_B(a, kB);
  }
  if (out.worst_deviation > epsilon) out.witness = std::pair{bestA, bestB};
  return out;
}

struct GoodTarget {
  VertexSet J;
  VertexSet J_sub;
};

/// Vertices u of I whose neighbour count in every J' is within ε|J'| of d(I,J)|J'|.
inline VertexSet good_vertices(const Graph& g, const VertexSet& I,
                               const std::vector<GoodTarget>& targets, double epsilon) {
  std::vector<char> good(static_cast<std::size_t>(g.n()), 0);
  for (Vertex u : I) good[u] = 1;
  for (const auto& t : targets) {
    double dens = pair_density(g, I, t.J).value();
    auto inSub = membership(g.n(), t.J_sub);
    double sz = static_cast<double>(t.J_sub.size());
    for (Vertex u : I) {
      int c = 0;
      for (Vertex w : g.neighbors(u)) c += inSub[w];
      if (std::abs(c - dens * sz) > epsilon * sz + 1e-12) good[u] = 0;
    }
  }
  VertexSet out;
  for (Vertex u : I)
    if (good[u]) out.push_back(u);
  return out;
}

inline nlohmann::ordered_json to_json(const SpectralReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["lambda"] = r.lambda;
  j["lambda2"] = r.lambda2;
  j["lambdan"] = r.lambdan;
  j["tol"] = r.tol;
  return j;
}

}  // namespace imforge
