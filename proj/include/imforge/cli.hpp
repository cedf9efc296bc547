#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "imforge/certificate.hpp"
#include "imforge/certify.hpp"
#include "imforge/error.hpp"
#include "imforge/gadgets.hpp"
#include "imforge/generators.hpp"
#include "imforge/graph.hpp"
#include "imforge/immersion_dense.hpp"
#include "imforge/immersion_medium.hpp"
#include "imforge/nibble.hpp"
#include "imforge/pipeline.hpp"
#include "imforge/spectral.hpp"
#include "imforge/subdivision.hpp"

namespace imforge::cli {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Graph sources

struct GraphSpec {
  std::string path;
  std::string kind;
  int n = 0, q = 0, d = 0, n1 = 0, n2 = 0;
  double density = 0.5;
  std::optional<std::uint64_t> seed;
};

inline Graph make_graph(const GraphSpec& s, std::uint64_t fallback_seed) {
  if (!s.path.empty()) return load_graph(s.path);
  const std::uint64_t seed = s.seed.value_or(fallback_seed);
  auto need = [&](int v, const char* flag) {
    if (v <= 0) throw Error(ErrorCode::InvalidArgument, std::string("--kind ") + s.kind + " needs " + flag);
    return v;
  };
  if (s.kind == "paley") return paley(need(s.q > 0 ? s.q : s.n, "--q"));
  if (s.kind == "random-regular" || s.kind == "rr") return random_regular(need(s.n, "--n"), need(s.d, "--d"), seed);
  if (s.kind == "complete") return complete_graph(need(s.n, "--n"));
  if (s.kind == "cycle") return cycle_graph(need(s.n, "--n"));
  if (s.kind == "path") return path_graph(need(s.n, "--n"));
  if (s.kind == "petersen") return petersen_graph();
  if (s.kind == "hypercube") return hypercube(need(s.n, "--n (dimension)"));
  if (s.kind == "complete-bipartite") return complete_bipartite(need(s.n1, "--n1"), need(s.n2, "--n2"));
  if (s.kind == "random-bipartite")
    return random_bipartite(need(s.n1, "--n1"), need(s.n2, "--n2"), s.density, seed);
  if (s.kind.empty()) throw Error(ErrorCode::InvalidArgument, "give --graph PATH or --kind");
  throw Error(ErrorCode::InvalidArgument, "unknown graph kind '" + s.kind + "'");
}

inline Json to_json(const GraphSpec& s) {
  Json j;
  j["graph"] = s.path.empty() ? Json(nullptr) : Json(s.path);
  j["kind"] = s.kind;
  j["n"] = s.n;
  j["q"] = s.q;
  j["d"] = s.d;
  j["n1"] = s.n1;
  j["n2"] = s.n2;
  j["density"] = s.density;
  j["graph_seed"] = s.seed ? Json(*s.seed) : Json(nullptr);
  return j;
}

inline void add_graph_options(CLI::App* app, GraphSpec& s) {
  app->add_option("--graph", s.path, "Edge-list input file");
  app->add_option("--kind", s.kind,
                  "Generator: paley, random-regular, complete, cycle, path, petersen, hypercube, "
                  "complete-bipartite, random-bipartite");
  app->add_option("--n", s.n, "Vertex count (hypercube: dimension)");
  app->add_option("--q", s.q, "Paley modulus");
  app->add_option("--d", s.d, "Degree");
  app->add_option("--n1", s.n1, "Bipartite side A size");
  app->add_option("--n2", s.n2, "Bipartite side B size");
  app->add_option("--density", s.density, "Random bipartite edge probability");
  app->add_option("--graph-seed", s.seed, "Generator seed (defaults to --seed)");
}

// ---------------------------------------------------------------------------
// Metrics

/// One CSV row: the dense diagnostics columns plus command and status.
struct MetricsRow {
  std::string command, run_id;
  std::optional<double> n, d, lambda, eta, t, M1, M2, reds_total, reds_replaced_2path, pairs_3path, stuck,
      achieved_order;
  double seconds = 0;
  std::string status = "ok";

  static std::string header() {
    return "command,run_id,n,d,lambda,eta,t,M1,M2,reds_total,reds_replaced_2path,pairs_3path,stuck,achieved_order,"
           "seconds,status";
  }
  std::string row() const {
    std::ostringstream os;
    auto put = [&](const std::optional<double>& v) {
      os << ',';
      if (v) os << *v;
    };
    os << command << ',' << run_id;
    for (const auto* v : {&n, &d, &lambda, &eta, &t, &M1, &M2, &reds_total, &reds_replaced_2path, &pairs_3path, &stuck,
                          &achieved_order})
      put(*v);
    os << ',' << seconds << ',' << status;
    return os.str();
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::string text = MetricsRow::header() + "\n";
  for (const auto& r : rows) text += r.row() + "\n";
  write_text(path, text);
}

inline int thread_cap() {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("IMFORGE_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v >= 1) cap = v;
    } catch (const std::exception&) {
    }
  }
  return cap;
}

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// Pipeline cells shared by single runs and sweeps

struct PipelineParams {
  std::string pipeline;  // immerse-dense, immerse-medium, subdivide, k3-bipartite
  double eta = 0.4;
  double eps = 0.1;
  std::string variant = "d0=3";
  MediumOptions medium;
  int order = 0;  // k3-bipartite p; 0 = formula value
  RunMode mode = RunMode::BestEffort;
  std::uint64_t seed = 0;
};

struct CellOutcome {
  EmbeddingCertificate cert;
  VerifyReport report;
  Json diagnostics;
  MetricsRow metrics;
};

inline std::string run_id_for(const PipelineParams& p) {
  return p.pipeline + ":eta=" + fmt_num(p.eta) + ":seed=" + std::to_string(p.seed);
}

inline CellOutcome run_pipeline(const Graph& g, const SpectralReport& rep, int n1, const PipelineParams& p) {
  CellOutcome out;
  auto& m = out.metrics;
  m.command = p.pipeline;
  m.run_id = run_id_for(p);
  m.n = g.n();
  m.d = rep.d;
  m.lambda = rep.lambda;
  auto t0 = std::chrono::steady_clock::now();
  if (p.pipeline == "immerse-dense") {
    auto r = build_dense_immersion(g, rep, p.eta, p.seed, p.mode);
    r.diag.run_id = m.run_id;
    out.cert = r.cert;
    out.diagnostics = to_json(r.diag);
    m.eta = p.eta;
    m.t = r.diag.t;
    m.M1 = r.diag.M1;
    m.M2 = r.diag.M2;
    m.reds_total = static_cast<double>(r.diag.reds_total);
    m.reds_replaced_2path = static_cast<double>(r.diag.reds_replaced_2path);
    m.pairs_3path = static_cast<double>(r.diag.pairs_3path);
    m.stuck = static_cast<double>(r.diag.stuck);
    m.achieved_order = r.diag.achieved_order;
  } else if (p.pipeline == "immerse-medium") {
    auto r = build_medium_immersion(g, rep, p.eta, p.seed, p.mode, p.medium);
    r.diag.run_id = m.run_id;
    out.cert = r.cert;
    out.diagnostics = to_json(r.diag);
    m.eta = p.eta;
    m.t = r.diag.units_built;
    m.stuck = r.diag.pairs_missing;
    m.achieved_order = r.diag.achieved_order;
  } else if (p.pipeline == "subdivide") {
    auto r = build_balanced_subdivision(g, rep, p.eta, p.eps, p.seed, p.mode, parse_variant(p.variant));
    out.cert = r.cert;
    out.diagnostics = to_json(r.diag);
    m.eta = p.eta;
    m.t = r.diag.t_target;
    m.stuck = r.diag.failed;
    m.achieved_order = r.diag.achieved_t;
  } else if (p.pipeline == "k3-bipartite") {
    if (n1 <= 0 || n1 >= g.n()) throw Error(ErrorCode::InvalidArgument, "k3-bipartite needs --n1 in (0, n)");
    int order = p.order;
    if (order <= 0) {
      double alpha = static_cast<double>(g.m()) / (static_cast<double>(n1) * (g.n() - n1));
      order = std::max(1, static_cast<int>(floor_tol(std::min(alpha * n1 / 16.0, alpha * alpha * (g.n() - n1) / 192.0))));
    }
    auto r = bipartite_k3_immersion(g, n1, order, p.seed, p.mode);
    out.cert = r.cert;
    out.diagnostics = to_json(r.diag);
    out.diagnostics["order_requested"] = order;
    m.t = order;
    m.stuck = r.diag.stuck;
    m.achieved_order = r.diag.achieved_order;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown pipeline '" + p.pipeline + "'");
  }
  out.report = verify(g, out.cert);
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.status = out.report.valid ? "ok" : "invalid";
  return out;
}

inline Json config_json(const PipelineParams& p, const GraphSpec& gs, int n1) {
  Json j;
  j["command"] = p.pipeline;
  j["seed"] = p.seed;
  j["mode"] = to_string(p.mode);
  j["eta"] = p.eta;
  if (p.pipeline == "subdivide") {
    j["eps"] = p.eps;
    j["variant"] = p.variant;
  }
  if (p.pipeline == "immerse-medium") {
    j["eps1"] = p.medium.eps1;
    j["eps2"] = p.medium.eps2;
    j["y"] = p.medium.y;
    j["h1"] = p.medium.h1;
    j["h2"] = p.medium.h2;
    j["h3"] = p.medium.h3;
    j["units"] = p.medium.units;
    j["max_len"] = p.medium.max_len;
  }
  if (p.pipeline == "k3-bipartite") {
    j["order"] = p.order;
    j["n1"] = n1;
  }
  j["source"] = to_json(gs);
  return j;
}

// ---------------------------------------------------------------------------
// Driver

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 run or
/// verification failure, 2 malformed command line.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Constructive clique immersions and balanced subdivisions in spectral expanders"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GraphSpec gs;
  std::uint64_t seed = 0;
  std::string out_path, report_path, metrics_path, mode_str = "best-effort", method_str = "auto";
  PipelineParams pp;

  auto* gen = app.add_subcommand("gen", "Generate a graph as an edge list");
  add_graph_options(gen, gs);
  gen->add_option("--seed", seed, "Root seed");
  gen->add_option("--out", out_path, "Output edge-list file (stdout if absent)");

  auto* spec = app.add_subcommand("spectral", "Adjacency spectrum report");
  add_graph_options(spec, gs);
  spec->add_option("--seed", seed, "Root seed");
  spec->add_option("--method", method_str, "auto, dense or lanczos")->check(CLI::IsMember({"auto", "dense", "lanczos"}));
  spec->add_option("--out", out_path, "Report JSON (stdout if absent)");

  auto add_run_options = [&](CLI::App* sub) {
    add_graph_options(sub, gs);
    sub->add_option("--seed", seed, "Root seed");
    sub->add_option("--mode", mode_str, "strict or best-effort")
        ->check(CLI::IsMember({"strict", "best-effort", "best_effort"}));
    sub->add_option("--out", out_path, "Certificate JSON (stdout if absent)");
    sub->add_option("--report", report_path, "Config, diagnostics and verification JSON");
    sub->add_option("--metrics", metrics_path, "Metrics CSV");
  };

  auto* med = app.add_subcommand("immerse-medium", "Clique immersion for medium degree");
  add_run_options(med);
  pp.eta = 0.1;
  med->add_option("--eta", pp.eta, "Target slack eta")->capture_default_str();
  med->add_option("--eps1", pp.medium.eps1, "Expansion parameter eps1")->capture_default_str();
  med->add_option("--eps2", pp.medium.eps2, "Expansion parameter eps2")->capture_default_str();
  med->add_option("--y", pp.medium.y, "Star size exponent y (h2 = m^y)")->capture_default_str();
  med->add_option("--h1", pp.medium.h1, "Stars per unit (0: ceil((1-4 eta) d))");
  med->add_option("--h2", pp.medium.h2, "Star size (0: ceil(m^y))");
  med->add_option("--h3", pp.medium.h3, "Branch length cap (0: ceil(m))");
  med->add_option("--units", pp.medium.units, "Unit count (0: floor((1-5 eta) d))");
  med->add_option("--max-len", pp.medium.max_len, "Connection length cap (0: h3)");

  double dense_eta = 0.4;
  auto* den = app.add_subcommand("immerse-dense", "Clique immersion for dense graphs");
  add_run_options(den);
  den->add_option("--eta", dense_eta, "Target slack eta")->capture_default_str();

  double sub_eta = 0.5;
  auto* sub = app.add_subcommand("subdivide", "Balanced clique subdivision");
  add_run_options(sub);
  sub->add_option("--eta", sub_eta, "Target slack eta")->capture_default_str();
  sub->add_option("--eps", pp.eps, "Degree exponent slack eps")->capture_default_str();
  sub->add_option("--variant", pp.variant, "d0=3 or d0=n^eta")->check(CLI::IsMember({"d0=3", "d0=n^eta"}));

  auto* k3 = app.add_subcommand("k3-bipartite", "K_p^(3) immersion in a bipartite graph (side A = 0..n1-1)");
  add_run_options(k3);
  k3->add_option("--order", pp.order, "p (0: floor(min(alpha n1/16, alpha^2 n2/192)))");

  std::string hyper_path, dump_path;
  std::vector<int> parts;
  double alpha = 0.2, tri_density = 0.5;
  auto* nib = app.add_subcommand("nibble", "Near-perfect hypergraph matching / edge-disjoint triangles");
  nib->add_option("--hypergraph", hyper_path, "Hypergraph dump file (\"N M\" then triples)");
  nib->add_option("--parts", parts, "Random tripartite part sizes a,b,c")->delimiter(',')->expected(3);
  nib->add_option("--density", tri_density, "Random tripartite edge probability")->capture_default_str();
  nib->add_option("--alpha", alpha, "Target shortfall alpha")->capture_default_str();
  nib->add_option("--seed", seed, "Root seed");
  nib->add_option("--dump", dump_path, "Write the triangle hypergraph here");
  nib->add_option("--out", out_path, "Result JSON (stdout if absent)");
  nib->add_option("--metrics", metrics_path, "Metrics CSV");

  std::string cert_path;
  auto* ver = app.add_subcommand("verify", "Check a certificate against a graph");
  ver->add_option("--graph", gs.path, "Edge-list file")->required();
  ver->add_option("--cert", cert_path, "Certificate JSON")->required();
  ver->add_option("--out", out_path, "Verification report JSON (stdout if absent)");

  std::string sweep_pipeline = "immerse-dense";
  std::vector<double> etas;
  std::vector<std::uint64_t> seeds;
  auto* swp = app.add_subcommand("sweep", "Metrics table over an eta x seed grid");
  add_graph_options(swp, gs);
  swp->add_option("--pipeline", sweep_pipeline, "immerse-dense, immerse-medium, subdivide or k3-bipartite")
      ->check(CLI::IsMember({"immerse-dense", "immerse-medium", "subdivide", "k3-bipartite"}));
  swp->add_option("--eta", etas, "Comma-separated eta grid")->delimiter(',');
  swp->add_option("--seeds", seeds, "Comma-separated seed grid (default: --seed)")->delimiter(',');
  swp->add_option("--seed", seed, "Root seed");
  swp->add_option("--mode", mode_str, "strict or best-effort")->check(CLI::IsMember({"strict", "best-effort", "best_effort"}));
  swp->add_option("--eps", pp.eps, "Subdivision eps")->capture_default_str();
  swp->add_option("--variant", pp.variant, "Subdivision variant")->check(CLI::IsMember({"d0=3", "d0=n^eta"}));
  swp->add_option("--h1", pp.medium.h1, "Medium h1 override");
  swp->add_option("--h2", pp.medium.h2, "Medium h2 override");
  swp->add_option("--h3", pp.medium.h3, "Medium h3 override");
  swp->add_option("--units", pp.medium.units, "Medium unit count override");
  swp->add_option("--order", pp.order, "k3-bipartite p");
  swp->add_option("--out", out_path, "CSV output (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  auto emit = [&](const std::string& path, const std::string& text) {
    if (path.empty()) out << text;
    else write_text(path, text);
  };

  try {
    pp.mode = parse_run_mode(mode_str);
    pp.seed = seed;
    if (gen->parsed()) {
      auto g = make_graph(gs, seed);
      std::ostringstream os;
      write_edge_list(os, g);
      emit(out_path, os.str());
      return 0;
    }
    if (spec->parsed()) {
      auto g = make_graph(gs, seed);
      EigenMethod meth = method_str == "dense"   ? EigenMethod::Dense :
                         method_str == "lanczos" ? EigenMethod::Lanczos :
                                                   EigenMethod::Auto;
      auto rep = adjacency_spectrum(g, -1.0, meth);
      emit(out_path, to_json(rep).dump(2) + "\n");
      return 0;
    }
    if (ver->parsed()) {
      auto g = load_graph(gs.path);
      std::ifstream in(cert_path);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + cert_path);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::Parse, std::string("certificate JSON: ") + e.what());
      }
      auto r = verify(g, certificate_from_json(j));
      emit(out_path, to_json(r).dump(2) + "\n");
      return r.valid ? 0 : 1;
    }
    if (nib->parsed()) {
      Hypergraph3 h;
      Json res;
      std::optional<TrianglePacking> packing;
      if (!hyper_path.empty()) {
        std::ifstream in(hyper_path);
        if (!in) throw Error(ErrorCode::Io, "cannot open " + hyper_path);
        h = read_hypergraph(in);
      } else if (parts.size() == 3) {
        auto tp = random_tripartite(parts[0], parts[1], parts[2], tri_density, seed);
        h = triangle_hypergraph(tp.graph, tp.part);
        packing = edge_disjoint_triangles(tp.graph, tp.part, alpha, seed);
        res["edges_total"] = packing->edges_total;
        res["triangles"] = packing->size();
        res["uncovered"] = packing->uncovered.size();
      } else {
        throw Error(ErrorCode::InvalidArgument, "give --hypergraph FILE or --parts a,b,c");
      }
      if (!dump_path.empty()) {
        std::ostringstream os;
        write_hypergraph(os, h);
        write_text(dump_path, os.str());
      }
      auto t0 = std::chrono::steady_clock::now();
      auto mt = near_perfect_matching(h, alpha, seed);
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res["vertices"] = h.n_vertices;
      res["hyperedges"] = h.m();
      res["n_active"] = mt.n_active;
      res["matching"] = mt.size();
      res["target"] = mt.target;
      res["meets_target"] = mt.meets_target();
      res["greedy"] = mt.greedy_size;
      res["rounds"] = mt.rounds;
      res["valid"] = is_matching(h, mt.selected);
      emit(out_path, res.dump(2) + "\n");
      if (!metrics_path.empty()) {
        MetricsRow m;
        m.command = "nibble";
        m.run_id = "nibble:seed=" + std::to_string(seed);
        m.n = h.n_vertices;
        m.achieved_order = mt.size();
        m.seconds = secs;
        m.status = mt.meets_target() ? "ok" : "short";
        write_metrics(metrics_path, {m});
      }
      return 0;
    }
    if (swp->parsed()) {
      auto g = make_graph(gs, seed);
      pp.pipeline = sweep_pipeline;
      if (seeds.empty()) seeds.push_back(seed);
      struct Cell {
        double eta;
        std::uint64_t seed;
      };
      std::vector<Cell> cells;
      for (double e : etas)
        for (auto s : seeds) cells.push_back({e, s});
      std::vector<MetricsRow> rows(cells.size());
      if (!cells.empty()) {
        auto rep = adjacency_spectrum(g);
        const int threads = std::min<int>(thread_cap(), static_cast<int>(cells.size()));
        std::size_t next = 0;
        std::mutex mu;
        auto worker = [&]() {
          for (;;) {
            std::size_t k;
            {
              std::lock_guard<std::mutex> lock(mu);
              if (next >= cells.size()) return;
              k = next++;
            }
            PipelineParams cp = pp;
            cp.eta = cells[k].eta;
            cp.seed = cells[k].seed;
            try {
              rows[k] = run_pipeline(g, rep, gs.n1, cp).metrics;
            } catch (const Error& e) {
              MetricsRow m;
              m.command = cp.pipeline;
              m.run_id = run_id_for(cp);
              m.n = g.n();
              m.d = rep.d;
              m.lambda = rep.lambda;
              m.eta = cp.eta;
              m.status = "error:" + std::string(to_string(e.code()));
              rows[k] = m;
            }
          }
        };
        std::vector<std::thread> pool;
        for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
      }
      std::string text = MetricsRow::header() + "\n";
      for (const auto& r : rows) text += r.row() + "\n";
      emit(out_path, text);
      return 0;
    }
    // Single pipeline runs.
    if (med->parsed()) pp.pipeline = "immerse-medium";
    else if (den->parsed()) {
      pp.pipeline = "immerse-dense";
      pp.eta = dense_eta;
    } else if (sub->parsed()) {
      pp.pipeline = "subdivide";
      pp.eta = sub_eta;
    } else if (k3->parsed()) {
      pp.pipeline = "k3-bipartite";
      pp.eta = 0;
    }
    auto g = make_graph(gs, seed);
    SpectralReport rep;
    if (pp.pipeline == "k3-bipartite") {
      rep.n = g.n();
    } else {
      rep = adjacency_spectrum(g);
    }
    auto cell = run_pipeline(g, rep, gs.n1, pp);
    emit(out_path, to_json(cell.cert).dump() + "\n");
    if (!report_path.empty()) {
      Json j;
      j["config"] = config_json(pp, gs, gs.n1);
      j["diagnostics"] = cell.diagnostics;
      j["verify"] = to_json(cell.report);
      write_text(report_path, j.dump(2) + "\n");
    }
    if (!metrics_path.empty()) write_metrics(metrics_path, {cell.metrics});
    if (!cell.report.valid) {
      err << "certificate failed verification\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? 2 : 1;
  }
}

}  // namespace imforge::cli
