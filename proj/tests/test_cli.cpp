#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imforge/cli.hpp"

using namespace imforge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "imforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "imforge_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// Drops the seconds column (the only timing field) from a metrics CSV.
std::string strip_seconds(const std::string& csv) {
  std::string out;
  for (const auto& l : lines(csv)) {
    std::vector<std::string> cols;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() > 14) cols.erase(cols.begin() + 14);
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("cli gen and spectral", "[cli]") {
  auto g = scratch("p13.txt");
  auto r = run({"gen", "--kind", "paley", "--q", "13", "--out", g.string()});
  CHECK(r.code == 0);
  auto loaded = load_graph(g.string());
  CHECK(loaded.n() == 13);
  CHECK(loaded.m() == 39);
  auto s = run({"spectral", "--graph", g.string()});
  REQUIRE(s.code == 0);
  auto j = nlohmann::json::parse(s.out);
  CHECK(j["d"] == 6);
  CHECK(std::abs(j["lambda"].get<double>() - (1 + std::sqrt(13.0)) / 2) < 1e-6);
  auto rr = run({"gen", "--kind", "random-regular", "--n", "50", "--d", "4", "--seed", "3"});
  CHECK(rr.code == 0);
  CHECK(lines(rr.out).front() == "50 100");
}

TEST_CASE("cli immerse-dense and verify", "[cli]") {
  auto cert = scratch("dense.json"), report = scratch("dense_report.json"), metrics = scratch("dense.csv");
  auto r = run({"immerse-dense", "--q", "401", "--kind", "paley", "--eta", "0.45", "--mode", "best-effort", "--seed", "7",
                "--out", cert.string(), "--report", report.string(), "--metrics", metrics.string()});
  REQUIRE(r.code == 0);
  auto rep = nlohmann::json::parse(slurp(report));
  CHECK(rep["verify"]["valid"] == true);
  CHECK(rep["config"]["eta"] == 0.45);
  CHECK(rep["config"]["mode"] == "best-effort");
  auto m = lines(slurp(metrics));
  REQUIRE(m.size() == 2);
  CHECK(m[0] == cli::MetricsRow::header());
  CHECK(m[1].rfind("immerse-dense,", 0) == 0);

  auto g = scratch("p401.txt");
  REQUIRE(run({"gen", "--kind", "paley", "--q", "401", "--out", g.string()}).code == 0);
  auto v = run({"verify", "--graph", g.string(), "--cert", cert.string()});
  CHECK(v.code == 0);
  CHECK(nlohmann::json::parse(v.out)["valid"] == true);

  // Tamper: duplicate the first pair.
  auto j = nlohmann::ordered_json::parse(slurp(cert));
  j["pairs"].push_back(j["pairs"][0]);
  auto bad = scratch("bad.json");
  cli::write_text(bad.string(), j.dump());
  auto vb = run({"verify", "--graph", g.string(), "--cert", bad.string()});
  CHECK(vb.code == 1);
  CHECK(nlohmann::json::parse(vb.out)["valid"] == false);

  // Same config and seed: identical certificate bytes.
  auto cert2 = scratch("dense2.json");
  REQUIRE(run({"immerse-dense", "--kind", "paley", "--q", "401", "--eta", "0.45", "--seed", "7", "--out", cert2.string()})
              .code == 0);
  CHECK(slurp(cert) == slurp(cert2));
}

TEST_CASE("cli malformed input", "[cli]") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"immerse-dense", "--eta", "abc"}).code == 2);
  CHECK(run({"immerse-dense", "--mode", "sometimes"}).code == 2);
  CHECK(run({"verify", "--graph", "x.txt"}).code == 2);
  CHECK(run({"immerse-dense", "--kind", "nonsense"}).code == 2);
  auto missing = run({"verify", "--graph", "/nonexistent/g.txt", "--cert", "/nonexistent/c.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("Io") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli sweep", "[cli]") {
  auto r = run({"sweep", "--kind", "paley", "--q", "401", "--eta", "0.3,0.4,0.5", "--seed", "1"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0] == cli::MetricsRow::header());
  for (int i = 1; i <= 3; ++i) CHECK(ls[i].find(",ok") != std::string::npos);

  auto empty = run({"sweep", "--kind", "paley", "--q", "401"});
  CHECK(empty.code == 0);
  CHECK(empty.out == cli::MetricsRow::header() + "\n");

  setenv("IMFORGE_THREADS", "1", 1);
  auto a = run({"sweep", "--kind", "paley", "--q", "401", "--eta", "0.4,0.45", "--seeds", "1,2"});
  setenv("IMFORGE_THREADS", "4", 1);
  auto b = run({"sweep", "--kind", "paley", "--q", "401", "--eta", "0.4,0.45", "--seeds", "1,2"});
  unsetenv("IMFORGE_THREADS");
  REQUIRE(a.code == 0);
  CHECK(lines(a.out).size() == 5);
  CHECK(strip_seconds(a.out) == strip_seconds(b.out));

  // A failing cell is recorded and the sweep continues.
  auto f = run({"sweep", "--kind", "paley", "--q", "401", "--eta", "0.45,0.4", "--mode", "strict"});
  REQUIRE(f.code == 0);
  auto fl = lines(f.out);
  REQUIRE(fl.size() == 3);
  CHECK(fl[1].find("error:PreconditionFailed") != std::string::npos);
}

TEST_CASE("cli other pipelines", "[cli]") {
  auto m = run({"immerse-medium", "--kind", "random-regular", "--n", "600", "--d", "24", "--seed", "2", "--eta", "0.1",
                "--h1", "6", "--h2", "3", "--h3", "4", "--units", "7"});
  CHECK(m.code == 0);
  CHECK(nlohmann::json::parse(m.out)["kind"] == "immersion");

  auto s = run({"subdivide", "--kind", "random-regular", "--n", "600", "--d", "8", "--seed", "2", "--eta", "0.5"});
  CHECK(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["kind"] == "subdivision");

  auto k = run({"k3-bipartite", "--kind", "complete-bipartite", "--n1", "64", "--n2", "384", "--order", "2", "--mode",
                "strict"});
  CHECK(k.code == 0);
  auto kj = nlohmann::json::parse(k.out);
  CHECK(kj["branch"].size() == 2);
  CHECK(kj["pairs"][0]["path"].size() == 5);

  auto dump = scratch("k222.hyp");
  auto n = run({"nibble", "--parts", "2,2,2", "--density", "1.0", "--dump", dump.string()});
  REQUIRE(n.code == 0);
  auto nj = nlohmann::json::parse(n.out);
  CHECK(nj["triangles"] == 4);
  CHECK(nj["uncovered"] == 0);
  CHECK(nj["matching"] == 4);
  auto n2 = run({"nibble", "--hypergraph", dump.string()});
  REQUIRE(n2.code == 0);
  CHECK(nlohmann::json::parse(n2.out)["hyperedges"] == 8);
  CHECK(run({"nibble"}).code == 2);
}
