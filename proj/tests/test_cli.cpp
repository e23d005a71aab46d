#include <doctest.h>

#include "bavc/cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using bavc::cli::run;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bavc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run bavc_run(std::vector<std::string> args) {
  args.insert(args.begin(), "bavc");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("number formatting and digest") {
  CHECK(bavc::cli::format_double(0.1) == "0.10000000000000001");
  CHECK(bavc::cli::format_double(1.0) == "1");
  CHECK(std::stod(bavc::cli::format_double(0.6225562489182659)) == 0.6225562489182659);
  // FNV-1a offset basis and a published test vector.
  CHECK(bavc::cli::digest("") == "cbf29ce484222325");
  CHECK(bavc::cli::digest("a") == "af63dc4c8601ec8c");
}

TEST_CASE("usage errors") {
  const auto dir = scratch("usage");
  CHECK(bavc_run({}).code == 2);
  CHECK(bavc_run({"frobnicate"}).code == 2);
  CHECK(bavc_run({"lemma-check", "--lemma", "7", "--out-dir", dir.string()}).code == 2);
  CHECK(bavc_run({"capacity", "--out-dir", dir.string()}).code == 2);
  CHECK(bavc_run({"--help"}).code == 0);
  CHECK(bavc_run({"capacity", "--config", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("malformed configs") {
  const auto dir = scratch("malformed");
  SUBCASE("syntax error reports line and column") {
    const auto cfg = write_config(dir, "bad.json", "{\n  \"tau\": 0.5,\n  \"E\": 1,\n  \"P\": ,\n}\n");
    const auto r = bavc_run({"capacity", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bad.json:4:") != std::string::npos);
  }
  SUBCASE("missing P") {
    const auto cfg = write_config(dir, "nop.json", "{\"tau\": 0.5, \"E\": 1}");
    const auto r = bavc_run({"capacity", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("'P'") != std::string::npos);
  }
  SUBCASE("wrong type names the field path") {
    const auto cfg = write_config(dir, "type.json",
                                  "{\n\"families\": [\n {\"name\": \"a\",\n  \"xs\": [{\"kind\": \"thermal\", "
                                  "\"mean_photons\": \"one\"}],\n  \"ys\": []}]}");
    const auto r = bavc_run({"epi-scan", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("families[0].xs[0].mean_photons") != std::string::npos);
    CHECK(r.err.find("type.json:4") != std::string::npos);
  }
  SUBCASE("unknown field") {
    const auto cfg = write_config(dir, "unk.json", "{\"tau\": 0.5, \"E\": 1, \"P\": 1, \"colour\": 3}");
    const auto r = bavc_run({"capacity", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("colour") != std::string::npos);
  }
}

TEST_CASE("epi-scan") {
  const auto dir = scratch("epi");
  SUBCASE("empty families give a header-only CSV") {
    const auto cfg = write_config(dir, "empty.json", "{\"families\": []}");
    REQUIRE(bavc_run({"epi-scan", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const auto l = lines(slurp(dir / "epi_scan.csv"));
    REQUIRE(l.size() == 2);
    CHECK(l[0].rfind("# manifest ", 0) == 0);
    CHECK(l[1] == "family,kind,x,y,lambda,lhs_bits,rhs_bits,gap,cutoff,deficit_budget,status,confirm_gap");
  }
  SUBCASE("thermal grid stays non-negative") {
    const auto cfg = write_config(dir, "thermal.json", R"({
      "cutoff": 40,
      "families": [{"name": "tt",
                    "xs": [{"kind": "thermal", "mean_photons": [0.1, 0.5, 1.0, 1.5]}],
                    "ys": [{"kind": "thermal", "mean_photons": [0.1, 0.5, 1.0, 1.5]}]}]
    })");
    REQUIRE(bavc_run({"epi-scan", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const auto s = load_json(dir / "epi_scan.json");
    CHECK(s["records"] == 16 * 9);
    CHECK(s["min_gap"].get<double>() >= -1e-6);
    CHECK(s["violations"] == 0);
    CHECK(lines(slurp(dir / "epi_scan.csv")).size() == 2 + 16 * 9);
  }
}

TEST_CASE("capacity") {
  const auto dir = scratch("capacity");
  SUBCASE("thermal jammer on the fine grid") {
    const auto cfg =
        write_config(dir, "grid.json", R"({"tau": 0.5, "E": 1, "P": 1, "mode": "thermal_grid", "spacing": 0.125})");
    REQUIRE(bavc_run({"capacity", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const auto s = load_json(dir / "capacity.json");
    CHECK(std::abs(s["value_bits"].get<double>() - 0.6225562) / 0.6225562 < 0.02);
    CHECK(s["manifest"]["subcommand"] == "capacity");
    CHECK(fs::exists(dir / "capacity_convergence.csv"));
  }
  SUBCASE("no input energy") {
    const auto cfg = write_config(dir, "e0.json", R"({"tau": 0.5, "E": 0, "P": 1, "spacings": [0.5]})");
    REQUIRE(bavc_run({"capacity", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    CHECK(std::abs(load_json(dir / "capacity.json")["value_bits"].get<double>()) < 1e-12);
  }
}

TEST_CASE("lemma-check") {
  const auto dir = scratch("lemma");
  const auto r = bavc_run({"lemma-check", "--lemma", "5", "--k", "6", "--d", "3", "--out-dir", dir.string()});
  CHECK(r.code == 0);
  const auto s = load_json(dir / "lemma_check.json");
  CHECK(s["passed"] == true);
  CHECK(s["rows"].size() == 19);
  for (const auto& row : s["rows"]) CHECK(row["lemma"] == "5");
}

TEST_CASE("code-sim") {
  const auto dir = scratch("code");
  SUBCASE("a single codeword is always decoded") {
    const auto cfg = write_config(dir, "m1.json", R"({"k": 2, "M": 1, "E": 1, "P": 1, "cutoff": 6,
                                                       "families": ["vacuum", "thermal"]})");
    REQUIRE(bavc_run({"code-sim", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const auto run0 = load_json(dir / "code_sim.json")["runs"][0];
    CHECK(run0["p_vacuum"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(run0["worst_success"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("two coherent codewords against vacuum sit at the Helstrom value") {
    const auto cfg = write_config(dir, "m2.json", R"({"k": 1, "M": 2, "E": 1, "P": 1, "cutoff": 16,
                                                       "codewords": [[[-1, 0]], [[1, 0]]],
                                                       "design_jammer": {"kind": "vacuum"},
                                                       "families": ["vacuum"]})");
    REQUIRE(bavc_run({"code-sim", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const auto run0 = load_json(dir / "code_sim.json")["runs"][0];
    const double p = run0["p_vacuum"].get<double>(), h = run0["helstrom_vacuum"].get<double>();
    // Outputs are coherent at +-sqrt(1/2) with overlap exp(-2 * 1/2).
    const double pure = 0.5 * (1.0 + std::sqrt(1.0 - std::exp(-2.0)));
    CHECK(std::abs(h - pure) < 1e-8);
    CHECK(p <= h + 1e-12);
    CHECK(p >= 0.95 * h);
  }
  SUBCASE("rejection budget exhausted") {
    const auto cfg = write_config(dir, "rej.json", R"({"k": 1, "M": 2, "E": 1, "P": 1,
                                                        "base": {"points": [[3, 0]]}, "max_attempts": 10})");
    CHECK(bavc_run({"code-sim", "--config", cfg.string(), "--out-dir", dir.string()}).code == 3);
  }
}

TEST_CASE("state-info") {
  const auto dir = scratch("state");
  const auto cfg = write_config(dir, "s.json", R"({"state": {"kind": "fock", "n": [0, 2]}, "cutoff": 6})");
  REQUIRE(bavc_run({"state-info", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
  const auto s = load_json(dir / "state_info.json")["states"];
  REQUIRE(s.size() == 2);
  CHECK(s[1]["energy"].get<double>() == doctest::Approx(2.0));
  CHECK(std::abs(s[1]["entropy_bits"].get<double>()) < 1e-9);
}

TEST_CASE("reruns reproduce CSV files byte for byte") {
  const auto dir = scratch("determinism");
  const auto epi = write_config(dir, "epi.json", R"({
    "cutoff": 12, "lambdas": [0.3, 0.7], "kinds": ["conjecture", "epni_port"],
    "families": [{"name": "rd", "random_diagonal": {"draws": 15, "levels": 12}},
                 {"name": "pp", "xs": [{"kind": "phav", "radius": [0.5, 1]}], "ys": [{"kind": "vacuum"}]}]
  })");
  const auto code = write_config(dir, "code.json", R"({"k": 2, "M": 3, "E": 1, "P": 0.5, "cutoff": 5,
                                                        "spacing": 0.5, "seeds": [3, 4],
                                                        "families": ["thermal", "per_symbol_thermal"],
                                                        "iterations": 6, "cr": {"samples": 40}})");
  for (const auto& [sub, cfg, files] :
       std::vector<std::tuple<std::string, fs::path, std::vector<std::string>>>{
           {"epi-scan", epi, {"epi_scan.csv"}}, {"code-sim", code, {"code_sim.csv", "code_sim_trace.csv"}}}) {
    const auto a = dir / (sub + "_a"), b = dir / (sub + "_b");
    REQUIRE(bavc_run({sub, "--config", cfg.string(), "--out-dir", a.string(), "--threads", "1"}).code == 0);
    REQUIRE(bavc_run({sub, "--config", cfg.string(), "--out-dir", b.string(), "--threads", "3"}).code == 0);
    for (const auto& f : files) {
      CAPTURE(f);
      const auto x = slurp(a / f);
      CHECK(x.size() > 0);
      CHECK(x == slurp(b / f));
    }
  }
  // A different seed changes the manifest and the sampled codebooks.
  const auto c = dir / "code_c";
  REQUIRE(bavc_run({"code-sim", "--config", code.string(), "--out-dir", c.string(), "--seed", "99"}).code == 0);
  CHECK(slurp(c / "code_sim.csv") != slurp(dir / "code-sim_a" / "code_sim.csv"));
}
