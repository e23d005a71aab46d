#include "commands.hpp"

#include "bavc/capacity.hpp"

#include <algorithm>
#include <cmath>

namespace bavc::cli {

namespace {

StrategyFamily parse_family(const Obj& o, const std::string& s) {
  for (StrategyFamily f : {StrategyFamily::Vacuum, StrategyFamily::Thermal, StrategyFamily::Phav,
                           StrategyFamily::PerSymbolThermal, StrategyFamily::CoherentProduct})
    if (s == to_string(f)) return f;
  o.fail("families", "unknown strategy family '" + s + "'");
}

std::vector<std::vector<Complex>> parse_codewords(const Obj& root, Index k) {
  const json& v = root.raw("codewords");
  if (!v.is_array() || v.empty()) root.fail("codewords", "expected a non-empty array of codewords");
  std::vector<std::vector<Complex>> out;
  for (std::size_t m = 0; m < v.size(); ++m) {
    const std::string path = root.field("codewords") + "[" + std::to_string(m) + "]";
    if (!v[m].is_array() || static_cast<Index>(v[m].size()) != k)
      root.config().fail(path, "expected " + std::to_string(k) + " symbols");
    std::vector<Complex> x;
    for (std::size_t i = 0; i < v[m].size(); ++i)
      x.push_back(parse_complex(root.config(), v[m][i], path + "[" + std::to_string(i) + "]"));
    out.push_back(std::move(x));
  }
  return out;
}

Constellation parse_base(const Obj& root, double E) {
  if (!root.has("base")) return fit_grid_constellation(E, GridSpec::from_spacing(root.number("spacing", 0.5))).constellation;
  const Obj b = root.child("base");
  b.allow({"points", "weights"});
  const json& pts = b.raw("points");
  if (!pts.is_array()) b.fail("points", "expected an array of amplitudes");
  std::vector<Complex> points;
  for (std::size_t i = 0; i < pts.size(); ++i)
    points.push_back(parse_complex(root.config(), pts[i], b.field("points") + "[" + std::to_string(i) + "]"));
  std::vector<double> weights = b.numbers("weights", std::vector<double>(points.size(), 1.0 / points.size()));
  if (weights.size() != points.size()) b.fail("weights", "must match the number of points");
  return Constellation(std::move(points), std::move(weights));
}

}  // namespace

int cmd_code_sim(const Context& ctx) {
  const Config config = ctx.load_config();
  const Obj root(config, config.root(), "");
  root.allow({"k", "M", "E", "P", "tau", "cutoff", "quadrature", "port_sign", "spacing", "base", "codewords", "delta",
              "seed", "seeds", "max_attempts", "families", "design_jammer", "iterations", "subgaussian_K1", "cr"});

  const Index k = static_cast<Index>(root.integer("k"));
  const double E = root.number("E");
  const double P = root.number("P");
  if (k < 1) root.fail("k", "must be positive");
  if (E < 0.0) root.fail("E", "must be non-negative");
  if (P < 0.0) root.fail("P", "must be non-negative");

  CodingConfig cfg;
  cfg.tau = root.number("tau", 0.5);
  cfg.cutoff = static_cast<Index>(root.integer("cutoff", 8));
  if (ctx.cutoff_override) cfg.cutoff = *ctx.cutoff_override;
  cfg.quadrature = static_cast<Index>(root.integer("quadrature", 0));
  cfg.sign = parse_port_sign(root, "port_sign");
  cfg.subgaussian_K1 = root.number("subgaussian_K1", 0.0);
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) root.fail("tau", "must lie in [0, 1]");

  std::vector<std::uint64_t> seeds;
  if (ctx.seed) {
    seeds = {*ctx.seed};
  } else if (root.has("seeds")) {
    for (double s : root.numbers("seeds", {})) {
      if (s < 0 || s != std::floor(s)) root.fail("seeds", "seeds must be non-negative integers");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  } else {
    seeds = {static_cast<std::uint64_t>(root.integer("seed", 1))};
  }

  const bool explicit_code = root.has("codewords");
  std::vector<std::vector<Complex>> codewords;
  CodebookSpec spec;
  if (explicit_code) {
    codewords = parse_codewords(root, k);
  } else {
    spec.k = k;
    const auto M = root.integer("M");
    if (M < 1) root.fail("M", "must be positive");
    spec.M = static_cast<std::size_t>(M);
    spec.E = E;
    spec.base = parse_base(root, E);
    spec.delta = root.number("delta", spec.delta);
    spec.max_attempts = static_cast<std::size_t>(root.integer("max_attempts", 100000));
  }

  std::vector<StrategyFamily> families;
  for (const auto& f : root.strings("families", {"vacuum", "thermal", "phav", "per_symbol_thermal", "coherent_product"}))
    families.push_back(parse_family(root, f));
  const int iterations = static_cast<int>(root.integer("iterations", 20));
  const JammerSpec design = root.has("design_jammer") ? parse_jammer(root.child("design_jammer")) : JammerSpec::thermal(P);

  std::size_t cr_samples = 0, cr_support = 0;
  std::optional<JammerSpec> cr_jammer;
  if (root.has("cr")) {
    const Obj cr = root.child("cr");
    cr.allow({"samples", "support", "jammer"});
    cr_samples = static_cast<std::size_t>(cr.integer("samples", 1000));
    cr_support = static_cast<std::size_t>(cr.integer("support", 0));
    if (cr.has("jammer")) cr_jammer = parse_jammer(cr.child("jammer"));
  }

  struct SeedResult {
    std::uint64_t seed;
    std::size_t M;
    double p_vacuum, p_design, helstrom, completeness, min_eig;
    WorstCase worst;
    std::optional<CrResult> cr;
    std::string cr_strategy;
  };
  std::vector<SeedResult> results;
  const auto vacuum = JammerStrategy::iid(JammerSpec::vacuum(), k);
  for (std::uint64_t seed : seeds) {
    Codebook code;
    if (explicit_code) {
      code.k = k;
      code.codewords = codewords;
      code.energy_budget = E;
      code.check_energy();
    } else {
      spec.seed = seed;
      code = draw_codebook(spec);
    }
    attach_pgm_decoder(code, JammerStrategy::iid(design, k), cfg);

    SeedResult r{seed, code.size(), 0, 0, std::nan(""), code.decoder.completeness_error(),
                 code.decoder.min_eigenvalue(), {}, {}, {}};
    r.p_vacuum = success_probability(code, vacuum, cfg);
    r.p_design = success_probability(code, JammerStrategy::iid(design, k), cfg);
    if (code.size() == 2)
      r.helstrom = helstrom(codeword_output(code.codewords[0], vacuum, cfg), codeword_output(code.codewords[1], vacuum, cfg));
    r.worst = worst_case_jammer(code, families, P, cfg, iterations);
    if (cr_samples > 0) {
      const JammerStrategy s = cr_jammer ? JammerStrategy::iid(*cr_jammer, k) : r.worst.strategy;
      r.cr = cr_average(code, s, cr_samples, seed, cfg, cr_support);
      r.cr_strategy = s.label();
    }
    results.push_back(std::move(r));
  }

  Manifest m;
  m.subcommand = "code-sim";
  m.config_digest = digest(config.root().dump());
  m.seed_schedule = {{"codebook_and_cr", seeds}};
  m.cutoffs = {{"per_mode", cfg.cutoff}, {"block_dim", std::llround(std::pow(static_cast<double>(cfg.cutoff), static_cast<double>(k)))},
               {"quadrature", cfg.quadrature}};
  double worst_completeness = 0.0, worst_eig = 0.0;
  for (const auto& r : results) {
    worst_completeness = std::max(worst_completeness, r.completeness);
    worst_eig = std::min(worst_eig, r.min_eig);
  }
  m.deficit_budgets = {{"povm_completeness_error", worst_completeness}, {"povm_min_eigenvalue", worst_eig}};
  m.overrides = ctx.overrides();

  {
    CsvWriter csv(ctx.out_dir / "code_sim.csv", m,
                  {"seed", "k", "M", "E", "P", "p_vacuum", "p_design", "helstrom_vacuum", "worst_success",
                   "worst_strategy", "rejected", "cr_strategy", "cr_samples", "cr_monte_carlo", "cr_standard_error",
                   "cr_symmetrized"});
    for (const auto& r : results) {
      csv.cell(static_cast<long long>(r.seed)).cell(static_cast<long long>(k)).cell(r.M).cell(E).cell(P);
      csv.cell(r.p_vacuum).cell(r.p_design).cell(r.helstrom).cell(r.worst.success).cell(r.worst.strategy.label());
      csv.cell(r.worst.rejected);
      if (r.cr) {
        csv.cell(r.cr_strategy).cell(r.cr->samples).cell(r.cr->monte_carlo).cell(r.cr->standard_error);
        csv.cell(r.cr->symmetrized);
      } else {
        csv.cell("").cell(std::size_t{0}).cell(std::nan("")).cell(std::nan("")).cell(std::nan(""));
      }
      csv.end_row();
    }
  }
  {
    CsvWriter csv(ctx.out_dir / "code_sim_trace.csv", m, {"seed", "step", "strategy", "value", "best", "rejected"});
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.worst.trace.size(); ++i) {
        const auto& s = r.worst.trace[i];
        csv.cell(static_cast<long long>(r.seed)).cell(i).cell(s.strategy).cell(s.value).cell(s.best);
        csv.cell(s.rejected ? "yes" : "no");
        csv.end_row();
      }
    }
  }

  json runs = json::array();
  for (const auto& r : results) {
    json j{{"seed", r.seed},
           {"M", r.M},
           {"p_vacuum", num(r.p_vacuum)},
           {"p_design", num(r.p_design)},
           {"helstrom_vacuum", num(r.helstrom)},
           {"worst_success", num(r.worst.success)},
           {"worst_strategy", r.worst.strategy.label()},
           {"rejected_strategies", r.worst.rejected}};
    if (r.cr)
      j["cr"] = {{"strategy", r.cr_strategy},
                 {"samples", r.cr->samples},
                 {"monte_carlo", num(r.cr->monte_carlo)},
                 {"standard_error", num(r.cr->standard_error)},
                 {"symmetrized", num(r.cr->symmetrized)}};
    runs.push_back(j);
  }
  json fam = json::array();
  for (auto f : families) fam.push_back(to_string(f));
  json meta{{"energy_constraint", "per-symbol average |x|^2 <= E"},
            {"decoder", "pretty good measurement tuned to the design jammer"},
            {"design_jammer", design.label()},
            {"jammer_constraint", "total energy <= kP"},
            {"families", fam},
            {"cr_support", cr_support == 0 ? json("unrestricted") : json(cr_support)}};
  write_json(ctx.out_dir / "code_sim.json", {{"manifest", m.to_json()}, {"metadata", meta}, {"runs", runs}});

  bool invariants_ok = true;
  for (const auto& r : results) {
    for (double p : {r.p_vacuum, r.p_design, r.worst.success})
      invariants_ok = invariants_ok && p >= -1e-9 && p <= 1.0 + 1e-9;
    invariants_ok = invariants_ok && r.completeness <= 1e-8 && r.min_eig >= -1e-9;
    *ctx.out << "code-sim seed " << r.seed << ": p_vacuum " << format_double(r.p_vacuum) << ", worst "
             << format_double(r.worst.success) << " (" << r.worst.strategy.label() << ")\n";
  }
  if (!invariants_ok) {
    *ctx.err << "bavc: invariant violation: decoder or success probability out of range\n";
    return kInvariantViolation;
  }
  return kSuccess;
}

}  // namespace bavc::cli
