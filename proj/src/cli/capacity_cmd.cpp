#include "commands.hpp"

#include "bavc/capacity.hpp"
#include "bavc/entropy.hpp"

#include <cmath>

namespace bavc::cli {

namespace {

JammerFamily parse_family(const Obj& o, const std::string& s) {
  for (JammerFamily f :
       {JammerFamily::Vacuum, JammerFamily::Thermal, JammerFamily::Phav, JammerFamily::PhavMixture2, JammerFamily::Dphav})
    if (s == to_string(f)) return f;
  o.fail("families", "unknown jammer family '" + s + "'");
}

}  // namespace

int cmd_capacity(const Context& ctx) {
  const Config config = ctx.load_config();
  const Obj root(config, config.root(), "");
  root.allow({"tau", "E", "P", "families", "mode", "spacing", "spacings", "energy_fractions", "convergence",
              "golden_iterations", "phav_grid", "simplex_iterations", "cutoff", "quadrature", "port_sign",
              "tail_tolerance"});

  const double tau = root.number("tau");
  const double E = root.number("E");
  const double P = root.number("P");
  if (!(tau >= 0.0 && tau <= 1.0)) root.fail("tau", "must lie in [0, 1]");
  if (E < 0.0) root.fail("E", "must be non-negative");
  if (P < 0.0) root.fail("P", "must be non-negative");

  SearchConfig sc;
  sc.tau = tau;
  sc.cutoff = static_cast<Index>(root.integer("cutoff", 0));
  if (ctx.cutoff_override) sc.cutoff = *ctx.cutoff_override;
  sc.quadrature = static_cast<Index>(root.integer("quadrature", 0));
  sc.sign = parse_port_sign(root, "port_sign");
  sc.golden_iterations = static_cast<int>(root.integer("golden_iterations", sc.golden_iterations));
  sc.phav_grid = static_cast<int>(root.integer("phav_grid", sc.phav_grid));
  sc.simplex_iterations = static_cast<int>(root.integer("simplex_iterations", sc.simplex_iterations));
  sc.spacings = root.numbers("spacings", sc.spacings);
  sc.energy_fractions = root.numbers("energy_fractions", sc.energy_fractions);
  sc.convergence = root.number("convergence", sc.convergence);
  sc.tail_tolerance = ctx.tolerance.value_or(root.number("tail_tolerance", sc.tail_tolerance));
  for (double s : sc.spacings)
    if (!(s > 0.0)) root.fail("spacings", "grid spacings must be positive");

  std::vector<JammerFamily> families;
  for (const auto& f : root.strings("families", {"thermal", "phav", "phav_mixture2"}))
    families.push_back(parse_family(root, f));

  const std::string mode = root.string("mode", "minimax");
  MinimaxResult res;
  if (mode == "minimax") {
    res = outer_max_input(families, E, P, sc);
  } else if (mode == "thermal_grid") {
    // Fixed input grid against the thermal jammer at full power.
    const double spacing = root.number("spacing", 0.125);
    if (!(spacing > 0.0)) root.fail("spacing", "must be positive");
    const auto gc = fit_grid_constellation(E, GridSpec::from_spacing(spacing));
    res.cutoff = sc.cutoff > 0 ? sc.cutoff : capacity_cutoff(tau, E, P, sc.tail_tolerance);
    const ChannelConfig ch{.tau = tau, .output_cutoff = res.cutoff, .quadrature = sc.quadrature, .sign = sc.sign};
    res.jammer = JammerSpec::thermal(P);
    const auto hb = holevo_breakdown(gc.constellation, res.jammer, ch);
    res.value_bits = hb.chi_bits;
    res.max_output_deficit = hb.max_output_deficit;
    res.closed_form_bits = closed_form_capacity(tau, E, P);
    res.outer_trace.push_back({spacing, 1.0, gc.variance, gc.constellation.size(), gc.constellation.mean_energy(),
                               hb.chi_bits, hb.chi_bits, res.jammer.label()});
    res.inner_trace.push_back({res.jammer.label(), hb.chi_bits, hb.chi_bits});
    res.constellation = gc;
  } else {
    root.fail("mode", "expected \"minimax\" or \"thermal_grid\"");
  }

  Manifest m;
  m.subcommand = "capacity";
  m.config_digest = digest(config.root().dump());
  m.seed_schedule = json::object();
  m.cutoffs = {{"output", res.cutoff}, {"quadrature", sc.quadrature}};
  m.deficit_budgets = {{"tail_tolerance", sc.tail_tolerance}, {"max_output_deficit", res.max_output_deficit}};
  m.overrides = ctx.overrides();

  {
    CsvWriter csv(ctx.out_dir / "capacity_convergence.csv", m,
                  {"step", "spacing", "energy_fraction", "variance", "points", "mean_energy", "value_bits", "best_bits",
                   "jammer"});
    for (std::size_t i = 0; i < res.outer_trace.size(); ++i) {
      const auto& s = res.outer_trace[i];
      csv.cell(i).cell(s.spacing).cell(s.energy_fraction).cell(s.variance).cell(s.points).cell(s.mean_energy);
      csv.cell(s.value).cell(s.best).cell(s.jammer);
      csv.end_row();
    }
  }
  {
    CsvWriter csv(ctx.out_dir / "capacity_inner.csv", m, {"step", "jammer", "chi_bits", "best_bits"});
    for (std::size_t i = 0; i < res.inner_trace.size(); ++i) {
      const auto& s = res.inner_trace[i];
      csv.cell(i).cell(s.jammer).cell(s.chi).cell(s.best);
      csv.end_row();
    }
  }

  const double cf = res.closed_form_bits;
  const double rel = cf > 0.0 ? (res.value_bits - cf) / cf : res.value_bits - cf;
  json resolved{{"tau", tau}, {"E", E}, {"P", P}, {"mode", mode}, {"spacings", sc.spacings},
                {"energy_fractions", sc.energy_fractions}, {"convergence", sc.convergence},
                {"cutoff", res.cutoff}, {"quadrature", sc.quadrature}};
  json families_json = json::array();
  for (auto f : families) families_json.push_back(to_string(f));
  resolved["families"] = families_json;
  json summary{{"manifest", m.to_json()},
               {"config", resolved},
               {"value_bits", num(res.value_bits)},
               {"closed_form_bits", num(cf)},
               {"relative_error", num(rel)},
               {"jammer", res.jammer.label()},
               {"jammer_energy", num(res.jammer.mean_energy())},
               {"cutoff", res.cutoff},
               {"max_output_deficit", num(res.max_output_deficit)}};
  if (res.constellation) {
    const auto& gc = *res.constellation;
    summary["constellation"] = {{"spacing", gc.grid.spacing},
                                {"energy_cap", gc.grid.energy_cap},
                                {"points", gc.constellation.size()},
                                {"mean_energy", num(gc.constellation.mean_energy())},
                                {"variance", num(gc.variance)},
                                {"kappa", num(gc.kappa)}};
  }
  write_json(ctx.out_dir / "capacity.json", summary);

  *ctx.out << "capacity: " << format_double(res.value_bits) << " bits (closed form " << format_double(cf)
           << ", relative " << format_double(rel) << "), jammer " << res.jammer.label() << "\n";
  return kSuccess;
}

}  // namespace bavc::cli
