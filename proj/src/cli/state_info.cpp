#include "commands.hpp"

#include "bavc/entropy.hpp"

#include <cmath>

namespace bavc::cli {

int cmd_state_info(const Context& ctx) {
  const Config config = ctx.load_config();
  const Obj root(config, config.root(), "");
  root.allow({"state", "cutoff", "quadrature", "tolerance"});
  Index D = static_cast<Index>(root.integer("cutoff", 20));
  if (ctx.cutoff_override) D = *ctx.cutoff_override;
  if (D < 1) root.fail("cutoff", "must be positive");
  const Index quad = static_cast<Index>(root.integer("quadrature", 0));
  const double tol = ctx.tolerance.value_or(root.number("tolerance", 1e-6));

  json states = json::array();
  for (const StateSpec& s : parse_states(root.child("state"))) {
    const DensityMatrix rho = s.build(D, tol, quad);
    const auto S = von_neumann_entropy(rho);
    const Eigen::VectorXd spec = spectrum(rho);
    const double purity = (rho.entries() * rho.entries()).trace().real();
    json sp = json::array(), diag = json::array();
    for (Index i = 0; i < spec.size(); ++i) sp.push_back(num(spec(i)));
    const Eigen::VectorXd d = rho.diagonal();
    for (Index i = 0; i < d.size(); ++i) diag.push_back(num(d(i)));
    states.push_back({{"label", s.label()},
                      {"dim", rho.dim()},
                      {"trace_deficit", num(rho.trace_deficit())},
                      {"energy", num(energy(rho))},
                      {"entropy_bits", num(S.value_bits)},
                      {"clipped_mass", num(S.clipped_mass)},
                      {"purity", num(purity)},
                      {"spectrum", sp},
                      {"diagonal", diag}});
    *ctx.out << s.label() << ": dim " << rho.dim() << ", deficit " << format_double(rho.trace_deficit()) << ", energy "
             << format_double(energy(rho)) << ", entropy " << format_double(S.value_bits) << " bits, purity "
             << format_double(purity) << "\n";
  }

  Manifest m;
  m.subcommand = "state-info";
  m.config_digest = digest(config.root().dump());
  m.cutoffs = {{"cutoff", D}, {"quadrature", quad}};
  m.deficit_budgets = {{"tolerance", tol}};
  m.overrides = ctx.overrides();
  write_json(ctx.out_dir / "state_info.json", {{"manifest", m.to_json()}, {"states", states}});
  return kSuccess;
}

}  // namespace bavc::cli
