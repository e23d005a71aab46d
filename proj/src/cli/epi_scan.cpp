#include "commands.hpp"

#include <algorithm>
#include <cmath>

namespace bavc::cli {

namespace {

GapKind parse_kind(const Obj& o, const std::string& s) {
  for (GapKind k : {GapKind::Conjecture, GapKind::EpniQuoted, GapKind::EpniPort, GapKind::Qepi, GapKind::QepiPort})
    if (s == to_string(k)) return k;
  o.fail("kinds", "unknown gap kind '" + s + "'");
}

std::vector<StateSpec> parse_state_list(const Obj& fam, const char* key) {
  std::vector<StateSpec> out;
  for (const Obj& s : fam.objects(key)) {
    auto more = parse_states(s);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace

int cmd_epi_scan(const Context& ctx) {
  const Config config = ctx.load_config();
  const Obj root(config, config.root(), "");
  root.allow({"cutoff", "quadrature", "state_tolerance", "violation_threshold", "lambdas", "kinds", "qepi_base",
              "port_sign", "seed", "families"});

  ScanConfig sc;
  sc.cutoff = static_cast<Index>(root.integer("cutoff", 20));
  if (ctx.cutoff_override) sc.cutoff = *ctx.cutoff_override;
  if (sc.cutoff < 1) root.fail("cutoff", "must be positive");
  sc.quadrature = static_cast<Index>(root.integer("quadrature", 0));
  sc.state_tolerance = ctx.tolerance.value_or(root.number("state_tolerance", 1e-6));
  sc.violation_threshold = root.number("violation_threshold", 1e-6);
  sc.lambdas = root.numbers("lambdas", sc.lambdas);
  for (double l : sc.lambdas)
    if (!(l >= 0.0 && l <= 1.0)) root.fail("lambdas", "every lambda must lie in [0, 1]");
  sc.kinds.clear();
  for (const auto& k : root.strings("kinds", {"conjecture"})) sc.kinds.push_back(parse_kind(root, k));
  const std::string base = root.string("qepi_base", "2");
  if (base == "2") {
    sc.options.qepi_base = QepiBase::Two;
  } else if (base == "e") {
    sc.options.qepi_base = QepiBase::E;
  } else {
    root.fail("qepi_base", "expected \"2\" or \"e\"");
  }
  sc.options.sign = parse_port_sign(root, "port_sign");
  const std::uint64_t base_seed = ctx.seed.value_or(static_cast<std::uint64_t>(root.integer("seed", 1)));

  json seeds = json::object();
  const auto families = root.has("families") ? root.objects("families") : std::vector<Obj>{};
  for (std::size_t i = 0; i < families.size(); ++i) {
    const Obj& f = families[i];
    const std::string name = f.string("name", "family" + std::to_string(i));
    PairFamily fam;
    if (f.has("random_diagonal")) {
      f.allow({"name", "random_diagonal"});
      const Obj rd = f.child("random_diagonal");
      rd.allow({"draws", "levels", "seed"});
      const auto draws = rd.integer("draws");
      if (draws < 0) rd.fail("draws", "must be non-negative");
      const auto levels = rd.integer("levels", sc.cutoff);
      const auto seed = rd.has("seed") ? static_cast<std::uint64_t>(rd.integer("seed")) : base_seed + i;
      fam = random_diagonal_pairs(static_cast<std::size_t>(draws), static_cast<Index>(levels), seed);
      seeds[name] = seed;
    } else {
      f.allow({"name", "xs", "ys", "zipped"});
      fam.xs = parse_state_list(f, "xs");
      fam.ys = parse_state_list(f, "ys");
      fam.zipped = f.boolean("zipped", false);
    }
    fam.name = name;
    sc.families.push_back(std::move(fam));
  }

  const ScanReport rep = scan_families(sc);

  Manifest m;
  m.subcommand = "epi-scan";
  m.config_digest = digest(config.root().dump());
  m.seed_schedule = {{"base", base_seed}, {"families", seeds}};
  m.cutoffs = {{"scan", sc.cutoff}, {"confirm", 2 * sc.cutoff}, {"quadrature", sc.quadrature}};
  double worst_deficit = 0.0;
  for (const auto& r : rep.records) worst_deficit = std::max(worst_deficit, r.deficit_budget);
  m.deficit_budgets = {{"state_tolerance", sc.state_tolerance}, {"max_record_deficit", worst_deficit}};
  m.overrides = ctx.overrides();

  CsvWriter csv(ctx.out_dir / "epi_scan.csv", m,
                {"family", "kind", "x", "y", "lambda", "lhs_bits", "rhs_bits", "gap", "cutoff", "deficit_budget",
                 "status", "confirm_gap"});
  json per_family = json::array();
  std::size_t idx = 0;
  for (const auto& fam : sc.families) {
    const std::size_t n = fam.size() * sc.lambdas.size() * sc.kinds.size();
    double fmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j, ++idx) {
      const GapRecord& r = rep.records[idx];
      fmin = std::min(fmin, r.gap);
      csv.cell(fam.name).cell(to_string(r.kind)).cell(r.x_label).cell(r.y_label).cell(r.lambda).cell(r.lhs_bits);
      csv.cell(r.rhs_bits).cell(r.gap).cell(static_cast<long long>(r.cutoff)).cell(r.deficit_budget);
      csv.cell(to_string(r.status)).cell(r.confirm_gap);
      csv.end_row();
    }
    per_family.push_back({{"name", fam.name}, {"records", n}, {"min_gap", num(n ? fmin : 0.0)}});
  }

  json summary{{"manifest", m.to_json()},
               {"records", rep.records.size()},
               {"min_gap", num(rep.min_gap)},
               {"artifacts", rep.artifacts},
               {"violations", rep.violations},
               {"families", per_family}};
  if (!rep.records.empty()) {
    const auto& r = rep.records[rep.argmin];
    summary["argmin"] = {{"index", rep.argmin}, {"kind", to_string(r.kind)}, {"x", r.x_label},
                         {"y", r.y_label},      {"lambda", r.lambda},         {"gap", num(r.gap)}};
  }
  write_json(ctx.out_dir / "epi_scan.json", summary);

  *ctx.out << "epi-scan: " << rep.records.size() << " records, min gap " << format_double(rep.min_gap) << " bits, "
           << rep.artifacts << " numerical artifacts, " << rep.violations << " confirmed violations\n";
  if (rep.violations > 0) {
    *ctx.err << "bavc: invariant violation: " << rep.violations
             << " gaps stayed below the threshold after doubling the cutoff\n";
    return kInvariantViolation;
  }
  return kSuccess;
}

}  // namespace bavc::cli
