#include "commands.hpp"

#include "bavc/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace bavc::cli {

json Context::overrides() const {
  json o = json::object();
  if (seed) o["seed"] = *seed;
  if (cutoff_override) o["cutoff"] = *cutoff_override;
  if (tolerance) o["tolerance"] = *tolerance;
  return o;
}

Config Context::load_config() const {
  if (config_path.empty()) throw ConfigParseError("--config is required for this subcommand");
  return Config::load(config_path);
}

PortSign parse_port_sign(const Obj& o, const char* key) {
  const std::string s = o.string(key, "plus");
  if (s == "plus") return PortSign::Plus;
  if (s == "minus") return PortSign::Minus;
  o.fail(key, "expected \"plus\" or \"minus\"");
}

namespace {

int report(std::ostream& err, int code, const char* kind, const std::exception& e) {
  err << "bavc: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerics for the jammed bosonic beam-splitter channel", "bavc"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  Index cutoff = 0;
  double tolerance = 0.0;

  app.add_option("--config", ctx.config_path, "JSON scenario config");
  app.add_option("--out-dir", ctx.out_dir, "directory for output files")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "base seed of the seed schedule");
  app.add_option("--threads", threads, "worker threads, 0 for hardware concurrency");
  auto* cutoff_opt = app.add_option("--cutoff-override", cutoff, "Fock cutoff replacing the configured one")
                         ->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tolerance", tolerance, "truncation tolerance for state construction")
                      ->check(CLI::PositiveNumber);

  auto* epi = app.add_subcommand("epi-scan", "entropy power inequality gap scan");
  auto* cap = app.add_subcommand("capacity", "minimax Holevo capacity search");
  auto* lem = app.add_subcommand("lemma-check", "numerical checks of the coding lemmas");
  auto* code = app.add_subcommand("code-sim", "short-blocklength code simulation");
  auto* info = app.add_subcommand("state-info", "spectrum and energy of a configured state");

  LemmaFlags lf;
  lem->add_option("--lemma", lf.lemma, "1, 2, 3, 4, 5, gentle or all")
      ->check(CLI::IsMember({"1", "2", "3", "4", "5", "gentle", "all"}));
  lem->add_option("--k", lf.k, "block length for lemmas 1 and 5")->check(CLI::PositiveNumber);
  lem->add_option("--d", lf.d, "alphabet size for lemmas 1 and 5")->check(CLI::PositiveNumber);
  lem->add_option("--trials", lf.trials, "Monte Carlo trials for lemma 4")->check(CLI::PositiveNumber);
  lem->add_option("--budget", lf.budget, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "bavc: usage error: " << e.what() << "\n" << "run 'bavc --help' for usage\n";
    return kConfigError;
  }

  if (*seed_opt) ctx.seed = seed;
  if (*cutoff_opt) ctx.cutoff_override = cutoff;
  if (*tol_opt) ctx.tolerance = tolerance;
  set_thread_count(threads);

  try {
    std::filesystem::create_directories(ctx.out_dir);
    if (*epi) return cmd_epi_scan(ctx);
    if (*cap) return cmd_capacity(ctx);
    if (*lem) return cmd_lemma_check(ctx, lf);
    if (*code) return cmd_code_sim(ctx);
    if (*info) return cmd_state_info(ctx);
    return kInternalError;
  } catch (const ConfigParseError& e) {
    return report(err, kConfigError, "config error", e);
  } catch (const InvalidArgument& e) {
    return report(err, kConfigError, "config error", e);
  } catch (const DomainError& e) {
    return report(err, kConfigError, "config error", e);
  } catch (const DimensionMismatch& e) {
    return report(err, kConfigError, "config error", e);
  } catch (const EmptyFamily& e) {
    return report(err, kConfigError, "config error", e);
  } catch (const TruncationError& e) {
    return report(err, kBudgetExceeded, "numerical budget exceeded", e);
  } catch (const RejectionBudgetExceeded& e) {
    return report(err, kBudgetExceeded, "numerical budget exceeded", e);
  } catch (const NegativeEigenvalue& e) {
    return report(err, kInvariantViolation, "invariant violation", e);
  } catch (const std::exception& e) {
    return report(err, kInternalError, "error", e);
  }
}

}  // namespace bavc::cli
