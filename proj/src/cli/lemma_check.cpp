#include "commands.hpp"

#include "bavc/avc_verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace bavc::cli {

namespace {

Eigen::MatrixXcd random_state(std::mt19937_64& rng, Index D, Index rank) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd A(D, rank);
  for (Index c = 0; c < rank; ++c)
    for (Index r = 0; r < D; ++r) A(r, c) = Complex(n(rng), n(rng));
  Eigen::MatrixXcd m = A * A.adjoint();
  m /= m.trace().real();
  return 0.5 * (m + m.adjoint());
}

Eigen::MatrixXcd random_projector(std::mt19937_64& rng, Index D, Index rank) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd A(D, rank);
  for (Index c = 0; c < rank; ++c)
    for (Index r = 0; r < D; ++r) A(r, c) = Complex(n(rng), n(rng));
  const Eigen::MatrixXcd Q =
      Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ() * Eigen::MatrixXcd::Identity(D, rank);
  return Q * Q.adjoint();
}

struct Row {
  std::string lemma;
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  ///< smallest slack; negative means a failure
  bool passed() const { return failures == 0; }
  void add(bool ok, double margin) {
    ++instances;
    if (!ok) ++failures;
    worst_margin = std::min(worst_margin, margin);
  }
};

std::string kd(int k, int d) { return "k=" + std::to_string(k) + " d=" + std::to_string(d); }

void lemma1(std::vector<Row>& rows, int k, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index D = static_cast<Index>(std::llround(std::pow(d, k)));
  Row row{"1", "random states " + kd(k, d)};
  for (int t = 0; t < 500; ++t) {
    const auto rho = random_state(rng, D, 1 + t % 6);
    const auto Q = random_projector(rng, d, 1 + t % std::min(3, d));
    const auto r = lemma1_check(rho, Q, k);
    row.add(r.passed && r.chain_holds, r.chain.back() - (1.0 - k * r.epsilon));
  }
  rows.push_back(row);
}

void lemma2(std::vector<Row>& rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Row row{"2", "random diagonal products k=4 D=5"};
  for (int t = 0; t < 100; ++t) {
    std::vector<DensityMatrix> f;
    double e = 0.0;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd p(5);
      for (Index n = 0; n < 5; ++n) p(n) = u(rng);
      p /= p.sum();
      f.push_back(DensityMatrix::from_diagonal(p));
      e += energy(f.back()) / 4.0;
    }
    const auto r = symmetrize_marginal_check(f, e * (1.0 + 1e-12));
    row.add(r.passed, -std::max(r.marginal_error, r.energy_error));
  }
  rows.push_back(row);

  Row ex{"2", "phav(1) phav(0) phav(1) D=6"};
  const auto a = make_phav(1.0, 6, 1.0), b = make_phav(0.0, 6, 1.0);
  const auto r = symmetrize_marginal_check({a, b, a}, 2.0 / 3.0);
  ex.add(r.passed, -std::max(r.marginal_error, r.energy_error));
  rows.push_back(ex);
}

void lemma3(std::vector<Row>& rows) {
  for (double b2 : {0.5, 1.0, 2.0}) {
    for (Index N : {44, 60, 88}) {
      const auto r = lemma3_tail_check(JammerSpec::phav(std::sqrt(b2)), N);
      Row row{"3", "phav b^2=" + format_double(b2) + " N=" + std::to_string(N)};
      row.add(r.passed && r.pure_applicable, -static_cast<double>(N) * std::log(4.0) - r.log_tail);
      rows.push_back(row);
    }
  }
  const auto r = lemma3_tail_check(JammerSpec::thermal(1.0), 60, 1.0);
  Row row{"3", "thermal(1) K=1 N=60"};
  row.add(r.passed && r.mixed_applicable, r.log_mixed_bound - r.log_tail);
  rows.push_back(row);
}

json lemma4(std::vector<Row>& rows, std::size_t trials, std::uint64_t seed) {
  const std::vector<std::vector<double>> p(1000, {0.5, 0.5});
  const auto r = lemma4_concentration_check(p, 0.1, trials, seed);
  Row row{"4", "d=2 k=1000 eps=0.1"};
  row.add(r.passed, r.bound_c2 - r.empirical_tail);
  rows.push_back(row);
  return {{"trials", r.trials},         {"deviations", r.deviations}, {"empirical_tail", r.empirical_tail},
          {"standard_error", r.standard_error}, {"bound_c2", r.bound_c2}, {"bound_c2d", r.bound_c2d},
          {"vacuous", r.vacuous}};
}

void lemma5(std::vector<Row>& rows, int kmax, int dmax) {
  for (int d = 1; d <= dmax; ++d) {
    for (int k = 1; k <= kmax; ++k) {
      const auto r = lemma5_exhaustive(d, k);
      // Log slack of k^k <= (2k)^d |T| prod m_i^{m_i}, minimized over types.
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& t : enumerate_types(d, k)) {
        double rhs = d * std::log(2.0 * k) + std::log(static_cast<double>(t.size));
        for (int m : t.counts)
          if (m > 0) rhs += m * std::log(static_cast<double>(m));
        margin = std::min(margin, rhs - k * std::log(static_cast<double>(k)));
      }
      Row row{"5", "exhaustive " + kd(k, d)};
      row.instances = r.sequences;
      row.failures = r.passed ? 0 : 1;
      row.worst_margin = margin;
      rows.push_back(row);
    }
  }
  Row sizes{"5", "type size bounds k<=" + std::to_string(2 * kmax) + " d<=" + std::to_string(dmax + 1)};
  for (int d = 1; d <= dmax + 1; ++d)
    for (int k = 1; k <= 2 * kmax; ++k)
      for (const auto& t : enumerate_types(d, k)) sizes.add(type_size_bounds(t), 0.0);
  rows.push_back(sizes);
}

void gentle(std::vector<Row>& rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index D = 6;
  Row row{"gentle", "random pairs D=6"};
  for (int t = 0; t < 500; ++t) {
    const auto rho = random_state(rng, D, 1 + t % D);
    const auto P = random_projector(rng, D, 1 + (t / 3) % D);
    const auto r = gentle_operator_check(rho, P);
    row.add(r.passed, r.rhs - r.lhs);
  }
  rows.push_back(row);
}

}  // namespace

int cmd_lemma_check(const Context& ctx, const LemmaFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const bool all = flags.lemma == "all";
  const auto want = [&](const char* id) { return all || flags.lemma == id; };
  const int k1 = flags.k.value_or(3), d1 = flags.d.value_or(4);
  const int k5 = flags.k.value_or(6), d5 = flags.d.value_or(3);
  const std::size_t trials = flags.trials.value_or(flags.budget == "full" ? 100000 : 10000);
  const std::uint64_t base = ctx.seed.value_or(1);

  json resolved{{"lemma", flags.lemma}, {"budget", flags.budget}, {"trials", trials}};
  if (flags.k) resolved["k"] = *flags.k;
  if (flags.d) resolved["d"] = *flags.d;

  std::vector<Row> rows;
  json details = json::object();
  json seeds = json::object();
  if (want("1")) {
    lemma1(rows, k1, d1, base);
    seeds["1"] = base;
  }
  if (want("2")) {
    lemma2(rows, base + 1);
    seeds["2"] = base + 1;
  }
  if (want("3")) lemma3(rows);
  if (want("4")) {
    details["4"] = lemma4(rows, trials, base + 3);
    seeds["4"] = base + 3;
  }
  if (want("5")) lemma5(rows, k5, d5);
  if (want("gentle")) {
    gentle(rows, base + 5);
    seeds["gentle"] = base + 5;
  }

  Manifest m;
  m.subcommand = "lemma-check";
  m.config_digest = digest(resolved.dump());
  m.seed_schedule = {{"base", base}, {"lemmas", seeds}};
  m.overrides = ctx.overrides();

  bool ok = true;
  json table = json::array();
  CsvWriter csv(ctx.out_dir / "lemma_check.csv", m, {"lemma", "case", "instances", "failures", "worst_margin", "passed"});
  for (const auto& r : rows) {
    ok = ok && r.passed();
    csv.cell(r.lemma).cell(r.name).cell(r.instances).cell(r.failures).cell(r.worst_margin);
    csv.cell(r.passed() ? "pass" : "FAIL");
    csv.end_row();
    table.push_back({{"lemma", r.lemma},
                     {"case", r.name},
                     {"instances", r.instances},
                     {"failures", r.failures},
                     {"worst_margin", num(r.worst_margin)},
                     {"passed", r.passed()}});
  }
  write_json(ctx.out_dir / "lemma_check.json",
             {{"manifest", m.to_json()}, {"config", resolved}, {"rows", table}, {"details", details}, {"passed", ok}});

  for (const auto& r : rows)
    *ctx.out << (r.passed() ? "pass " : "FAIL ") << "lemma " << r.lemma << ": " << r.name << " (" << r.instances
             << " instances)\n";
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  *ctx.out << "lemma-check: " << (ok ? "all passed" : "failures present") << " in " << secs << " s\n";
  return ok ? kSuccess : kInvariantViolation;
}

}  // namespace bavc::cli
