#include "bavc/coding.hpp"

#include "bavc/errors.hpp"
#include "bavc/parallel.hpp"
#include "search.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace bavc {

namespace {

constexpr Index kMaxDenseDim = 4096;

double trace_product(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& hermitian_b) {
  return (a.cwiseProduct(hermitian_b.conjugate())).sum().real();
}

Eigen::MatrixXcd kron_all(const std::vector<Eigen::MatrixXcd>& factors) {
  Eigen::MatrixXcd out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = Eigen::kroneckerProduct(out, factors[i]).eval();
  return out;
}

void require_dense(Index cutoff, Index k) {
  if (k < 1 || k > 5) throw InvalidArgument("blocklength must be in 1..5");
  if (cutoff < 1) throw InvalidArgument("cutoff must be positive");
  if (std::pow(static_cast<double>(cutoff), static_cast<double>(k)) > static_cast<double>(kMaxDenseDim))
    throw DimensionMismatch("cutoff^k exceeds the dense limit 4096");
}

const DphavJammer* as_coherent(const JammerSpec& j) {
  const auto* d = std::get_if<DphavJammer>(&j.kind());
  return d != nullptr && d->radius == 0.0 ? d : nullptr;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

// ---------------------------------------------------------------------------

double Povm::completeness_error() const {
  if (elements.empty()) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(elements[0].rows(), elements[0].cols());
  for (const auto& e : elements) sum += e;
  return (sum - Eigen::MatrixXcd::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
}

double Povm::min_eigenvalue() const {
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& e : elements) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e, Eigen::EigenvaluesOnly);
    mn = std::min(mn, es.eigenvalues().minCoeff());
  }
  return mn;
}

Povm pgm_decoder(const std::vector<Eigen::MatrixXcd>& outputs) {
  if (outputs.empty()) throw InvalidArgument("PGM needs at least one state");
  const Index n = outputs[0].rows();
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& r : outputs) {
    if (r.rows() != n || r.cols() != n) throw DimensionMismatch("PGM states must share a space");
    S += r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (S + S.adjoint()));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double floor = 1e-12 * std::max(1.0, lam.maxCoeff());
  Eigen::VectorXd inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = lam(i) > floor ? 1.0 / std::sqrt(lam(i)) : 0.0;
  const Eigen::MatrixXcd W = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();

  Povm povm;
  Eigen::MatrixXcd fail = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& r : outputs) {
    Eigen::MatrixXcd d = W * r * W;
    d = 0.5 * (d + d.adjoint()).eval();
    fail -= d;
    povm.elements.push_back(std::move(d));
  }
  povm.elements.push_back(0.5 * (fail + fail.adjoint()));
  return povm;
}

ChannelConfig CodingConfig::channel() const {
  ChannelConfig c;
  c.tau = tau;
  c.output_cutoff = cutoff;
  c.quadrature = quadrature;
  c.sign = sign;
  return c;
}

// ---------------------------------------------------------------------------

JammerStrategy JammerStrategy::iid(const JammerSpec& spec, Index k) {
  if (k < 1) throw InvalidArgument("blocklength must be positive");
  return JammerStrategy(std::vector<JammerSpec>(static_cast<std::size_t>(k), spec));
}

JammerStrategy JammerStrategy::product(std::vector<JammerSpec> symbols) {
  if (symbols.empty()) throw InvalidArgument("strategy needs at least one symbol");
  return JammerStrategy(std::move(symbols));
}

double JammerStrategy::total_energy() const {
  double e = 0.0;
  for (const auto& s : symbols_) e += s.mean_energy();
  return e;
}

bool JammerStrategy::coherent_product() const {
  return std::all_of(symbols_.begin(), symbols_.end(), [](const JammerSpec& j) { return as_coherent(j) != nullptr; });
}

std::string JammerStrategy::label() const {
  const std::string first = symbols_.front().label();
  if (std::all_of(symbols_.begin(), symbols_.end(), [&](const JammerSpec& j) { return j.label() == first; }))
    return "iid " + first;
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) out += (i ? " x " : "") + symbols_[i].label();
  return out;
}

StrategyCheck check_strategy(const JammerStrategy& s, double P, double K1) {
  const double k = static_cast<double>(s.length());
  if (s.total_energy() > k * P * (1.0 + 1e-12) + 1e-15) return {false, "total energy exceeds kP"};
  if (!s.coherent_product()) return {true, ""};
  std::vector<Complex> pts;
  for (const auto& j : s.symbols()) pts.push_back(as_coherent(j)->center);
  const std::vector<double> w(pts.size(), 1.0 / k);
  if (K1 <= 0.0) {
    const bool all_zero = std::all_of(pts.begin(), pts.end(), [](Complex c) { return c == Complex(0.0, 0.0); });
    return {all_zero, all_zero ? "" : "empirical amplitudes are not sub-Gaussian"};
  }
  if (!check_subgaussian(pts, w, std::sqrt(K1)).passed) return {false, "empirical amplitudes are not sub-Gaussian"};
  return {true, ""};
}

// ---------------------------------------------------------------------------

void Codebook::check_energy() const {
  for (const auto& x : codewords) {
    double e = 0.0;
    for (const auto& a : x) e += std::norm(a);
    if (e / static_cast<double>(k) > energy_budget * (1.0 + 1e-12) + 1e-15)
      throw DomainError("codeword exceeds the per-symbol energy budget");
  }
}

Codebook draw_codebook(const CodebookSpec& spec) {
  if (spec.k < 1 || spec.k > 5) throw InvalidArgument("blocklength must be in 1..5");
  if (spec.M < 1) throw InvalidArgument("need at least one message");
  if (!(spec.E >= 0.0)) throw DomainError("energy budget must be >= 0");
  const auto& pts = spec.base.points();
  const auto& w = spec.base.weights();
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  cdf.back() = 1.0;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Codebook code;
  code.k = spec.k;
  code.energy_budget = spec.E;
  std::vector<std::size_t> idx(static_cast<std::size_t>(spec.k));
  std::vector<double> counts(w.size());
  for (std::size_t m = 0; m < spec.M; ++m) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !accepted; ++attempt) {
      double e = 0.0;
      std::fill(counts.begin(), counts.end(), 0.0);
      for (auto& i : idx) {
        i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u(rng)) - cdf.begin());
        i = std::min(i, w.size() - 1);
        e += std::norm(pts[i]);
        counts[i] += 1.0;
      }
      if (e / static_cast<double>(spec.k) > spec.E * (1.0 + 1e-12) + 1e-15) continue;
      if (std::isfinite(spec.delta)) {
        double l1 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) l1 += std::abs(counts[i] / static_cast<double>(spec.k) - w[i]);
        if (l1 > spec.delta) continue;
      }
      std::vector<Complex> x;
      for (auto i : idx) x.push_back(pts[i]);
      code.codewords.push_back(std::move(x));
      accepted = true;
    }
    if (!accepted) throw RejectionBudgetExceeded("no admissible codeword within the rejection budget");
  }
  return code;
}

Eigen::MatrixXcd codeword_output(const std::vector<Complex>& x, const JammerStrategy& s, const CodingConfig& cfg) {
  const Index k = static_cast<Index>(x.size());
  if (s.length() != k) throw DimensionMismatch("strategy length differs from the blocklength");
  require_dense(cfg.cutoff, k);
  const ChannelConfig ch = cfg.channel();
  std::vector<Eigen::MatrixXcd> f;
  for (Index i = 0; i < k; ++i)
    f.push_back(apply_bs_semiclassical(x[static_cast<std::size_t>(i)], s.symbols()[static_cast<std::size_t>(i)], ch).entries());
  return kron_all(f);
}

void attach_pgm_decoder(Codebook& code, const JammerStrategy& design, const CodingConfig& cfg) {
  require_dense(cfg.cutoff, code.k);
  if (code.size() == 1) {
    const Index n = static_cast<Index>(std::pow(static_cast<double>(cfg.cutoff), static_cast<double>(code.k)) + 0.5);
    code.decoder.elements = {Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd::Zero(n, n)};
    return;
  }
  std::vector<Eigen::MatrixXcd> outs;
  for (const auto& x : code.codewords) outs.push_back(codeword_output(x, design, cfg));
  code.decoder = pgm_decoder(outs);
}

double success_probability(const Codebook& code, const JammerStrategy& s, const CodingConfig& cfg) {
  if (code.decoder.outcomes() != code.size()) throw DimensionMismatch("decoder does not match the codebook");
  double total = 0.0;
  for (std::size_t m = 0; m < code.size(); ++m) {
    const Eigen::MatrixXcd out = codeword_output(code.codewords[m], s, cfg);
    if (out.rows() != code.decoder.elements[m].rows()) throw DimensionMismatch("decoder space differs from outputs");
    total += trace_product(code.decoder.elements[m], out);
  }
  return clamp01(total / static_cast<double>(code.size()));
}

// ---------------------------------------------------------------------------

const char* to_string(StrategyFamily f) {
  switch (f) {
    case StrategyFamily::Vacuum: return "vacuum";
    case StrategyFamily::Thermal: return "thermal";
    case StrategyFamily::Phav: return "phav";
    case StrategyFamily::PerSymbolThermal: return "per_symbol_thermal";
    case StrategyFamily::CoherentProduct: return "coherent_product";
  }
  return "?";
}

WorstCase worst_case_jammer(const Codebook& code, const std::vector<StrategyFamily>& families, double P,
                            const CodingConfig& cfg, int iterations) {
  if (families.empty()) throw EmptyFamily("no strategy family selected");
  if (!(P >= 0.0)) throw DomainError("jammer power must be >= 0");
  const Index k = code.k;
  const double K1 = cfg.subgaussian_K1 > 0.0 ? cfg.subgaussian_K1 : P;
  WorstCase wc;
  wc.strategy = JammerStrategy::iid(JammerSpec::vacuum(), k);
  bool have = false;

  const auto eval = [&](const JammerStrategy& s) {
    StrategyStep step;
    step.strategy = s.label();
    if (!check_strategy(s, P, K1).admissible) {
      step.rejected = true;
      step.value = std::numeric_limits<double>::quiet_NaN();
      step.best = have ? wc.success : std::numeric_limits<double>::quiet_NaN();
      wc.trace.push_back(step);
      ++wc.rejected;
      return std::numeric_limits<double>::infinity();
    }
    step.value = success_probability(code, s, cfg);
    if (!have || step.value < wc.success) {
      wc.success = step.value;
      wc.strategy = s;
      have = true;
    }
    step.best = wc.success;
    wc.trace.push_back(step);
    return step.value;
  };
  // Maps [0, 1]^n onto non-negative numbers, rescaled onto the kP budget.
  const auto budgeted = [&](std::vector<double> v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > static_cast<double>(k) * P && total > 0.0)
      for (auto& x : v) x *= static_cast<double>(k) * P / total;
    return v;
  };

  for (const auto f : families) {
    switch (f) {
      case StrategyFamily::Vacuum:
        eval(JammerStrategy::iid(JammerSpec::vacuum(), k));
        break;
      case StrategyFamily::Thermal:
        detail::golden_section(
            [&](double n) { return eval(JammerStrategy::iid(JammerSpec::thermal(std::clamp(n, 0.0, P)), k)); }, 0.0,
            P, iterations);
        break;
      case StrategyFamily::Phav: {
        const double bmax = std::sqrt(P);
        detail::golden_section(
            [&](double b) { return eval(JammerStrategy::iid(JammerSpec::phav(std::clamp(b, 0.0, bmax)), k)); }, 0.0,
            bmax, iterations);
        break;
      }
      case StrategyFamily::PerSymbolThermal:
        detail::nelder_mead(
            [&](const std::vector<double>& u) {
              std::vector<double> n(u.size());
              for (std::size_t i = 0; i < u.size(); ++i) n[i] = 2.0 * P * u[i];
              n = budgeted(n);
              std::vector<JammerSpec> sym;
              for (double x : n) sym.push_back(JammerSpec::thermal(x));
              return eval(JammerStrategy::product(std::move(sym)));
            },
            std::vector<double>(static_cast<std::size_t>(k), 0.5), 0.25, iterations);
        break;
      case StrategyFamily::CoherentProduct: {
        std::vector<double> x0(static_cast<std::size_t>(2 * k), 0.5);
        for (Index i = 0; i < k; ++i) x0[static_cast<std::size_t>(2 * i)] = 0.75;
        detail::nelder_mead(
            [&](const std::vector<double>& u) {
              const double scale = std::sqrt(2.0 * P);
              std::vector<Complex> a;
              std::vector<double> e;
              for (Index i = 0; i < k; ++i) {
                a.emplace_back(scale * (2.0 * u[static_cast<std::size_t>(2 * i)] - 1.0),
                               scale * (2.0 * u[static_cast<std::size_t>(2 * i + 1)] - 1.0));
                e.push_back(std::norm(a.back()));
              }
              const std::vector<double> eb = budgeted(e);
              std::vector<JammerSpec> sym;
              for (Index i = 0; i < k; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                const double r = e[ii] > 0.0 ? std::sqrt(eb[ii] / e[ii]) : 0.0;
                sym.push_back(JammerSpec::coherent(a[ii] * r));
              }
              return eval(JammerStrategy::product(std::move(sym)));
            },
            x0, 0.2, iterations);
        break;
      }
    }
  }
  if (!have) wc.success = std::numeric_limits<double>::quiet_NaN();
  return wc;
}

// ---------------------------------------------------------------------------

JammerSpec phase_averaged(const JammerSpec& j, Index quadrature) {
  const auto* d = std::get_if<DphavJammer>(&j.kind());
  if (d == nullptr) return j;
  if (d->center == Complex(0.0, 0.0)) return JammerSpec::phav(d->radius);
  if (d->radius == 0.0) return JammerSpec::phav(std::abs(d->center));
  const Index M = std::max<Index>(quadrature, 8);
  std::vector<PhavComponent> comps;
  for (Index m = 0; m < M; ++m) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(M);
    comps.push_back({std::abs(d->center + std::polar(d->radius, phi)), 1.0 / static_cast<double>(M)});
  }
  return JammerSpec::phav_mixture(std::move(comps));
}

namespace {

struct CrDraw {
  std::vector<double> theta;
  std::vector<std::size_t> perm;
};

CrDraw draw_cr(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  CrDraw d;
  for (std::size_t i = 0; i < k; ++i) d.theta.push_back(u(rng));
  d.perm.resize(k);
  std::iota(d.perm.begin(), d.perm.end(), std::size_t{0});
  std::shuffle(d.perm.begin(), d.perm.end(), rng);
  return d;
}

// Success of the code whose encoder sends y_{pi(i)} = e^{i theta_i} x_i and
// whose decoder is U_pi (x) V(theta_i) D_m (x) V(-theta_i) U_pi^dagger.
double cr_sample(const Codebook& code, const JammerStrategy& s, const CodingConfig& cfg, const CrDraw& d) {
  const std::size_t k = static_cast<std::size_t>(code.k);
  const ChannelConfig ch = cfg.channel();
  double total = 0.0;
  for (std::size_t m = 0; m < code.size(); ++m) {
    std::vector<Complex> y(k);
    for (std::size_t i = 0; i < k; ++i) y[d.perm[i]] = std::polar(1.0, d.theta[i]) * code.codewords[m][i];
    std::vector<Eigen::MatrixXcd> f(k);
    for (std::size_t i = 0; i < k; ++i) {
      const DensityMatrix w = apply_bs_semiclassical(y[d.perm[i]], s.symbols()[d.perm[i]], ch);
      f[i] = phase_rotate(w, -d.theta[i]).entries();
    }
    total += trace_product(code.decoder.elements[m], kron_all(f));
  }
  return total / static_cast<double>(code.size());
}

}  // namespace

CrResult cr_average(const Codebook& code, const JammerStrategy& s, std::size_t samples, std::uint64_t seed,
                    const CodingConfig& cfg, std::size_t support) {
  if (samples == 0) throw InvalidArgument("CR average needs at least one sample");
  if (s.length() != code.k) throw DimensionMismatch("strategy length differs from the blocklength");
  if (code.decoder.outcomes() != code.size()) throw DimensionMismatch("decoder does not match the codebook");
  const std::size_t k = static_cast<std::size_t>(code.k);

  std::vector<CrDraw> atoms;
  if (support > 0) {
    std::seed_seq ss{seed, std::uint64_t{0xC0FFEE}};
    std::mt19937_64 rng(ss);
    for (std::size_t i = 0; i < support; ++i) atoms.push_back(draw_cr(rng, k));
  }

  constexpr std::size_t kChunk = 16;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<double> values(samples);
  parallel_for(chunks, [&](std::size_t c) {
    std::seed_seq ss{seed, static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(ss);
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      if (atoms.empty()) {
        values[t] = cr_sample(code, s, cfg, draw_cr(rng, k));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
        values[t] = cr_sample(code, s, cfg, atoms[pick(rng)]);
      }
    }
  });

  CrResult r;
  r.samples = samples;
  double sum = 0.0, sq = 0.0;
  for (double v : values) sum += v;
  r.monte_carlo = sum / static_cast<double>(samples);
  for (double v : values) sq += (v - r.monte_carlo) * (v - r.monte_carlo);
  r.standard_error = samples > 1 ? std::sqrt(sq / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;

  // Exact side: uniform over distinct arrangements of the phase-averaged symbols.
  std::vector<JammerSpec> avg;
  std::vector<std::string> labels;
  for (const auto& j : s.symbols()) {
    avg.push_back(phase_averaged(j));
    labels.push_back(avg.back().label());
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<std::string> arrangement;
  for (auto i : order) arrangement.push_back(labels[i]);
  std::map<std::string, JammerSpec> by_label;
  for (std::size_t i = 0; i < k; ++i) by_label.emplace(labels[i], avg[i]);
  double acc = 0.0;
  std::size_t count = 0;
  do {
    std::vector<JammerSpec> sym;
    for (const auto& l : arrangement) sym.push_back(by_label.at(l));
    acc += success_probability(code, JammerStrategy::product(std::move(sym)), cfg);
    ++count;
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));
  r.symmetrized = acc / static_cast<double>(count);
  return r;
}

// ---------------------------------------------------------------------------

double helstrom_pure(double overlap) {
  if (!(overlap >= 0.0 && overlap <= 1.0 + 1e-12)) throw DomainError("overlap must lie in [0, 1]");
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - overlap * overlap)));
}

double helstrom(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma, double p) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw DimensionMismatch("states differ in dimension");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("prior must lie in [0, 1]");
  return 0.5 * (1.0 + trace_norm_hermitian(p * rho - (1.0 - p) * sigma));
}

}  // namespace bavc
