#include "bavc/capacity.hpp"

#include "bavc/entropy.hpp"
#include "bavc/errors.hpp"
#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace bavc {

double closed_form_capacity(double tau, double E, double P) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("transmissivity must lie in [0, 1]");
  if (!(E >= 0.0) || !(P >= 0.0)) throw DomainError("energies must be non-negative");
  return gordon_g(tau * E + (1.0 - tau) * P) - gordon_g((1.0 - tau) * P);
}

std::vector<Complex> GridSpec::points() const {
  if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
  if (!(energy_cap >= 0.0)) throw DomainError("grid energy cap must be non-negative");
  const auto n = static_cast<long>(std::floor(std::sqrt(energy_cap) / spacing + 1e-9));
  std::vector<Complex> pts;
  for (long i = -n; i <= n; ++i) {
    for (long j = -n; j <= n; ++j) {
      const Complex c(spacing * static_cast<double>(i), spacing * static_cast<double>(j));
      if (std::norm(c) <= energy_cap * (1.0 + 1e-12)) pts.push_back(c);
    }
  }
  return pts;
}

namespace {

// P(x - h/2 < X <= x + h/2) for X ~ N(0, s^2), using the upper tail on |x| for accuracy.
double interval_mass(double x, double h, double s) {
  const double a = (std::abs(x) - 0.5 * h) / (s * std::numbers::sqrt2);
  const double b = (std::abs(x) + 0.5 * h) / (s * std::numbers::sqrt2);
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
}

}  // namespace

GridConstellation build_grid_constellation(double variance, const GridSpec& grid) {
  if (!(variance >= 0.0)) throw DomainError("Gaussian variance must be non-negative");
  const std::vector<Complex> pts = grid.points();
  if (variance == 0.0) return {Constellation({Complex(0.0, 0.0)}, {1.0}), grid, 0.0, 1.0};
  const double s = std::sqrt(0.5 * variance);
  std::vector<Complex> kept;
  std::vector<double> w;
  double kappa = 0.0;
  for (const Complex& c : pts) {
    const double m = interval_mass(c.real(), grid.spacing, s) * interval_mass(c.imag(), grid.spacing, s);
    if (m <= 0.0) continue;
    kept.push_back(c);
    w.push_back(m);
    kappa += m;
  }
  if (kept.empty()) return {Constellation({Complex(0.0, 0.0)}, {1.0}), grid, variance, 0.0};
  // Normalize, then fold the rounding residue into the heaviest weight.
  double total = 0.0;
  for (auto& x : w) total += (x /= kappa);
  *std::max_element(w.begin(), w.end()) += 1.0 - total;
  return {Constellation(std::move(kept), std::move(w)), grid, variance, kappa};
}

GridConstellation fit_grid_constellation(double E, const GridSpec& grid) {
  if (!(E >= 0.0)) throw DomainError("energy budget must be non-negative");
  const auto mean = [&](double v) { return build_grid_constellation(v, grid).constellation.mean_energy(); };
  if (E == 0.0) return build_grid_constellation(0.0, grid);
  double lo = 0.0, hi = E;
  const double hi_cap = 1e4 * std::max(1.0, grid.energy_cap);
  while (mean(hi) <= E) {
    lo = hi;
    hi *= 2.0;
    if (hi > hi_cap) return build_grid_constellation(lo, grid);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean(mid) <= E) lo = mid;
    else hi = mid;
  }
  return build_grid_constellation(lo, grid);
}

const char* to_string(JammerFamily f) {
  switch (f) {
    case JammerFamily::Vacuum: return "vacuum";
    case JammerFamily::Thermal: return "thermal";
    case JammerFamily::Phav: return "phav";
    case JammerFamily::PhavMixture2: return "phav_mixture2";
    case JammerFamily::Dphav: return "dphav";
  }
  return "?";
}

Index capacity_cutoff(double tau, double E, double P, double tol) {
  return std::max<Index>(8, choose_cutoff_thermal(tau * E + (1.0 - tau) * P, tol));
}

using detail::golden_section;
using detail::nelder_mead;

InnerResult inner_min_jammer(const Constellation& c, const std::vector<JammerFamily>& families, double P,
                             const SearchConfig& cfg) {
  if (families.empty()) throw EmptyFamily("jammer search needs at least one family");
  if (!(P >= 0.0)) throw DomainError("jammer power must be non-negative");
  const Index D = cfg.cutoff > 0 ? cfg.cutoff : capacity_cutoff(cfg.tau, c.mean_energy(), P, cfg.tail_tolerance);
  const ChannelConfig ch{.tau = cfg.tau, .output_cutoff = D, .quadrature = cfg.quadrature, .sign = cfg.sign};
  ch.validate();

  InnerResult res;
  res.value_bits = std::numeric_limits<double>::infinity();
  bool any = false;
  const auto eval = [&](const JammerSpec& j) {
    if (j.mean_energy() > P * (1.0 + 1e-12) + 1e-15) throw InvalidArgument("jammer candidate exceeds the power budget");
    const HolevoBreakdown hb = holevo_breakdown(c, j, ch);
    res.max_output_deficit = std::max(res.max_output_deficit, hb.max_output_deficit);
    const double v = hb.chi_bits;
    const bool better = v < res.value_bits - 1e-12 ||
                        (std::abs(v - res.value_bits) <= 1e-12 && j.mean_energy() < res.jammer.mean_energy());
    if (!any || better) {
      res.value_bits = v;
      res.jammer = j;
      any = true;
    }
    res.trace.push_back({j.label(), v, res.value_bits});
    return v;
  };

  for (const JammerFamily fam : families) {
    switch (fam) {
      case JammerFamily::Vacuum: eval(JammerSpec::vacuum()); break;
      case JammerFamily::Thermal:
        golden_section([&](double n) { return eval(JammerSpec::thermal(std::clamp(n, 0.0, P))); }, 0.0, P,
                       cfg.golden_iterations);
        break;
      case JammerFamily::Phav: {
        const double bmax = std::sqrt(P);
        const int n = std::max(1, cfg.phav_grid);
        int best_k = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= n; ++k) {
          const double v = eval(JammerSpec::phav(std::min(bmax, bmax * k / n)));
          if (v < best_v) {
            best_v = v;
            best_k = k;
          }
        }
        const double a = bmax * std::max(0, best_k - 1) / n, b = bmax * std::min(n, best_k + 1) / n;
        golden_section([&](double r) { return eval(JammerSpec::phav(std::clamp(r, 0.0, bmax))); }, a, b,
                       cfg.golden_iterations);
        break;
      }
      case JammerFamily::PhavMixture2: {
        // (u1, u2, w): component energies 4P u_i, rescaled onto the budget when the mean exceeds P.
        const auto make = [&](const std::vector<double>& x) {
          double e1 = 4.0 * P * x[0], e2 = 4.0 * P * x[1];
          const double w = x[2];
          const double m = w * e1 + (1.0 - w) * e2;
          if (m > P && m > 0.0) {
            e1 *= P / m;
            e2 *= P / m;
          }
          return JammerSpec::phav_mixture({{std::sqrt(e1), w}, {std::sqrt(e2), 1.0 - w}});
        };
        nelder_mead([&](const std::vector<double>& x) { return eval(make(x)); }, {0.4, 0.1, 0.5}, 0.2,
                    cfg.simplex_iterations);
        break;
      }
      case JammerFamily::Dphav: {
        // (f, phase / 2 pi, s): total energy sP split as |centre|^2 = f s P and radius^2 = (1 - f) s P.
        const auto make = [&](const std::vector<double>& x) {
          const double e = x[2] * P;
          return JammerSpec::dphav(std::polar(std::sqrt(x[0] * e), 2.0 * std::numbers::pi * x[1]),
                                   std::sqrt((1.0 - x[0]) * e));
        };
        nelder_mead([&](const std::vector<double>& x) { return eval(make(x)); }, {0.5, 0.0, 1.0}, 0.25,
                    cfg.simplex_iterations);
        break;
      }
    }
  }
  return res;
}

MinimaxResult outer_max_input(const std::vector<JammerFamily>& families, double E, double P, const SearchConfig& cfg) {
  if (!(E >= 0.0)) throw DomainError("input energy must be non-negative");
  if (cfg.spacings.empty() || cfg.energy_fractions.empty()) throw InvalidArgument("empty outer search schedule");
  MinimaxResult res;
  res.closed_form_bits = closed_form_capacity(cfg.tau, E, P);
  res.cutoff = cfg.cutoff > 0 ? cfg.cutoff : capacity_cutoff(cfg.tau, E, P, cfg.tail_tolerance);
  SearchConfig inner_cfg = cfg;
  inner_cfg.cutoff = res.cutoff;
  res.value_bits = -1.0;
  double previous_level = std::numeric_limits<double>::quiet_NaN();
  for (const double eps : cfg.spacings) {
    const GridSpec grid = GridSpec::from_spacing(eps);
    for (const double frac : cfg.energy_fractions) {
      if (!(frac >= 0.0 && frac <= 1.0)) throw DomainError("energy fractions must lie in [0, 1]");
      GridConstellation gc = fit_grid_constellation(frac * E, grid);
      gc.constellation.check_budget(E);
      InnerResult inner = inner_min_jammer(gc.constellation, families, P, inner_cfg);
      res.max_output_deficit = std::max(res.max_output_deficit, inner.max_output_deficit);
      OuterStep step{eps, frac, gc.variance, gc.constellation.size(), gc.constellation.mean_energy(),
                     inner.value_bits, 0.0, inner.jammer.label()};
      if (inner.value_bits > res.value_bits) {
        res.value_bits = inner.value_bits;
        res.jammer = inner.jammer;
        res.inner_trace = std::move(inner.trace);
        res.constellation = std::move(gc);
      }
      step.best = res.value_bits;
      res.outer_trace.push_back(std::move(step));
    }
    if (!std::isnan(previous_level) && std::abs(res.value_bits - previous_level) < cfg.convergence) break;
    previous_level = res.value_bits;
  }
  res.value_bits = std::max(0.0, res.value_bits);
  return res;
}

ContinuityResult continuity_check(const DensityMatrix& rho, const DensityMatrix& sigma, double E) {
  if (!(E > 0.0)) throw DomainError("energy bound must be positive");
  ContinuityResult r;
  r.delta = std::min(1.0, trace_distance(rho, sigma).half);
  r.lhs = std::abs(entropy_bits(rho) - entropy_bits(sigma));
  r.rhs = r.delta > 0.0 ? 2.0 * r.delta * gordon_g(E / r.delta) + binary_entropy(r.delta) : 0.0;
  r.holds = r.lhs <= r.rhs + 1e-12;
  return r;
}

}  // namespace bavc
