#include "bavc/epi.hpp"

#include "bavc/entropy.hpp"
#include "bavc/errors.hpp"
#include "bavc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace bavc {

StateSpec StateSpec::thermal(double N) {
  StateSpec s;
  s.kind = StateKind::Thermal;
  s.mean_photons = N;
  return s;
}

StateSpec StateSpec::phav(double b) {
  StateSpec s;
  s.kind = StateKind::Phav;
  s.radius = b;
  return s;
}

StateSpec StateSpec::dphav(Complex alpha, double b) {
  StateSpec s;
  s.kind = StateKind::Dphav;
  s.center = alpha;
  s.radius = b;
  return s;
}

StateSpec StateSpec::coherent(Complex alpha) {
  StateSpec s;
  s.kind = StateKind::Coherent;
  s.center = alpha;
  return s;
}

StateSpec StateSpec::fock(Index n) {
  StateSpec s;
  s.kind = StateKind::Fock;
  s.photons = n;
  return s;
}

StateSpec StateSpec::fock_mixture(std::vector<double> p) {
  StateSpec s;
  s.kind = StateKind::FockMixture;
  s.probabilities = std::move(p);
  return s;
}

std::string StateSpec::label() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case StateKind::Vacuum: os << "vacuum"; break;
    case StateKind::Thermal: os << "thermal(" << mean_photons << ")"; break;
    case StateKind::Phav: os << "phav(" << radius << ")"; break;
    case StateKind::Dphav: os << "dphav(" << center.real() << "+" << center.imag() << "i;" << radius << ")"; break;
    case StateKind::Coherent: os << "coherent(" << center.real() << "+" << center.imag() << "i)"; break;
    case StateKind::Fock: os << "fock(" << photons << ")"; break;
    case StateKind::FockMixture:
    case StateKind::Diagonal: {
      os << (kind == StateKind::Diagonal ? "diag[" : "fockmix[");
      for (std::size_t i = 0; i < probabilities.size(); ++i) os << (i ? ";" : "") << probabilities[i];
      os << "]";
      break;
    }
  }
  return os.str();
}

DensityMatrix StateSpec::build(Index D, double tol, Index quadrature) const {
  switch (kind) {
    case StateKind::Vacuum: return make_vacuum(D);
    case StateKind::Thermal: return make_thermal(mean_photons, D, tol);
    case StateKind::Phav: return make_phav(radius, D, tol);
    case StateKind::Dphav: return make_dphav(center, radius, D, quadrature, tol);
    case StateKind::Coherent: return make_coherent(center, D, tol);
    case StateKind::Fock:
      if (photons >= D) throw TruncationError("Fock level does not fit the cutoff");
      return make_fock(photons, D);
    case StateKind::FockMixture:
    case StateKind::Diagonal: {
      if (static_cast<Index>(probabilities.size()) > D) throw TruncationError("mixture levels exceed the cutoff");
      Eigen::VectorXd d = Eigen::VectorXd::Zero(D);
      double total = 0.0;
      for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (!(probabilities[i] >= 0.0)) throw InvalidArgument("mixture probabilities must be non-negative");
        d(static_cast<Index>(i)) = probabilities[i];
        total += probabilities[i];
      }
      if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture probabilities must sum to 1");
      return DensityMatrix::from_diagonal(d / total);
    }
  }
  throw InvalidArgument("unknown state kind");
}

const char* to_string(GapKind k) {
  switch (k) {
    case GapKind::Conjecture: return "conjecture";
    case GapKind::EpniQuoted: return "epni";
    case GapKind::EpniPort: return "epni_port";
    case GapKind::Qepi: return "qepi";
    case GapKind::QepiPort: return "qepi_port";
  }
  return "?";
}

const char* to_string(GapStatus s) {
  switch (s) {
    case GapStatus::Ok: return "ok";
    case GapStatus::Artifact: return "artifact";
    case GapStatus::Violation: return "violation";
  }
  return "?";
}

namespace {

DensityMatrix mix_ports(const DensityMatrix& x, const DensityMatrix& y, double lambda, const EpiOptions& opt) {
  if (x.dim() != y.dim()) throw DimensionMismatch("EPI inputs need a shared cutoff");
  return apply_bs(x, y, {.tau = lambda, .input_cutoff = x.dim(), .sign = opt.sign});
}

// The photon-number functional g^{-1}(S(rho)).
double photon_number(const DensityMatrix& rho) { return gordon_g_inv(entropy_bits(rho)); }

GapRecord make_record(GapKind kind, double lambda, double lhs, double rhs, Index cutoff, double budget) {
  GapRecord r;
  r.kind = kind;
  r.lambda = lambda;
  r.lhs_bits = lhs;
  r.rhs_bits = rhs;
  r.gap = lhs - rhs;
  r.cutoff = cutoff;
  r.deficit_budget = budget;
  return r;
}

}  // namespace

GapRecord conjecture_gap(const DensityMatrix& x, const DensityMatrix& y, double lambda, const EpiOptions& opt) {
  const DensityMatrix out = mix_ports(x, y, lambda, opt);
  const double rhs = gordon_g(L_lambda(x, lambda, opt.sign) + R_lambda(y, lambda, opt.sign));
  return make_record(GapKind::Conjecture, lambda, entropy_bits(out), rhs, x.dim(), out.trace_deficit());
}

GapRecord epni_gap(const DensityMatrix& x, const DensityMatrix& y, double tau, GapKind orientation,
                   const EpiOptions& opt) {
  if (orientation != GapKind::EpniQuoted && orientation != GapKind::EpniPort)
    throw InvalidArgument("EPnI orientation must be EpniQuoted or EpniPort");
  const DensityMatrix out = mix_ports(x, y, tau, opt);
  const double nx = photon_number(x), ny = photon_number(y);
  const double rhs = orientation == GapKind::EpniQuoted ? tau * ny + (1.0 - tau) * nx : tau * nx + (1.0 - tau) * ny;
  return make_record(orientation, tau, photon_number(out), rhs, x.dim(), out.trace_deficit());
}

GapRecord qepi_gap(const DensityMatrix& x, const DensityMatrix& y, double tau, GapKind orientation,
                   const EpiOptions& opt) {
  if (orientation != GapKind::Qepi && orientation != GapKind::QepiPort)
    throw InvalidArgument("qEPI orientation must be Qepi or QepiPort");
  const DensityMatrix out = mix_ports(x, y, tau, opt);
  const auto power = [&](double s) { return opt.qepi_base == QepiBase::Two ? std::exp2(2.0 * s) : std::exp(2.0 * s); };
  const double px = power(entropy_bits(x)), py = power(entropy_bits(y));
  const double rhs = orientation == GapKind::Qepi ? tau * py + (1.0 - tau) * px : tau * px + (1.0 - tau) * py;
  return make_record(orientation, tau, power(entropy_bits(out)), rhs, x.dim(), out.trace_deficit());
}

GapRecord evaluate_gap(GapKind kind, const DensityMatrix& x, const DensityMatrix& y, double lambda,
                       const EpiOptions& opt) {
  switch (kind) {
    case GapKind::Conjecture: return conjecture_gap(x, y, lambda, opt);
    case GapKind::EpniQuoted:
    case GapKind::EpniPort: return epni_gap(x, y, lambda, kind, opt);
    case GapKind::Qepi:
    case GapKind::QepiPort: return qepi_gap(x, y, lambda, kind, opt);
  }
  throw InvalidArgument("unknown gap kind");
}

PairFamily random_diagonal_pairs(std::size_t draws, Index levels, std::uint64_t seed) {
  if (levels < 1) throw InvalidArgument("random diagonal states need at least one level");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  const auto draw = [&] {
    StateSpec s;
    s.kind = StateKind::Diagonal;
    s.probabilities.resize(static_cast<std::size_t>(levels));
    double total = 0.0;
    for (auto& p : s.probabilities) total += (p = expo(rng));
    for (auto& p : s.probabilities) p /= total;
    return s;
  };
  PairFamily fam;
  fam.name = "random_diagonal";
  fam.zipped = true;
  for (std::size_t i = 0; i < draws; ++i) {
    fam.xs.push_back(draw());
    fam.ys.push_back(draw());
  }
  return fam;
}

ScanReport scan_families(const ScanConfig& cfg) {
  struct Job {
    const StateSpec* x;
    const StateSpec* y;
    double lambda;
    GapKind kind;
  };
  std::vector<Job> jobs;
  for (const auto& fam : cfg.families) {
    const auto push_pair = [&](const StateSpec& x, const StateSpec& y) {
      for (const double l : cfg.lambdas)
        for (const GapKind k : cfg.kinds) jobs.push_back({&x, &y, l, k});
    };
    if (fam.zipped) {
      for (std::size_t i = 0; i < fam.size(); ++i) push_pair(fam.xs[i], fam.ys[i]);
    } else {
      for (const auto& x : fam.xs)
        for (const auto& y : fam.ys) push_pair(x, y);
    }
  }

  ScanReport rep;
  rep.records.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& j = jobs[i];
    const auto run = [&](Index D, Index quad) {
      return evaluate_gap(j.kind, j.x->build(D, cfg.state_tolerance, quad), j.y->build(D, cfg.state_tolerance, quad),
                          j.lambda, cfg.options);
    };
    GapRecord r = run(cfg.cutoff, cfg.quadrature);
    r.x_label = j.x->label();
    r.y_label = j.y->label();
    r.confirm_gap = r.gap;
    if (r.gap < -cfg.violation_threshold) {
      const GapRecord again = run(2 * cfg.cutoff, 2 * cfg.quadrature);
      r.confirm_gap = again.gap;
      r.status = again.gap < -cfg.violation_threshold ? GapStatus::Violation : GapStatus::Artifact;
    }
    rep.records[i] = std::move(r);
  });

  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const auto& r = rep.records[i];
    if (r.gap < rep.min_gap) {
      rep.min_gap = r.gap;
      rep.argmin = i;
    }
    if (r.status == GapStatus::Artifact) ++rep.artifacts;
    if (r.status == GapStatus::Violation) ++rep.violations;
  }
  if (rep.records.empty()) rep.min_gap = 0.0;
  return rep;
}

}  // namespace bavc
