#include "bavc/entropy.hpp"

#include "bavc/errors.hpp"
#include "bavc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace bavc {

namespace {

constexpr double kInvLn2 = 1.0 / std::numbers::ln2;
constexpr double kSupportTol = 1e-13;

// Ring quadratures centred on the real axis leave only roundoff in the imaginary part.
bool effectively_real(const Eigen::MatrixXcd& m) { return m.imag().cwiseAbs().maxCoeff() <= 1e-15; }

Eigen::VectorXd raw_spectrum(const DensityMatrix& rho) {
  if (rho.is_diagonal()) return rho.diagonal();
  if (effectively_real(rho.entries())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho.entries().real(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

EntropyReport entropy_of_spectrum(const Eigen::VectorXd& ev) {
  EntropyReport rep;
  rep.eigenvalue_floor = ev.minCoeff();
  if (rep.eigenvalue_floor < kEigenvalueFloor) throw NegativeEigenvalue("eigenvalue below the clipping floor");
  double s = 0.0, carry = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const double p = ev(i);
    if (p < 0.0) {
      rep.clipped_mass += -p;
      continue;
    }
    if (p == 0.0) continue;
    const double y = -p * std::log(p) * kInvLn2 - carry;
    const double t = s + y;
    carry = (t - s) - y;
    s = t;
  }
  rep.value_bits = std::max(0.0, s);
  return rep;
}

}  // namespace

EntropyReport von_neumann_entropy(const DensityMatrix& rho) { return entropy_of_spectrum(raw_spectrum(rho)); }

Eigen::VectorXd spectrum(const DensityMatrix& rho) {
  Eigen::VectorXd ev = raw_spectrum(rho);
  if (ev.minCoeff() < kEigenvalueFloor) throw NegativeEigenvalue("eigenvalue below the clipping floor");
  ev = ev.cwiseMax(0.0);
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

double shannon_entropy_bits(const Eigen::VectorXd& p) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) s -= p(i) * std::log2(p(i));
  return s;
}

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative entropy between different cutoffs");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (rho.is_diagonal() && sigma.is_diagonal()) {
    const Eigen::VectorXd p = rho.diagonal(), q = sigma.diagonal();
    double d = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
      if (p(i) <= 0.0) continue;
      if (q(i) < kSupportTol) return {inf, true};
      d += p(i) * (std::log2(p(i)) - std::log2(q(i)));
    }
    return {std::max(0.0, d), false};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(rho.entries());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma.entries());
  // tr rho log rho - sum_{ij} r_i |<u_i|v_j>|^2 log s_j
  const Eigen::MatrixXd overlap = (er.eigenvectors().adjoint() * es.eigenvectors()).cwiseAbs2();
  double d = 0.0;
  for (Index i = 0; i < rho.dim(); ++i) {
    const double r = er.eigenvalues()(i);
    if (r < kEigenvalueFloor) throw NegativeEigenvalue("eigenvalue below the clipping floor");
    if (r <= 0.0) continue;
    d += r * std::log2(r);
    for (Index j = 0; j < sigma.dim(); ++j) {
      const double w = r * overlap(i, j);
      if (w <= 1e-15) continue;
      const double s = es.eigenvalues()(j);
      if (s < kSupportTol) return {inf, true};
      d -= w * std::log2(s);
    }
  }
  return {std::max(0.0, d), false};
}

double gordon_g(double x) {
  if (!(x >= 0.0)) throw DomainError("Gordon function needs x >= 0");
  if (x == 0.0) return 0.0;
  return (std::log1p(x) + x * std::log1p(1.0 / x)) * kInvLn2;
}

double gordon_g_inv(double y) {
  if (!(y >= 0.0)) throw DomainError("inverse Gordon function needs y >= 0");
  if (y == 0.0) return 0.0;
  double lo = 0.0;
  double hi = std::exp2(std::min(y, 1000.0));
  while (gordon_g(hi) < y) hi *= 2.0;
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (gordon_g(mid) < y) lo = mid;
    else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  if (x > 0.0) {
    const double slope = std::log1p(1.0 / x) * kInvLn2;
    const double step = x - (gordon_g(x) - y) / slope;
    if (step >= lo && step <= hi) x = step;
  }
  return x;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary entropy needs p in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// ---------------------------------------------------------------------------
// Holevo quantity

namespace {

HolevoBreakdown holevo_phase_invariant(const Constellation& c, const JammerSpec& jammer, const ChannelConfig& cfg) {
  // N(e^{i t} a) = V_t N(a) V_t^dagger for a phase-invariant jammer, so one
  // output per radius suffices; the average state picks up the phase moments
  // sum_p w_p e^{i (m-n) t_p} of each radius group.
  struct Group {
    double radius = 0.0;
    double weight = 0.0;
    std::vector<std::size_t> members;
  };
  std::map<long long, Group> by_radius;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.weights()[i] == 0.0) continue;
    const double r = std::abs(c.points()[i]);
    auto& g = by_radius[std::llround(r * r * 1e10)];
    g.radius = r;
    g.weight += c.weights()[i];
    g.members.push_back(i);
  }
  std::vector<Group> groups;
  groups.reserve(by_radius.size());
  for (auto& [key, g] : by_radius) groups.push_back(std::move(g));

  const Index D = cfg.out_dim();
  std::vector<Eigen::MatrixXcd> contrib(groups.size());
  std::vector<double> cond(groups.size()), deficit(groups.size());
  parallel_for(groups.size(), [&](std::size_t gi) {
    const Group& g = groups[gi];
    const DensityMatrix out = apply_bs_semiclassical(Complex(g.radius, 0.0), jammer, cfg);
    cond[gi] = entropy_bits(out);
    deficit[gi] = out.trace_deficit();
    std::vector<Complex> moment(static_cast<std::size_t>(2 * D - 1), Complex(0.0, 0.0));
    for (const std::size_t p : g.members) {
      const double theta = std::arg(c.points()[p]);
      const double w = c.weights()[p];
      for (Index d = -(D - 1); d <= D - 1; ++d)
        moment[static_cast<std::size_t>(d + D - 1)] += w * std::polar(1.0, theta * static_cast<double>(d));
    }
    Eigen::MatrixXcd m = out.entries();
    for (Index col = 0; col < D; ++col)
      for (Index row = 0; row < D; ++row) m(row, col) *= moment[static_cast<std::size_t>(row - col + D - 1)];
    contrib[gi] = std::move(m);
  });

  HolevoBreakdown res;
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(D, D);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    avg += contrib[gi];
    res.conditional_entropy += groups[gi].weight * cond[gi];
    res.max_output_deficit = std::max(res.max_output_deficit, deficit[gi]);
  }
  res.average_output_entropy = entropy_bits(renormalized(std::move(avg)));
  res.chi_bits = std::max(0.0, res.average_output_entropy - res.conditional_entropy);
  return res;
}

HolevoBreakdown holevo_general(const Constellation& c, const JammerSpec& jammer, const ChannelConfig& cfg) {
  const Index D = cfg.out_dim();
  std::vector<Eigen::MatrixXcd> outs(c.size());
  std::vector<double> cond(c.size()), deficit(c.size());
  parallel_for(c.size(), [&](std::size_t i) {
    const DensityMatrix out = apply_bs_semiclassical(c.points()[i], jammer, cfg);
    cond[i] = entropy_bits(out);
    deficit[i] = out.trace_deficit();
    outs[i] = c.weights()[i] * out.entries();
  });
  HolevoBreakdown res;
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(D, D);
  for (std::size_t i = 0; i < c.size(); ++i) {
    avg += outs[i];
    res.conditional_entropy += c.weights()[i] * cond[i];
    res.max_output_deficit = std::max(res.max_output_deficit, deficit[i]);
  }
  res.average_output_entropy = entropy_bits(renormalized(std::move(avg)));
  res.chi_bits = std::max(0.0, res.average_output_entropy - res.conditional_entropy);
  return res;
}

}  // namespace

HolevoBreakdown holevo_breakdown(const Constellation& c, const JammerSpec& jammer, const ChannelConfig& cfg) {
  cfg.validate();
  if (jammer.phase_invariant()) return holevo_phase_invariant(c, jammer, cfg);
  return holevo_general(c, jammer, cfg);
}

double L_lambda(const DensityMatrix& x, double lambda, PortSign sign) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  ChannelConfig cfg{.tau = lambda, .input_cutoff = x.dim(), .sign = sign};
  return gordon_g_inv(entropy_bits(apply_bs(x, make_vacuum(x.dim()), cfg)));
}

double R_lambda(const DensityMatrix& x, double lambda, PortSign sign) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  ChannelConfig cfg{.tau = lambda, .input_cutoff = x.dim(), .sign = sign};
  return gordon_g_inv(entropy_bits(apply_bs(make_vacuum(x.dim()), x, cfg)));
}

}  // namespace bavc
