#include "bavc/fock.hpp"

#include "bavc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace bavc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_cutoff(Index D) {
  if (D < 1) throw InvalidArgument("cutoff must be at least 1");
}

void check_deficit(double deficit, double tol, const char* what) {
  if (deficit > tol) {
    std::ostringstream msg;
    msg << what << ": truncation deficit " << deficit << " exceeds tolerance " << tol;
    throw TruncationError(msg.str());
  }
}

bool off_diagonal_zero(const Eigen::MatrixXcd& m) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != Complex(0.0, 0.0)) return false;
  return true;
}

// Kahan-compensated accumulator.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries, double trace_deficit) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw DimensionMismatch("density matrix must be square and non-empty");
  const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol) {
    std::ostringstream msg;
    msg << "matrix is not Hermitian (max deviation " << asym << ")";
    throw InvalidArgument(msg.str());
  }
  const double tr = entries.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream msg;
    msg << "trace " << tr << " differs from 1";
    throw InvalidArgument(msg.str());
  }
  if (!(trace_deficit >= 0.0 && trace_deficit <= 1.0))
    throw InvalidArgument("trace deficit must lie in [0, 1]");
  entries_ = 0.5 * (entries + entries.adjoint());
  trace_deficit_ = trace_deficit;
  diagonal_ = off_diagonal_zero(entries_);
}

DensityMatrix::DensityMatrix(Trusted, Eigen::MatrixXcd entries, double trace_deficit, bool diagonal)
    : entries_(std::move(entries)), trace_deficit_(trace_deficit), diagonal_(diagonal) {}

DensityMatrix DensityMatrix::from_diagonal(const Eigen::VectorXd& diag, double trace_deficit) {
  if (diag.size() < 1) throw DimensionMismatch("empty diagonal");
  if ((diag.array() < kEigenvalueFloor).any())
    throw NegativeEigenvalue("diagonal state has a negative entry");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(diag.size(), diag.size());
  m.diagonal() = diag.cast<Complex>();
  if (std::abs(diag.sum() - 1.0) > kTraceTol) throw InvalidArgument("diagonal does not sum to 1");
  return DensityMatrix(Trusted{}, std::move(m), trace_deficit, true);
}

DensityMatrix DensityMatrix::embedded(Index new_dim) const {
  if (new_dim < dim()) throw DimensionMismatch("embedding must not shrink the cutoff");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(new_dim, new_dim);
  m.topLeftCorner(dim(), dim()) = entries_;
  return DensityMatrix(Trusted{}, std::move(m), trace_deficit_, diagonal_);
}

void DensityMatrix::check_invariants() const {
  const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol) throw InvalidArgument("state lost Hermiticity");
  if (std::abs(entries_.trace().real() - 1.0) > kTraceTol) throw InvalidArgument("state lost unit trace");
  if (!(trace_deficit_ >= 0.0 && trace_deficit_ <= 1.0)) throw InvalidArgument("bad trace deficit");
  double floor = 0.0;
  if (diagonal_) {
    floor = entries_.diagonal().real().minCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
    floor = es.eigenvalues().minCoeff();
  }
  if (floor < kEigenvalueFloor) {
    std::ostringstream msg;
    msg << "state has eigenvalue " << floor;
    throw NegativeEigenvalue(msg.str());
  }
}

DensityMatrix renormalized(Eigen::MatrixXcd unnormalized, double prior_deficit) {
  const double kept = unnormalized.trace().real();
  if (!(kept > 0.0)) throw TruncationError("no probability mass left inside the cutoff");
  const bool diag = off_diagonal_zero(unnormalized);
  unnormalized /= kept;
  unnormalized = 0.5 * (unnormalized + unnormalized.adjoint()).eval();
  const double deficit = std::clamp(1.0 - (1.0 - prior_deficit) * kept, 0.0, 1.0);
  return DensityMatrix(DensityMatrix::Trusted{}, std::move(unnormalized), deficit, diag);
}

// ---------------------------------------------------------------------------
// Constellation

Constellation::Constellation(std::vector<Complex> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty() || points_.size() != weights_.size())
    throw InvalidArgument("constellation needs matching, non-empty points and weights");
  KahanSum total, en;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(weights_[i] >= 0.0)) throw InvalidArgument("constellation weights must be non-negative");
    total.add(weights_[i]);
    en.add(weights_[i] * std::norm(points_[i]));
  }
  if (std::abs(total.sum - 1.0) > 1e-12) throw InvalidArgument("constellation weights must sum to 1");
  mean_energy_ = en.sum;
}

void Constellation::check_budget(double budget) const {
  if (mean_energy_ > budget + 1e-12) {
    std::ostringstream msg;
    msg << "constellation mean energy " << mean_energy_ << " exceeds budget " << budget;
    throw DomainError(msg.str());
  }
}

Constellation Constellation::point_mass(Complex alpha) { return Constellation({alpha}, {1.0}); }

// ---------------------------------------------------------------------------
// JammerSpec

namespace {

struct EnergyVisitor {
  double operator()(const ThermalJammer& j) const { return j.mean_photons; }
  double operator()(const PhavJammer& j) const { return j.radius * j.radius; }
  double operator()(const PhavMixtureJammer& j) const {
    double e = 0.0;
    for (const auto& c : j.components) e += c.weight * c.radius * c.radius;
    return e;
  }
  double operator()(const DphavJammer& j) const { return std::norm(j.center) + j.radius * j.radius; }
};

// Fraction of the phase circle on which |a + e^{i phi} b| >= t.
double ring_tail(Complex center, double radius, double t) {
  const double a = std::abs(center);
  if (a == 0.0 || radius == 0.0) return (a + radius >= t) ? 1.0 : 0.0;
  const double c = (t * t - a * a - radius * radius) / (2.0 * a * radius);
  if (c <= -1.0) return 1.0;
  if (c > 1.0) return 0.0;
  return std::acos(c) / std::numbers::pi;
}

}  // namespace

JammerSpec::JammerSpec(Kind kind) : kind_(std::move(kind)) {
  mean_energy_ = std::visit(EnergyVisitor{}, kind_);
  const double ln2 = std::numbers::ln2;
  if (const auto* th = std::get_if<ThermalJammer>(&kind_)) {
    subgaussian_K_ = th->mean_photons;
  } else if (const auto* ph = std::get_if<PhavJammer>(&kind_)) {
    subgaussian_K_ = ph->radius * ph->radius / ln2;
  } else if (const auto* mx = std::get_if<PhavMixtureJammer>(&kind_)) {
    std::vector<Complex> pts;
    std::vector<double> w;
    for (const auto& c : mx->components) {
      pts.emplace_back(c.radius, 0.0);
      w.push_back(c.weight);
    }
    subgaussian_K_ = minimal_subgaussian_K1(pts, w);
  } else {
    const auto& dp = std::get<DphavJammer>(kind_);
    const double lo = std::abs(std::abs(dp.center) - dp.radius);
    const double hi = std::abs(dp.center) + dp.radius;
    double best = lo * lo / ln2;
    constexpr int kScan = 2000;
    for (int i = 1; i < kScan; ++i) {
      const double t = lo + (hi - lo) * i / kScan;
      const double tail = ring_tail(dp.center, dp.radius, t);
      if (tail > 0.0) best = std::max(best, t * t / std::log(2.0 / tail));
    }
    subgaussian_K_ = best;
  }
  // Tiny slack so that the boundary case passes the tail check in floating point.
  subgaussian_K_ *= 1.0 + 1e-9;
}

JammerSpec JammerSpec::thermal(double mean_photons) {
  if (!(mean_photons >= 0.0)) throw DomainError("thermal mean photon number must be >= 0");
  return JammerSpec(ThermalJammer{mean_photons});
}

JammerSpec JammerSpec::phav(double radius) {
  if (!(radius >= 0.0)) throw DomainError("PHAV radius must be >= 0");
  return JammerSpec(PhavJammer{radius});
}

JammerSpec JammerSpec::phav_mixture(std::vector<PhavComponent> components) {
  if (components.empty()) throw InvalidArgument("PHAV mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.radius >= 0.0) || !(c.weight >= 0.0)) throw DomainError("bad PHAV mixture component");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("PHAV mixture weights must sum to 1");
  return JammerSpec(PhavMixtureJammer{std::move(components)});
}

JammerSpec JammerSpec::dphav(Complex center, double radius) {
  if (!(radius >= 0.0)) throw DomainError("DPHAV radius must be >= 0");
  return JammerSpec(DphavJammer{center, radius});
}

bool JammerSpec::phase_invariant() const {
  if (const auto* dp = std::get_if<DphavJammer>(&kind_)) return dp->center == Complex(0.0, 0.0);
  return true;
}

std::string JammerSpec::label() const {
  std::ostringstream out;
  out.precision(17);
  if (const auto* th = std::get_if<ThermalJammer>(&kind_)) {
    out << "thermal(" << th->mean_photons << ")";
  } else if (const auto* ph = std::get_if<PhavJammer>(&kind_)) {
    out << "phav(" << ph->radius << ")";
  } else if (const auto* mx = std::get_if<PhavMixtureJammer>(&kind_)) {
    out << "phav_mixture(";
    for (std::size_t i = 0; i < mx->components.size(); ++i) {
      if (i) out << ";";
      out << mx->components[i].radius << ":" << mx->components[i].weight;
    }
    out << ")";
  } else {
    const auto& dp = std::get<DphavJammer>(kind_);
    out << "dphav(" << dp.center.real() << "+" << dp.center.imag() << "i," << dp.radius << ")";
  }
  return out.str();
}

double JammerSpec::mixing_tail(double t) const {
  if (t <= 0.0) return 1.0;
  if (const auto* th = std::get_if<ThermalJammer>(&kind_)) {
    if (th->mean_photons == 0.0) return 0.0;
    return std::exp(-t * t / th->mean_photons);
  }
  if (const auto* ph = std::get_if<PhavJammer>(&kind_)) return ph->radius >= t ? 1.0 : 0.0;
  if (const auto* mx = std::get_if<PhavMixtureJammer>(&kind_)) {
    double tail = 0.0;
    for (const auto& c : mx->components)
      if (c.radius >= t) tail += c.weight;
    return tail;
  }
  const auto& dp = std::get<DphavJammer>(kind_);
  return ring_tail(dp.center, dp.radius, t);
}

DensityMatrix JammerSpec::state(Index D, double tol) const {
  if (const auto* th = std::get_if<ThermalJammer>(&kind_)) return make_thermal(th->mean_photons, D, tol);
  if (const auto* ph = std::get_if<PhavJammer>(&kind_)) return make_phav(ph->radius, D, tol);
  if (const auto* mx = std::get_if<PhavMixtureJammer>(&kind_)) {
    std::vector<DensityMatrix> parts;
    std::vector<double> w;
    for (const auto& c : mx->components) {
      parts.push_back(make_phav(c.radius, D, tol));
      w.push_back(c.weight);
    }
    return mixture(w, parts);
  }
  const auto& dp = std::get<DphavJammer>(kind_);
  return make_dphav(dp.center, dp.radius, D, 0, tol);
}

// ---------------------------------------------------------------------------
// Constructors

Eigen::VectorXcd coherent_amplitudes(Complex alpha, Index D) {
  require_cutoff(D);
  Eigen::VectorXcd c(D);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (Index n = 1; n < D; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

DensityMatrix make_vacuum(Index D) { return make_fock(0, D); }

DensityMatrix make_fock(Index n, Index D) {
  require_cutoff(D);
  if (n < 0 || n >= D) throw InvalidArgument("Fock index outside the cutoff");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(D);
  diag(n) = 1.0;
  return DensityMatrix::from_diagonal(diag);
}

DensityMatrix make_coherent(Complex alpha, Index D, double tol) {
  require_cutoff(D);
  const double deficit = std::exp(log_poisson_upper_tail(std::norm(alpha), D));
  check_deficit(deficit, tol, "coherent state");
  const Eigen::VectorXcd c = coherent_amplitudes(alpha, D);
  Eigen::MatrixXcd m = c * c.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint()).eval();
  DensityMatrix rho(std::move(m), deficit);
  return rho;
}

DensityMatrix make_thermal(double mean_photons, Index D, double tol) {
  require_cutoff(D);
  if (!(mean_photons >= 0.0)) throw DomainError("thermal mean photon number must be >= 0");
  if (mean_photons == 0.0) return make_vacuum(D);
  const double x = mean_photons / (mean_photons + 1.0);
  const double deficit = std::exp(static_cast<double>(D) * std::log(x));
  check_deficit(deficit, tol, "thermal state");
  Eigen::VectorXd diag(D);
  double p = 1.0 / (mean_photons + 1.0);
  for (Index n = 0; n < D; ++n) {
    diag(n) = p;
    p *= x;
  }
  diag /= diag.sum();
  return DensityMatrix::from_diagonal(diag, deficit);
}

DensityMatrix make_phav(double radius, Index D, double tol) {
  require_cutoff(D);
  if (!(radius >= 0.0)) throw DomainError("PHAV radius must be >= 0");
  const double mean = radius * radius;
  const double deficit = std::exp(log_poisson_upper_tail(mean, D));
  check_deficit(deficit, tol, "PHAV state");
  Eigen::VectorXd diag(D);
  for (Index n = 0; n < D; ++n) diag(n) = std::exp(log_poisson_pmf(mean, n));
  diag /= diag.sum();
  return DensityMatrix::from_diagonal(diag, deficit);
}

DensityMatrix make_dphav(Complex alpha, double radius, Index D, Index quadrature, double tol) {
  require_cutoff(D);
  if (!(radius >= 0.0)) throw DomainError("DPHAV radius must be >= 0");
  if (radius == 0.0) return make_coherent(alpha, D, tol);
  const Index M = quadrature == 0 ? 4 * D : quadrature;
  if (M < 2 * D) throw InvalidArgument("DPHAV quadrature needs at least 2D phase points");
  Eigen::MatrixXcd amps(D, M);
  for (Index k = 0; k < M; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    amps.col(k) = coherent_amplitudes(alpha + std::polar(radius, phi), D);
  }
  Eigen::MatrixXcd m = amps * amps.adjoint() / static_cast<double>(M);
  DensityMatrix rho = renormalized(std::move(m));
  check_deficit(rho.trace_deficit(), tol, "DPHAV state");
  return rho;
}

DensityMatrix mixture(std::span<const double> weights, std::span<const DensityMatrix> states) {
  if (weights.size() != states.size() || states.empty())
    throw InvalidArgument("mixture needs matching, non-empty weights and states");
  const Index D = states.front().dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(D, D);
  double deficit = 0.0, total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].dim() != D) throw DimensionMismatch("mixture of states with different cutoffs");
    if (!(weights[i] >= 0.0)) throw InvalidArgument("mixture weights must be non-negative");
    m += weights[i] * states[i].entries();
    deficit += weights[i] * states[i].trace_deficit();
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mixture weights must sum to 1");
  return DensityMatrix(std::move(m), std::clamp(deficit, 0.0, 1.0));
}

DensityMatrix phase_rotate(const DensityMatrix& rho, double theta) {
  if (rho.is_diagonal()) return rho;
  Eigen::MatrixXcd m = rho.entries();
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) *= std::polar(1.0, theta * static_cast<double>(r - c));
  return DensityMatrix(std::move(m), rho.trace_deficit());
}

double energy(const DensityMatrix& rho) {
  const Eigen::VectorXd d = rho.diagonal();
  KahanSum e;
  for (Index n = 1; n < d.size(); ++n) e.add(static_cast<double>(n) * d(n));
  return e.sum;
}

double trace_norm_hermitian(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

TraceDistance trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("trace distance between different cutoffs");
  double raw = 0.0;
  if (rho.is_diagonal() && sigma.is_diagonal()) {
    raw = (rho.diagonal() - sigma.diagonal()).cwiseAbs().sum();
  } else {
    raw = trace_norm_hermitian(rho.entries() - sigma.entries());
  }
  raw = std::min(raw, 2.0);
  return {raw, 0.5 * raw};
}

// ---------------------------------------------------------------------------
// Sub-Gaussian tails

namespace {

struct TailPoint {
  double magnitude;
  double weight;
};

std::vector<TailPoint> sorted_tail_points(std::span<const Complex> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw InvalidArgument("points and weights differ in length");
  std::vector<TailPoint> pts;
  pts.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pts.push_back({std::abs(points[i]), weights[i]});
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.magnitude > b.magnitude; });
  return pts;
}

}  // namespace

SubgaussianCheck check_subgaussian(std::span<const Complex> points, std::span<const double> weights,
                                   double K) {
  if (!(K > 0.0)) throw DomainError("sub-Gaussian constant must be positive");
  const auto pts = sorted_tail_points(points, weights);
  const double K2 = K * K;
  // The empirical tail is constant between sample magnitudes while the bound
  // decreases, so the worst point of every step is its right end.
  SubgaussianCheck result{true, 0.0, 1.0 - 2.0};
  double tail = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    tail += pts[i].weight;
    if (i + 1 < pts.size() && pts[i + 1].magnitude == pts[i].magnitude) continue;
    const double t = pts[i].magnitude;
    const double excess = tail - 2.0 * std::exp(-t * t / K2);
    if (excess > result.worst_excess) {
      result.worst_excess = excess;
      result.worst_t = t;
    }
  }
  result.passed = result.worst_excess <= 0.0;
  return result;
}

SubgaussianCheck check_subgaussian(const JammerSpec& jammer, double K) {
  if (!(K > 0.0)) throw DomainError("sub-Gaussian constant must be positive");
  const double K2 = K * K;
  std::vector<double> grid;
  const double reach = std::sqrt(std::max({jammer.mean_energy(), K2, 1.0})) * 12.0;
  constexpr int kScan = 4000;
  for (int i = 0; i <= kScan; ++i) grid.push_back(reach * i / kScan);
  if (const auto* ph = std::get_if<PhavJammer>(&jammer.kind())) grid.push_back(ph->radius);
  if (const auto* mx = std::get_if<PhavMixtureJammer>(&jammer.kind()))
    for (const auto& c : mx->components) grid.push_back(c.radius);
  if (const auto* dp = std::get_if<DphavJammer>(&jammer.kind())) {
    grid.push_back(std::abs(std::abs(dp->center) - dp->radius));
    grid.push_back(std::abs(dp->center) + dp->radius);
  }
  SubgaussianCheck result{true, 0.0, -1.0};
  for (const double t : grid) {
    const double excess = jammer.mixing_tail(t) - 2.0 * std::exp(-t * t / K2);
    if (excess > result.worst_excess) {
      result.worst_excess = excess;
      result.worst_t = t;
    }
  }
  result.passed = result.worst_excess <= 0.0;
  return result;
}

double minimal_subgaussian_K1(std::span<const Complex> points, std::span<const double> weights) {
  const auto pts = sorted_tail_points(points, weights);
  double best = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    tail += pts[i].weight;
    if (i + 1 < pts.size() && pts[i + 1].magnitude == pts[i].magnitude) continue;
    const double t = pts[i].magnitude;
    if (tail > 0.0 && t > 0.0) best = std::max(best, t * t / std::log(2.0 / std::min(tail, 1.0)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Poisson tails and cutoff selection

double log_poisson_pmf(double mean, Index n) {
  if (mean == 0.0) return n == 0 ? 0.0 : kNegInf;
  const double dn = static_cast<double>(n);
  return -mean + dn * std::log(mean) - std::lgamma(dn + 1.0);
}

double log_poisson_upper_tail(double mean, Index N) {
  if (N <= 0) return 0.0;
  if (mean == 0.0) return kNegInf;
  if (static_cast<double>(N) > mean) {
    // sum_{j>=0} t_{N+j} = t_N * sum_j prod_{i=1..j} mean / (N + i)
    KahanSum rel;
    double term = 1.0;
    rel.add(term);
    for (Index j = 1; j < 100000; ++j) {
      term *= mean / static_cast<double>(N + j);
      rel.add(term);
      if (term < 1e-18 * rel.sum) break;
    }
    return log_poisson_pmf(mean, N) + std::log(rel.sum);
  }
  KahanSum lower;
  for (Index n = 0; n < N; ++n) lower.add(std::exp(log_poisson_pmf(mean, n)));
  return std::log1p(-std::min(lower.sum, 1.0));
}

Index choose_cutoff_poisson(double mean, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("tolerance must lie in (0, 1)");
  const double log_tol = std::log(tol);
  Index D = 1;
  while (log_poisson_upper_tail(mean, D) >= log_tol) ++D;
  return D;
}

Index choose_cutoff_thermal(double mean_photons, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("tolerance must lie in (0, 1)");
  if (mean_photons <= 0.0) return 1;
  const double lx = std::log(mean_photons / (mean_photons + 1.0));
  Index D = std::max<Index>(1, static_cast<Index>(std::floor(std::log(tol) / lx)));
  while (static_cast<double>(D) * lx >= std::log(tol)) ++D;
  return D;
}

}  // namespace bavc
