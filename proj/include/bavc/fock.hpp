#pragma once

// Single-mode states in a truncated Fock basis |0>, ..., |D-1>.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bavc {

using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double kDefaultTruncationTol = 1e-8;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kTraceTol = 1e-9;

/// Hermitian, positive, unit-trace matrix on span{|0>, ..., |D-1>}.
///
/// Entries are stored renormalized to unit trace; `trace_deficit()` is the
/// probability weight that the cutoff removed before renormalization, kept as
/// an auditable error budget.
class DensityMatrix {
 public:
  /// Checks Hermiticity (1e-12) and unit trace (1e-9), then stores the exact
  /// Hermitian part. Positivity is checked lazily by `check_invariants()` and
  /// by every spectral routine.
  explicit DensityMatrix(Eigen::MatrixXcd entries, double trace_deficit = 0.0);

  static DensityMatrix from_diagonal(const Eigen::VectorXd& diag, double trace_deficit = 0.0);

  Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  double trace_deficit() const { return trace_deficit_; }
  bool is_diagonal() const { return diagonal_; }
  Eigen::VectorXd diagonal() const { return entries_.diagonal().real(); }

  /// Zero-padded copy on a larger cutoff (or the same state if new_dim == dim).
  DensityMatrix embedded(Index new_dim) const;

  /// Full invariant check including the eigenvalue floor. Throws on failure.
  void check_invariants() const;

 private:
  struct Trusted {};
  DensityMatrix(Trusted, Eigen::MatrixXcd entries, double trace_deficit, bool diagonal);
  friend DensityMatrix renormalized(Eigen::MatrixXcd, double);

  Eigen::MatrixXcd entries_;
  double trace_deficit_ = 0.0;
  bool diagonal_ = false;
};

/// Builds a state from an unnormalized positive matrix whose trace is the kept
/// mass. The missing mass is folded into the deficit together with
/// `prior_deficit` (weight already lost upstream).
DensityMatrix renormalized(Eigen::MatrixXcd unnormalized, double prior_deficit = 0.0);

/// Finite weighted set of coherent amplitudes (a discretized input measure).
class Constellation {
 public:
  Constellation(std::vector<Complex> points, std::vector<double> weights);

  const std::vector<Complex>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  double mean_energy() const { return mean_energy_; }

  /// Throws DomainError if the mean energy exceeds `budget` (plus 1e-12).
  void check_budget(double budget) const;

  static Constellation point_mass(Complex alpha);

 private:
  std::vector<Complex> points_;
  std::vector<double> weights_;
  double mean_energy_ = 0.0;
};

struct ThermalJammer {
  double mean_photons;
};
struct PhavJammer {
  double radius;
};
struct PhavComponent {
  double radius;
  double weight;
};
struct PhavMixtureJammer {
  std::vector<PhavComponent> components;
};
struct DphavJammer {
  Complex center;
  double radius;
};

/// Semi-classical jammer state: a probability measure over coherent states.
class JammerSpec {
 public:
  using Kind = std::variant<ThermalJammer, PhavJammer, PhavMixtureJammer, DphavJammer>;

  static JammerSpec vacuum() { return thermal(0.0); }
  static JammerSpec thermal(double mean_photons);
  static JammerSpec phav(double radius);
  static JammerSpec phav_mixture(std::vector<PhavComponent> components);
  static JammerSpec dphav(Complex center, double radius);
  static JammerSpec coherent(Complex alpha) { return dphav(alpha, 0.0); }

  const Kind& kind() const { return kind_; }
  double mean_energy() const { return mean_energy_; }
  /// Smallest K1 with P(|beta| >= t) <= 2 exp(-t^2 / K1) for the mixing measure.
  double subgaussian_K() const { return subgaussian_K_; }

  /// True when the state commutes with every phase rotation.
  bool phase_invariant() const;
  std::string label() const;

  /// Tail P(|beta| >= t) of the P-representation mixing measure.
  double mixing_tail(double t) const;

  /// The jammer's density matrix at cutoff D.
  DensityMatrix state(Index D, double tol = kDefaultTruncationTol) const;

 private:
  explicit JammerSpec(Kind kind);
  Kind kind_;
  double mean_energy_ = 0.0;
  double subgaussian_K_ = 0.0;
};

/// Photon-number amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < D (not renormalized).
Eigen::VectorXcd coherent_amplitudes(Complex alpha, Index D);

DensityMatrix make_vacuum(Index D);
DensityMatrix make_fock(Index n, Index D);
DensityMatrix make_coherent(Complex alpha, Index D, double tol = kDefaultTruncationTol);
DensityMatrix make_thermal(double mean_photons, Index D, double tol = kDefaultTruncationTol);
DensityMatrix make_phav(double radius, Index D, double tol = kDefaultTruncationTol);
/// Uniform `quadrature`-point phase average of |alpha + e^{i phi} b>. quadrature = 0 selects 4D.
DensityMatrix make_dphav(Complex alpha, double radius, Index D, Index quadrature = 0,
                         double tol = kDefaultTruncationTol);

/// Convex combination sum_i w_i rho_i; weights must be non-negative and sum to 1.
DensityMatrix mixture(std::span<const double> weights, std::span<const DensityMatrix> states);

/// V_theta rho V_theta^dagger with V_theta = exp(i theta N).
DensityMatrix phase_rotate(const DensityMatrix& rho, double theta);

/// tr(rho N).
double energy(const DensityMatrix& rho);

struct TraceDistance {
  double raw;   ///< ||rho - sigma||_1, in [0, 2]
  double half;  ///< 0.5 ||rho - sigma||_1
};
TraceDistance trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// ||A||_1 for a Hermitian matrix.
double trace_norm_hermitian(const Eigen::MatrixXcd& a);

struct SubgaussianCheck {
  bool passed;
  double worst_t;       ///< scan point with the largest tail - bound
  double worst_excess;  ///< tail - bound at worst_t (<= 0 when passed)
};

/// Checks P(|X| >= t) <= 2 exp(-t^2 / K^2) for the weighted samples on a scan
/// grid that includes every sample magnitude.
SubgaussianCheck check_subgaussian(std::span<const Complex> points, std::span<const double> weights,
                                   double K);
/// Same check against a jammer's analytic mixing tail.
SubgaussianCheck check_subgaussian(const JammerSpec& jammer, double K);

/// Smallest K1 = K^2 for which the weighted samples pass the tail check.
double minimal_subgaussian_K1(std::span<const Complex> points, std::span<const double> weights);

/// log of the Poisson pmf e^{-m} m^n / n!.
double log_poisson_pmf(double mean, Index n);
/// log of sum_{n >= N} Poisson(mean)(n), evaluated in log space with compensated summation.
double log_poisson_upper_tail(double mean, Index N);

/// Smallest D with Poisson(mean) mass at n >= D below tol.
Index choose_cutoff_poisson(double mean, double tol);
/// Smallest D with thermal tail (N/(N+1))^D below tol.
Index choose_cutoff_thermal(double mean_photons, double tol);

}  // namespace bavc
