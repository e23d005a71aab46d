#pragma once

// Entropy-power-type inequalities for the beam splitter: the conjectured
// S(X [+]_l Y) >= g(L_l(X) + R_l(Y)), the photon-number EPnI and the qEPI.

#include "bavc/beam_splitter.hpp"
#include "bavc/fock.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bavc {

enum class StateKind { Vacuum, Thermal, Phav, Dphav, Coherent, Fock, FockMixture, Diagonal };

/// Recipe for a single-mode test state; built at whatever cutoff a scan needs.
struct StateSpec {
  StateKind kind = StateKind::Vacuum;
  double mean_photons = 0.0;          ///< thermal
  double radius = 0.0;                ///< phav, dphav
  Complex center{0.0, 0.0};           ///< dphav, coherent
  Index photons = 0;                  ///< fock
  std::vector<double> probabilities;  ///< fock mixture / random diagonal, level n -> p_n

  static StateSpec vacuum() { return {}; }
  static StateSpec thermal(double N);
  static StateSpec phav(double b);
  static StateSpec dphav(Complex alpha, double b);
  static StateSpec coherent(Complex alpha);
  static StateSpec fock(Index n);
  static StateSpec fock_mixture(std::vector<double> p);

  std::string label() const;
  /// Truncation above `tol` raises TruncationError. Fock mixtures need D > highest level.
  DensityMatrix build(Index D, double tol, Index quadrature = 0) const;
};

enum class GapKind { Conjecture, EpniQuoted, EpniPort, Qepi, QepiPort };
enum class GapStatus { Ok, Artifact, Violation };

const char* to_string(GapKind k);
const char* to_string(GapStatus s);

struct GapRecord {
  GapKind kind = GapKind::Conjecture;
  std::string x_label, y_label;
  double lambda = 0.0;
  double lhs_bits = 0.0;
  double rhs_bits = 0.0;
  double gap = 0.0;
  Index cutoff = 0;
  double deficit_budget = 0.0;  ///< deficits of X, Y and the output combined
  GapStatus status = GapStatus::Ok;
  double confirm_gap = 0.0;  ///< gap at doubled cutoff/quadrature when re-checked
};

/// Which exponential the qEPI uses. Entropies are always in bits.
enum class QepiBase { Two, E };

struct EpiOptions {
  PortSign sign = PortSign::Plus;
  QepiBase qepi_base = QepiBase::Two;
};

/// gap = S(X [+]_l Y) - g(L_l(X) + R_l(Y)).
GapRecord conjecture_gap(const DensityMatrix& x, const DensityMatrix& y, double lambda, const EpiOptions& opt = {});

/// Photon-number EPnI with N = g^{-1} o S. EpniQuoted compares N(out) with
/// tau N(Y) + (1-tau) N(X) as quoted; EpniPort with tau N(X) + (1-tau) N(Y),
/// which matches the port convention (thermal inputs give equality).
GapRecord epni_gap(const DensityMatrix& x, const DensityMatrix& y, double tau, GapKind orientation = GapKind::EpniQuoted,
                   const EpiOptions& opt = {});

/// b^{2 S(out)} versus tau b^{2 S(Y)} + (1-tau) b^{2 S(X)} (Qepi) or with X and
/// Y exchanged on the right (QepiPort); b = 2 or e per options.
GapRecord qepi_gap(const DensityMatrix& x, const DensityMatrix& y, double tau, GapKind orientation = GapKind::Qepi,
                   const EpiOptions& opt = {});

GapRecord evaluate_gap(GapKind kind, const DensityMatrix& x, const DensityMatrix& y, double lambda,
                       const EpiOptions& opt = {});

/// A set of (X, Y) pairs: the Cartesian product of xs and ys, or element-wise when zipped.
struct PairFamily {
  std::string name;
  std::vector<StateSpec> xs, ys;
  bool zipped = false;

  std::size_t size() const { return zipped ? std::min(xs.size(), ys.size()) : xs.size() * ys.size(); }
};

/// `draws` zipped pairs of random diagonal states on `levels` levels (flat Dirichlet).
PairFamily random_diagonal_pairs(std::size_t draws, Index levels, std::uint64_t seed);

struct ScanConfig {
  std::vector<PairFamily> families;
  std::vector<double> lambdas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<GapKind> kinds{GapKind::Conjecture};
  Index cutoff = 20;
  Index quadrature = 0;
  double state_tolerance = 1e-6;
  double violation_threshold = 1e-6;
  EpiOptions options;
};

struct ScanReport {
  std::vector<GapRecord> records;
  double min_gap = 0.0;
  std::size_t argmin = 0;  ///< index into records; meaningless when records is empty
  std::size_t artifacts = 0;
  std::size_t violations = 0;
};

/// Evaluates every (pair, lambda, kind). Records with gap below -threshold are
/// recomputed at doubled cutoff and quadrature; only a gap that stays below
/// -threshold is classified as a violation.
ScanReport scan_families(const ScanConfig& cfg);

}  // namespace bavc
