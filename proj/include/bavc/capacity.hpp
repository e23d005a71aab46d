#pragma once

// Discretized sup-inf of the Holevo quantity over Gaussian grid inputs and
// semi-classical jammers, plus the closed-form capacity it should approach.

#include "bavc/beam_splitter.hpp"
#include "bavc/fock.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bavc {

/// g(tau E + (1 - tau) P) - g((1 - tau) P) in bits.
double closed_form_capacity(double tau, double E, double P);

/// Square grid of spacing eps, centred at 0, keeping points with |c|^2 <= energy_cap.
struct GridSpec {
  double spacing = 0.25;
  double energy_cap = 4.0;  ///< E''

  /// The coupling E'' = 1 / eps.
  static GridSpec from_spacing(double eps) { return {eps, 1.0 / eps}; }
  std::vector<Complex> points() const;
};

struct GridConstellation {
  Constellation constellation;
  GridSpec grid;
  double variance = 0.0;  ///< E' of the Gaussian that was binned
  double kappa = 1.0;     ///< Gaussian mass captured by the kept boxes
};

/// Weights mu(box_c) / kappa for a centred complex Gaussian with E|a|^2 = variance.
/// variance = 0 gives the point mass at the origin.
GridConstellation build_grid_constellation(double variance, const GridSpec& grid);

/// Largest variance whose binned constellation has mean energy <= E (bisection).
GridConstellation fit_grid_constellation(double E, const GridSpec& grid);

enum class JammerFamily { Vacuum, Thermal, Phav, PhavMixture2, Dphav };
const char* to_string(JammerFamily f);

struct SearchConfig {
  double tau = 0.5;
  Index cutoff = 0;  ///< output cutoff; 0 picks the thermal-tail rule
  Index quadrature = 0;
  PortSign sign = PortSign::Plus;
  int golden_iterations = 25;
  int phav_grid = 8;
  int simplex_iterations = 40;
  std::vector<double> spacings{1.0, 0.5, 0.25, 0.125};
  std::vector<double> energy_fractions{1.0};
  double convergence = 1e-4;
  double tail_tolerance = 1e-10;
};

/// Smallest cutoff whose thermal tail at tau E + (1 - tau) P is below tol.
Index capacity_cutoff(double tau, double E, double P, double tol = 1e-10);

struct InnerStep {
  std::string jammer;
  double chi = 0.0;
  double best = 0.0;  ///< running minimum
};

struct InnerResult {
  double value_bits = 0.0;
  JammerSpec jammer = JammerSpec::vacuum();
  std::vector<InnerStep> trace;
  double max_output_deficit = 0.0;
};

/// Derivative-free search for the jammer minimizing chi within the families,
/// each candidate constrained to mean energy <= P. Thermal: golden section in
/// N'. PHAV: grid plus golden section in b. Two-point PHAV mixtures and DPHAV:
/// Nelder-Mead over a box parametrization. Equal values prefer lower energy.
InnerResult inner_min_jammer(const Constellation& c, const std::vector<JammerFamily>& families, double P,
                             const SearchConfig& cfg);

struct OuterStep {
  double spacing = 0.0;
  double energy_fraction = 0.0;
  double variance = 0.0;
  std::size_t points = 0;
  double mean_energy = 0.0;
  double value = 0.0;
  double best = 0.0;  ///< running maximum
  std::string jammer;
};

struct MinimaxResult {
  double value_bits = 0.0;
  std::optional<GridConstellation> constellation;
  JammerSpec jammer = JammerSpec::vacuum();
  std::vector<OuterStep> outer_trace;
  std::vector<InnerStep> inner_trace;  ///< inner search of the winning input
  double closed_form_bits = 0.0;
  double max_output_deficit = 0.0;
  Index cutoff = 0;
};

/// Refines the grid over cfg.spacings, trying each energy fraction of E,
/// and stops once the best value moves by less than cfg.convergence.
MinimaxResult outer_max_input(const std::vector<JammerFamily>& families, double E, double P, const SearchConfig& cfg);

struct ContinuityResult {
  bool holds = false;
  double delta = 0.0;  ///< half trace distance
  double lhs = 0.0;    ///< |S(rho) - S(sigma)|
  double rhs = 0.0;    ///< 2 delta g(E / delta) + h(delta)
};

/// Energy-constrained continuity of entropy for the number operator.
ContinuityResult continuity_check(const DensityMatrix& rho, const DensityMatrix& sigma, double E);

}  // namespace bavc
