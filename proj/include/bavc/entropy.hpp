#pragma once

// Entropic functionals. Every value is in bits.

#include "bavc/beam_splitter.hpp"
#include "bavc/fock.hpp"

namespace bavc {

struct EntropyReport {
  double value_bits = 0.0;
  double eigenvalue_floor = 0.0;  ///< smallest eigenvalue before clipping
  double clipped_mass = 0.0;      ///< total |eigenvalue| clipped to zero
};

/// -tr(rho log2 rho). Eigenvalues in [-1e-10, 0) are clipped; anything more
/// negative raises NegativeEigenvalue.
EntropyReport von_neumann_entropy(const DensityMatrix& rho);
inline double entropy_bits(const DensityMatrix& rho) { return von_neumann_entropy(rho).value_bits; }

/// Clipped spectrum (ascending).
Eigen::VectorXd spectrum(const DensityMatrix& rho);

/// -sum p log2 p over a probability vector, with 0 log 0 = 0.
double shannon_entropy_bits(const Eigen::VectorXd& p);

struct RelativeEntropy {
  double value_bits;  ///< +inf when the support condition fails
  bool support_mismatch;
};

/// D(rho || sigma) = tr rho (log rho - log sigma). sigma-eigenvalues below
/// 1e-13 count as outside its support.
RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Gordon function g(x) = (x+1) log2(x+1) - x log2 x with g(0) = 0.
double gordon_g(double x);
/// Inverse of g on [0, inf): bracketing bisection plus one Newton polish.
double gordon_g_inv(double y);

/// h(p) = -p log2 p - (1-p) log2 (1-p).
double binary_entropy(double p);

struct HolevoBreakdown {
  double chi_bits = 0.0;
  double average_output_entropy = 0.0;
  double conditional_entropy = 0.0;
  double max_output_deficit = 0.0;
};

/// S(sum_i w_i N(a_i)) - sum_i w_i S(N(a_i)) for the jammed channel N.
/// Phase-invariant jammers reuse one output per distinct |a_i|.
HolevoBreakdown holevo_breakdown(const Constellation& c, const JammerSpec& jammer, const ChannelConfig& cfg);
inline double holevo_chi(const Constellation& c, const JammerSpec& jammer, const ChannelConfig& cfg) {
  return holevo_breakdown(c, jammer, cfg).chi_bits;
}

/// L_lambda(X) = g^{-1}(S(X [+]_lambda |0><0|)).
double L_lambda(const DensityMatrix& x, double lambda, PortSign sign = PortSign::Plus);
/// R_lambda(X) = g^{-1}(S(|0><0| [+]_lambda X)).
double R_lambda(const DensityMatrix& x, double lambda, PortSign sign = PortSign::Plus);

}  // namespace bavc
