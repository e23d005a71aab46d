#pragma once

// Desk-scale checks of the lemmas behind the coding theorem: local-to-global
// trace bounds, permutation averaging, effective dimension of PHAV states,
// type concentration, type-class flattening and the gentle operator step.

#include "bavc/fock.hpp"

#include <cstdint>
#include <vector>

namespace bavc {

// ---------------------------------------------------------------------------
// Types

struct TypeClass {
  int alphabet = 0;          ///< d
  int length = 0;            ///< k
  std::vector<int> counts;   ///< m_i, summing to k
  std::uint64_t size = 0;    ///< |T_m| = k! / prod m_i!

  static TypeClass from_counts(std::vector<int> counts);
  double empirical(int i) const { return static_cast<double>(counts[static_cast<std::size_t>(i)]) / length; }
  /// Shannon entropy of the empirical distribution, bits.
  double entropy_bits() const;
};

/// Exact multinomial k! / prod m_i!; throws InvalidArgument on 64-bit overflow.
std::uint64_t multinomial(const std::vector<int>& counts);

/// All types of length k over d letters, in lexicographic order of counts.
std::vector<TypeClass> enumerate_types(int alphabet, int length);

// ---------------------------------------------------------------------------
// Lemma 1: min_i tr Q rho_i >= 1 - eps implies tr Q^{(x)k} rho >= 1 - k eps

struct Lemma1Result {
  double epsilon = 0.0;            ///< 1 - min_i tr Q (tr_{!=i} rho)
  std::vector<double> chain;       ///< tr (Q^{(x)i} (x) 1) rho for i = 1..k
  bool chain_holds = false;        ///< chain[i-1] >= 1 - i eps for every i
  bool passed = false;             ///< chain[k-1] >= 1 - k eps
};

/// rho acts on (C^d)^{(x)k} with d = Q.rows(); requires d^k <= 4096.
Lemma1Result lemma1_check(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& Q, int k);

/// Single-site marginal tr_{!=site} rho of a k-fold state on (C^d)^{(x)k}.
Eigen::MatrixXcd single_site_marginal(const Eigen::MatrixXcd& rho, int d, int k, int site);

// ---------------------------------------------------------------------------
// Lemma 2: marginals of the permutation average

struct SymmetrizeResult {
  double marginal_error = 0.0;  ///< max_i || marginal_i - mean of factors ||_max
  double energy_error = 0.0;    ///< | total energy of average - total energy of product |
  double marginal_energy = 0.0;
  bool within_budget = false;   ///< marginal energy <= P
  bool passed = false;
};

/// Factors must be diagonal with a shared cutoff; k <= 6.
SymmetrizeResult symmetrize_marginal_check(const std::vector<DensityMatrix>& factors, double P);

// ---------------------------------------------------------------------------
// Lemma 3: effective dimension of PHAV mixtures

struct Lemma3Result {
  Index N = 0;
  double log_tail = 0.0;       ///< ln(1 - tr P_N rho), P_N projecting onto |0>..|N-1>
  bool pure_applicable = false;  ///< single PHAV radius b with N >= 22 max{2, b^2}
  bool pure_holds = true;      ///< tail <= 4^{-N} when applicable
  double K = 0.0;              ///< sub-Gaussian constant used in the mixed bound
  bool subgaussian_ok = false;
  double log_mixed_bound = 0.0;  ///< ln 2^{2 - N min{2, log2(e) / (22 K^2)}}
  bool mixed_applicable = false; ///< N >= 22 max{2, |alpha|^2} and the tail check passes with K
  bool mixed_holds = true;
  bool passed = false;
};

/// ln of the probability mass at photon numbers >= N for a semi-classical jammer.
double log_jammer_tail(const JammerSpec& jammer, Index N, Index quadrature = 256);

/// K <= 0 selects the jammer's own minimal constant sqrt(K1).
Lemma3Result lemma3_tail_check(const JammerSpec& jammer, Index N, double K = 0.0);

// ---------------------------------------------------------------------------
// Lemma 4: concentration of types under the permutation-averaged product

struct Lemma4Result {
  std::size_t trials = 0;
  std::size_t deviations = 0;     ///< samples with ||type - pbar||_1 > eps
  double empirical_tail = 0.0;
  double standard_error = 0.0;
  double bound_c2 = 0.0;          ///< 2 (2k)^d exp(-eps^2 k)
  double bound_c2d = 0.0;         ///< 2d (2k)^d exp(-eps^2 k)
  bool vacuous = false;           ///< bound_c2 >= 1
  bool passed = false;            ///< empirical tail <= bound_c2
};

/// dists[i] is p_i on [d]; k = dists.size().
Lemma4Result lemma4_concentration_check(const std::vector<std::vector<double>>& dists, double eps,
                                        std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Lemma 5: |T_m|^{-1} 1_{T_m} <= (2k)^d m^{(x)k}

struct Lemma5Result {
  std::size_t types = 0;
  std::size_t sequences = 0;
  bool cardinalities_match = false;  ///< enumerated counts equal the multinomials
  bool bound_holds = false;          ///< exact integer comparison for every sequence
  bool size_bounds_hold = false;     ///< (1+k)^{-d} 2^{kH} <= |T| <= 2^{kH}
  bool passed = false;
};

/// Exact check for one type: k^k <= (2k)^d |T| prod m_i^{m_i}.
bool lemma5_type_bound(const TypeClass& t);
/// Both bounds of the type-size sandwich, in floating point with 1e-12 slack.
bool type_size_bounds(const TypeClass& t);

/// Enumerates all d^k sequences (requires d^k <= 1e6).
Lemma5Result lemma5_exhaustive(int alphabet, int length);

// ---------------------------------------------------------------------------
// Gentle operator lemma

struct GentleResult {
  double lhs = 0.0;  ///< ||P rho P - rho||_1
  double rhs = 0.0;  ///< 2 sqrt(tr (1 - P) rho)
  bool passed = false;
};

GentleResult gentle_operator_check(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& P);

}  // namespace bavc
