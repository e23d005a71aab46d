#pragma once

// Short-blocklength codes over the jammed beam splitter: codebook sampling,
// pretty-good-measurement decoding, success probabilities against product
// jammers, and the common-randomness (CR) phase/permutation average.

#include "bavc/beam_splitter.hpp"
#include "bavc/fock.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace bavc {

/// POVM on the k-fold truncated space; the last element is "fail".
struct Povm {
  std::vector<Eigen::MatrixXcd> elements;

  std::size_t outcomes() const { return elements.empty() ? 0 : elements.size() - 1; }
  /// Largest deviation of sum_m D_m from the identity (max-abs entry).
  double completeness_error() const;
  /// Smallest eigenvalue over all elements.
  double min_eigenvalue() const;
};

/// D_m = S^{-1/2} rho_m S^{-1/2} with S = sum_m rho_m (pseudo-inverse on the
/// support); the rest of the identity goes to the fail element.
Povm pgm_decoder(const std::vector<Eigen::MatrixXcd>& outputs);

struct CodingConfig {
  double tau = 0.5;
  Index cutoff = 8;       ///< per-mode output cutoff
  Index quadrature = 0;   ///< phase points for ring mixtures
  PortSign sign = PortSign::Plus;
  double subgaussian_K1 = 0.0;  ///< bound on K1 for coherent products; 0 uses P

  ChannelConfig channel() const;
};

/// One jammer state per channel use.
class JammerStrategy {
 public:
  static JammerStrategy iid(const JammerSpec& spec, Index k);
  static JammerStrategy product(std::vector<JammerSpec> symbols);

  const std::vector<JammerSpec>& symbols() const { return symbols_; }
  Index length() const { return static_cast<Index>(symbols_.size()); }
  double total_energy() const;
  bool coherent_product() const;
  std::string label() const;

 private:
  explicit JammerStrategy(std::vector<JammerSpec> s) : symbols_(std::move(s)) {}
  std::vector<JammerSpec> symbols_;
};

struct StrategyCheck {
  bool admissible = false;
  std::string reason;
};

/// Total energy <= kP, and for coherent products an empirical amplitude
/// distribution passing the tail check with K = sqrt(K1).
StrategyCheck check_strategy(const JammerStrategy& s, double P, double K1);

struct Codebook {
  Index k = 0;
  std::vector<std::vector<Complex>> codewords;
  double energy_budget = 0.0;  ///< per-symbol average (1/k) sum_i |x_i|^2 <= E
  Povm decoder;

  std::size_t size() const { return codewords.size(); }
  /// Throws DomainError if a codeword breaks the per-symbol energy budget.
  void check_energy() const;
};

struct CodebookSpec {
  Index k = 2;
  std::size_t M = 2;
  double E = 1.0;
  Constellation base = Constellation::point_mass(Complex(0.0, 0.0));
  /// Typicality radius on the empirical distribution over base points; infinity disables it.
  double delta = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  std::size_t max_attempts = 100000;  ///< rejection budget per codeword
};

/// i.i.d. draws from the base measure, rejected until the energy and
/// typicality constraints hold. The decoder is left empty.
Codebook draw_codebook(const CodebookSpec& spec);

/// Output of the k uses for one codeword, as a dense D^k x D^k matrix.
Eigen::MatrixXcd codeword_output(const std::vector<Complex>& x, const JammerStrategy& s, const CodingConfig& cfg);

/// PGM tuned to the outputs under a design strategy; M = 1 gets the identity.
void attach_pgm_decoder(Codebook& code, const JammerStrategy& design, const CodingConfig& cfg);

/// (1/M) sum_m tr(D_m N^{(x)k}(x_m, sigma)).
double success_probability(const Codebook& code, const JammerStrategy& s, const CodingConfig& cfg);

enum class StrategyFamily { Vacuum, Thermal, Phav, PerSymbolThermal, CoherentProduct };
const char* to_string(StrategyFamily f);

struct StrategyStep {
  std::string strategy;
  double value = 0.0;  ///< NaN when rejected before evaluation
  double best = 0.0;
  bool rejected = false;
};

struct WorstCase {
  double success = 1.0;  ///< upper bound on the infimum over admissible strategies
  JammerStrategy strategy = JammerStrategy::iid(JammerSpec::vacuum(), 1);
  std::vector<StrategyStep> trace;
  std::size_t rejected = 0;
};

/// Derivative-free search per family: golden section for i.i.d. thermal and
/// PHAV, Nelder-Mead for per-symbol thermal powers and coherent amplitudes.
WorstCase worst_case_jammer(const Codebook& code, const std::vector<StrategyFamily>& families, double P,
                            const CodingConfig& cfg, int iterations = 20);

/// Phase average of a jammer state: a PHAV mixture (DPHAV rings use
/// `quadrature` points).
JammerSpec phase_averaged(const JammerSpec& j, Index quadrature = 64);

struct CrResult {
  double monte_carlo = 0.0;   ///< average over sampled (theta^k, pi)
  double standard_error = 0.0;
  double symmetrized = 0.0;   ///< success against the phase- and permutation-averaged jammer
  std::size_t samples = 0;
};

/// Encoder and decoder are both rotated by V(theta_i) on each use and
/// permuted by pi. support > 0 restricts the CR measure to that many
/// pre-drawn (theta^k, pi) pairs, used uniformly.
CrResult cr_average(const Codebook& code, const JammerStrategy& s, std::size_t samples, std::uint64_t seed,
                    const CodingConfig& cfg, std::size_t support = 0);

/// Optimal success of discriminating two equiprobable pure states with overlap |<a|b>|.
double helstrom_pure(double overlap);
/// (1 + || p rho - (1 - p) sigma ||_1) / 2.
double helstrom(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma, double p = 0.5);

}  // namespace bavc
