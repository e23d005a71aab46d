#pragma once

// Two-mode beam splitter with the transmitter on port 1 and the jammer on
// port 2; the receiver observes output port 1.

#include "bavc/fock.hpp"

#include <filesystem>
#include <memory>
#include <optional>

namespace bavc {

/// Sign with which the jammer amplitude enters the observed output,
/// i.e. coherent inputs (a, b) leave port 1 as sqrt(tau) a + s sqrt(1-tau) b.
enum class PortSign { Plus, Minus };

struct ChannelConfig {
  double tau = 1.0;
  Index input_cutoff = 0;   ///< D; 0 means "take it from the input states"
  Index output_cutoff = 0;  ///< 0 selects 2D - 1
  Index quadrature = 0;     ///< phase points for ring mixtures; 0 selects 4 * output cutoff
  PortSign sign = PortSign::Plus;

  double tau_prime() const { return 1.0 - tau; }
  Index out_dim() const;
  Index ring_points() const { return quadrature == 0 ? 4 * out_dim() : quadrature; }
  void validate() const;
};

/// Photon-number blocks of the two-mode unitary. Block n acts on
/// span{|j, n - j>}; entry (j, i) is <j, n-j| U |i, n-i>.
class BlockUnitary {
 public:
  BlockUnitary(double tau, Index cutoff, PortSign sign = PortSign::Plus);

  double tau() const { return tau_; }
  Index cutoff() const { return cutoff_; }
  PortSign sign() const { return sign_; }
  Index max_photons() const { return static_cast<Index>(blocks_.size()) - 1; }
  const Eigen::MatrixXd& block(Index n) const { return blocks_.at(static_cast<std::size_t>(n)); }

  void save(const std::filesystem::path& file) const;
  static std::optional<BlockUnitary> load(const std::filesystem::path& file, double tau, Index cutoff,
                                          PortSign sign);

 private:
  BlockUnitary() = default;
  double tau_ = 1.0;
  Index cutoff_ = 0;
  PortSign sign_ = PortSign::Plus;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// Uncached construction for photon numbers 0 ... 2(D-1).
BlockUnitary build_block_unitary(double tau, Index D, PortSign sign = PortSign::Plus);

/// Process-wide cached blocks keyed on (tau quantized to 1e-15, D, sign).
/// Concurrent readers are safe. When BOSONIC_AVC_CACHE_DIR is set, blocks
/// are also read from and written to that directory.
std::shared_ptr<const BlockUnitary> cached_block_unitary(double tau, Index D,
                                                         PortSign sign = PortSign::Plus);
void clear_block_cache();
std::size_t block_cache_size();

/// Output port 1 of U (rho (x) sigma) U^dagger, truncated to the configured
/// output cutoff with the lost weight recorded in the deficit.
DensityMatrix apply_bs(const DensityMatrix& rho, const DensityMatrix& sigma, const ChannelConfig& cfg);

/// Fast path for a coherent input against a semi-classical jammer: a mixture
/// of coherent outputs over the jammer's P-representation.
DensityMatrix apply_bs_semiclassical(Complex alpha, const JammerSpec& jammer, const ChannelConfig& cfg);

/// D(gamma) S_N D(gamma)^dagger on the first D levels, renormalized.
DensityMatrix make_displaced_thermal(Complex gamma, double mean_photons, Index D);

/// P_d X P_d + tr((1 - P_d) X) |0><0| with P_d projecting onto |0>..|d>.
/// The result lives on d + 1 levels; d >= dim - 1 returns the input.
DensityMatrix prune(const DensityMatrix& rho, Index d);

/// Pruned jammed channel: prune(apply_bs_semiclassical(alpha, jammer, cfg), d).
DensityMatrix channel_N(Complex alpha, const JammerSpec& jammer, Index d, const ChannelConfig& cfg);

}  // namespace bavc
