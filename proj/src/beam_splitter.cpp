#include "bavc/beam_splitter.hpp"

#include "bavc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <tuple>

namespace bavc {

namespace {

constexpr char kCacheMagic[8] = {'B', 'A', 'V', 'C', 'B', 'S', 'U', '1'};
constexpr std::uint32_t kCacheVersion = 1;

std::int64_t quantize_tau(double tau) { return std::llround(tau * 1e15); }

// Spectral decomposition of a state into weighted unit vectors, dropping
// eigenvalues that carry no weight.
struct PureComponents {
  std::vector<double> weights;
  std::vector<Eigen::VectorXcd> vectors;
};

PureComponents decompose(const DensityMatrix& rho) {
  PureComponents out;
  const Index D = rho.dim();
  if (rho.is_diagonal()) {
    const Eigen::VectorXd d = rho.diagonal();
    for (Index n = 0; n < D; ++n) {
      if (d(n) <= 0.0) continue;
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(D);
      v(n) = 1.0;
      out.weights.push_back(d(n));
      out.vectors.push_back(std::move(v));
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries());
  for (Index i = 0; i < D; ++i) {
    const double w = es.eigenvalues()(i);
    if (w < kEigenvalueFloor) throw NegativeEigenvalue("input state has a negative eigenvalue");
    if (w <= 1e-16) continue;
    out.weights.push_back(w);
    out.vectors.push_back(es.eigenvectors().col(i));
  }
  return out;
}

DensityMatrix truncate_output(Eigen::MatrixXcd full, Index out_dim, double prior_deficit) {
  if (out_dim < full.rows()) {
    Eigen::MatrixXcd cut = full.topLeftCorner(out_dim, out_dim);
    return renormalized(std::move(cut), prior_deficit);
  }
  if (out_dim > full.rows()) {
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(out_dim, out_dim);
    big.topLeftCorner(full.rows(), full.cols()) = full;
    return renormalized(std::move(big), prior_deficit);
  }
  return renormalized(std::move(full), prior_deficit);
}

double combine_deficits(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }

// Unnormalized sum_k w_k |c + r e^{i phi_k}><...| over M uniform phases.
void add_ring(Eigen::MatrixXcd& acc, Complex center, double radius, double weight, Index D, Index M) {
  if (radius == 0.0) {
    const Eigen::VectorXcd v = coherent_amplitudes(center, D);
    acc.noalias() += weight * (v * v.adjoint());
    return;
  }
  Eigen::MatrixXcd amps(D, M);
  for (Index k = 0; k < M; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    amps.col(k) = coherent_amplitudes(center + std::polar(radius, phi), D);
  }
  acc.noalias() += (weight / static_cast<double>(M)) * (amps * amps.adjoint());
}

}  // namespace

// ---------------------------------------------------------------------------
// ChannelConfig

Index ChannelConfig::out_dim() const {
  if (output_cutoff > 0) return output_cutoff;
  if (input_cutoff < 1) throw InvalidArgument("channel config needs an input or output cutoff");
  return 2 * input_cutoff - 1;
}

void ChannelConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("transmissivity must lie in [0, 1]");
  if (input_cutoff < 0 || output_cutoff < 0) throw InvalidArgument("cutoffs must be non-negative");
  if (input_cutoff == 0 && output_cutoff == 0)
    throw InvalidArgument("channel config needs an input or output cutoff");
}

// ---------------------------------------------------------------------------
// BlockUnitary

BlockUnitary::BlockUnitary(double tau, Index cutoff, PortSign sign) : tau_(tau), cutoff_(cutoff), sign_(sign) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("transmissivity must lie in [0, 1]");
  if (cutoff < 1) throw InvalidArgument("cutoff must be at least 1");
  const double t = std::sqrt(tau);
  const double r = std::sqrt(1.0 - tau);
  // Mode map a1^+ -> t a1^+ - s r a2^+ (=: b1^+), a2^+ -> s r a1^+ + t a2^+ (=: b2^+).
  // From n |i, n-i> = sqrt(i) a1^+ |i-1, n-i> + sqrt(n-i) a2^+ |i, n-1-i>,
  // column i of block n combines columns i-1 and i of block n-1. Both routes
  // enter with weights summing to one, which keeps rounding errors from growing.
  const double s = sign == PortSign::Plus ? 1.0 : -1.0;
  const Index max_n = 2 * (cutoff - 1);
  blocks_.reserve(static_cast<std::size_t>(max_n + 1));
  blocks_.push_back(Eigen::MatrixXd::Ones(1, 1));
  std::vector<double> sq(static_cast<std::size_t>(max_n + 1));
  for (Index k = 0; k <= max_n; ++k) sq[static_cast<std::size_t>(k)] = std::sqrt(static_cast<double>(k));
  for (Index n = 1; n <= max_n; ++n) {
    const Eigen::MatrixXd& prev = blocks_.back();
    Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(n + 1, n + 1);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Index i = 0; i <= n; ++i) {
      const double wa = sq[static_cast<std::size_t>(i)] * inv_n;
      const double wb = sq[static_cast<std::size_t>(n - i)] * inv_n;
      for (Index j = 0; j <= n; ++j) {
        const double up = j >= 1 ? sq[static_cast<std::size_t>(j)] : 0.0;  // a1^+ from row j-1
        const double side = sq[static_cast<std::size_t>(n - j)];           // a2^+ from row j
        double v = 0.0;
        if (i >= 1) {
          if (j >= 1) v += wa * t * up * prev(j - 1, i - 1);
          if (j <= n - 1) v -= wa * s * r * side * prev(j, i - 1);
        }
        if (i <= n - 1) {
          if (j >= 1) v += wb * s * r * up * prev(j - 1, i);
          if (j <= n - 1) v += wb * t * side * prev(j, i);
        }
        cur(j, i) = v;
      }
    }
    blocks_.push_back(std::move(cur));
  }
}

void BlockUnitary::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) return;
  const std::int64_t key = quantize_tau(tau_);
  const std::int64_t D = cutoff_;
  const std::int32_t sgn = sign_ == PortSign::Plus ? 1 : -1;
  out.write(kCacheMagic, sizeof kCacheMagic);
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
  out.write(reinterpret_cast<const char*>(&key), sizeof key);
  out.write(reinterpret_cast<const char*>(&D), sizeof D);
  out.write(reinterpret_cast<const char*>(&sgn), sizeof sgn);
  out.write(reinterpret_cast<const char*>(&tau_), sizeof tau_);
  for (const auto& b : blocks_)
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size()));
}

std::optional<BlockUnitary> BlockUnitary::load(const std::filesystem::path& file, double tau, Index cutoff,
                                               PortSign sign) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0;
  std::int64_t key = 0, D = 0;
  std::int32_t sgn = 0;
  double stored_tau = 0.0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&key), sizeof key);
  in.read(reinterpret_cast<char*>(&D), sizeof D);
  in.read(reinterpret_cast<char*>(&sgn), sizeof sgn);
  in.read(reinterpret_cast<char*>(&stored_tau), sizeof stored_tau);
  if (!in || !std::equal(magic, magic + 8, kCacheMagic) || version != kCacheVersion ||
      key != quantize_tau(tau) || D != cutoff || sgn != (sign == PortSign::Plus ? 1 : -1))
    return std::nullopt;
  BlockUnitary u;
  u.tau_ = stored_tau;
  u.cutoff_ = cutoff;
  u.sign_ = sign;
  for (Index n = 0; n <= 2 * (cutoff - 1); ++n) {
    Eigen::MatrixXd b(n + 1, n + 1);
    in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size()));
    if (!in) return std::nullopt;
    u.blocks_.push_back(std::move(b));
  }
  return u;
}

BlockUnitary build_block_unitary(double tau, Index D, PortSign sign) { return BlockUnitary(tau, D, sign); }

namespace {

using CacheKey = std::tuple<std::int64_t, Index, int>;

struct BlockCache {
  std::shared_mutex mutex;
  std::map<CacheKey, std::shared_ptr<const BlockUnitary>> entries;
};

BlockCache& block_cache() {
  static BlockCache cache;
  return cache;
}

std::optional<std::filesystem::path> cache_file(double tau, Index D, PortSign sign) {
  const char* dir = std::getenv("BOSONIC_AVC_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  std::ostringstream name;
  name << "bs_" << (sign == PortSign::Plus ? "p" : "m") << "_" << quantize_tau(tau) << "_" << D << ".bin";
  return std::filesystem::path(dir) / name.str();
}

}  // namespace

std::shared_ptr<const BlockUnitary> cached_block_unitary(double tau, Index D, PortSign sign) {
  auto& cache = block_cache();
  const CacheKey key{quantize_tau(tau), D, sign == PortSign::Plus ? 1 : -1};
  {
    std::shared_lock lock(cache.mutex);
    if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  }
  std::unique_lock lock(cache.mutex);
  if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  std::shared_ptr<const BlockUnitary> built;
  const auto file = cache_file(tau, D, sign);
  if (file) {
    if (auto loaded = BlockUnitary::load(*file, tau, D, sign))
      built = std::make_shared<const BlockUnitary>(std::move(*loaded));
  }
  if (!built) {
    built = std::make_shared<const BlockUnitary>(tau, D, sign);
    if (file) {
      std::error_code ec;
      std::filesystem::create_directories(file->parent_path(), ec);
      built->save(*file);
    }
  }
  cache.entries.emplace(key, built);
  return built;
}

void clear_block_cache() {
  auto& cache = block_cache();
  std::unique_lock lock(cache.mutex);
  cache.entries.clear();
}

std::size_t block_cache_size() {
  auto& cache = block_cache();
  std::shared_lock lock(cache.mutex);
  return cache.entries.size();
}

// ---------------------------------------------------------------------------
// Channel applications

DensityMatrix apply_bs(const DensityMatrix& rho, const DensityMatrix& sigma, const ChannelConfig& cfg) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("beam splitter inputs must share a cutoff");
  const Index D = rho.dim();
  if (cfg.input_cutoff != 0 && cfg.input_cutoff != D)
    throw DimensionMismatch("input states do not match the configured cutoff");
  ChannelConfig local = cfg;
  local.input_cutoff = D;
  local.validate();
  const Index full = 2 * D - 1;
  const auto blocks = cached_block_unitary(cfg.tau, D, cfg.sign);
  const double prior = combine_deficits(rho.trace_deficit(), sigma.trace_deficit());

  if (rho.is_diagonal() && sigma.is_diagonal()) {
    const Eigen::VectorXd p = rho.diagonal();
    const Eigen::VectorXd q = sigma.diagonal();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(full);
    for (Index n1 = 0; n1 < D; ++n1) {
      if (p(n1) == 0.0) continue;
      for (Index n2 = 0; n2 < D; ++n2) {
        const double w = p(n1) * q(n2);
        if (w == 0.0) continue;
        const Eigen::MatrixXd& B = blocks->block(n1 + n2);
        for (Index j = 0; j <= n1 + n2; ++j) out(j) += w * B(j, n1) * B(j, n1);
      }
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(full, full);
    m.diagonal() = out.cast<Complex>();
    return truncate_output(std::move(m), local.out_dim(), prior);
  }

  const PureComponents a = decompose(rho);
  const PureComponents b = decompose(sigma);
  // Each product of pure components maps to a two-mode vector psi(j, l) with
  // j photons in the observed mode and l in the discarded one; the reduced
  // state is sum w Psi Psi^dagger, assembled as one matrix product.
  const Index pairs = static_cast<Index>(a.weights.size() * b.weights.size());
  Eigen::MatrixXcd stacked = Eigen::MatrixXcd::Zero(full, pairs * full);
  Index col0 = 0;
  for (std::size_t ia = 0; ia < a.weights.size(); ++ia) {
    const Eigen::VectorXcd& u = a.vectors[ia];
    for (std::size_t ib = 0; ib < b.weights.size(); ++ib, col0 += full) {
      const Eigen::VectorXcd& v = b.vectors[ib];
      const double amp = std::sqrt(a.weights[ia] * b.weights[ib]);
      for (Index n = 0; n <= 2 * (D - 1); ++n) {
        const Eigen::MatrixXd& B = blocks->block(n);
        const Index lo = std::max<Index>(0, n - (D - 1));
        const Index hi = std::min<Index>(n, D - 1);
        for (Index j = 0; j <= n; ++j) {
          Complex acc(0.0, 0.0);
          for (Index i = lo; i <= hi; ++i) acc += B(j, i) * u(i) * v(n - i);
          stacked(j, col0 + (n - j)) = amp * acc;
        }
      }
    }
  }
  Eigen::MatrixXcd out = stacked * stacked.adjoint();
  return truncate_output(std::move(out), local.out_dim(), prior);
}

DensityMatrix make_displaced_thermal(Complex gamma, double mean_photons, Index D) {
  if (D < 1) throw InvalidArgument("cutoff must be at least 1");
  if (!(mean_photons >= 0.0)) throw DomainError("thermal mean photon number must be >= 0");
  if (mean_photons == 0.0) {
    const Eigen::VectorXcd v = coherent_amplitudes(gamma, D);
    return renormalized(v * v.adjoint());
  }
  // rho_mn = e^{-|g|^2/(1+N)} / sqrt(m! n!) sum_k C(m,k) C(n,k) k! d^{m-k} conj(d)^{n-k} N^k / (1+N)^{k+1}
  // with d = g / (1+N): a Gaussian moment of the P-function. All terms share
  // the phase e^{i(m-n) arg g}, so the sum has no cancellation.
  std::vector<double> lf(static_cast<std::size_t>(D + 1), 0.0);
  for (Index n = 1; n <= D; ++n) lf[n] = lf[n - 1] + std::log(static_cast<double>(n));
  const double N = mean_photons;
  const double l1pN = std::log1p(N);
  const double lN = std::log(N);
  const Complex delta = gamma / (1.0 + N);
  const double mag = std::abs(delta);
  const double lmag = mag > 0.0 ? std::log(mag) : 0.0;
  const double arg = std::arg(delta);
  const double base = -std::norm(gamma) / (1.0 + N);
  Eigen::MatrixXcd m(D, D);
  for (Index r = 0; r < D; ++r) {
    for (Index c = 0; c <= r; ++c) {
      double sum = 0.0;
      const Index kmin = mag > 0.0 ? 0 : c;  // with d = 0 only k = min(r, c) survives, and then r must equal c
      if (mag == 0.0 && r != c) {
        m(r, c) = 0.0;
        m(c, r) = 0.0;
        continue;
      }
      for (Index k = kmin; k <= c; ++k) {
        const double power = static_cast<double>(r + c - 2 * k);
        const double lt = base + 0.5 * (lf[r] + lf[c]) - lf[k] - lf[r - k] - lf[c - k] +
                          (power > 0 ? power * lmag : 0.0) + static_cast<double>(k) * lN -
                          static_cast<double>(k + 1) * l1pN;
        sum += std::exp(lt);
      }
      const Complex val = sum * std::polar(1.0, arg * static_cast<double>(r - c));
      m(r, c) = val;
      m(c, r) = std::conj(val);
    }
  }
  return renormalized(std::move(m));
}

DensityMatrix apply_bs_semiclassical(Complex alpha, const JammerSpec& jammer, const ChannelConfig& cfg) {
  cfg.validate();
  const Index D = cfg.out_dim();
  const Index M = cfg.ring_points();
  const double t = std::sqrt(cfg.tau);
  const double r = std::sqrt(cfg.tau_prime());
  const double s = cfg.sign == PortSign::Plus ? 1.0 : -1.0;
  const Complex gamma = t * alpha;

  if (const auto* th = std::get_if<ThermalJammer>(&jammer.kind()))
    return make_displaced_thermal(gamma, cfg.tau_prime() * th->mean_photons, D);

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(D, D);
  if (const auto* ph = std::get_if<PhavJammer>(&jammer.kind())) {
    add_ring(acc, gamma, r * ph->radius, 1.0, D, M);
  } else if (const auto* mx = std::get_if<PhavMixtureJammer>(&jammer.kind())) {
    for (const auto& c : mx->components) add_ring(acc, gamma, r * c.radius, c.weight, D, M);
  } else {
    const auto& dp = std::get<DphavJammer>(jammer.kind());
    add_ring(acc, gamma + s * r * dp.center, r * dp.radius, 1.0, D, M);
  }
  return renormalized(std::move(acc));
}

DensityMatrix prune(const DensityMatrix& rho, Index d) {
  if (d < 0) throw InvalidArgument("prune level must be non-negative");
  if (d >= rho.dim() - 1) return rho;
  const Index keep = d + 1;
  Eigen::MatrixXcd m = rho.entries().topLeftCorner(keep, keep);
  const double kept = m.trace().real();
  m(0, 0) += std::max(0.0, 1.0 - kept);
  m /= m.trace().real();
  if (rho.is_diagonal()) {
    Eigen::VectorXd diag = m.diagonal().real();
    return DensityMatrix::from_diagonal(diag, rho.trace_deficit());
  }
  return DensityMatrix(std::move(m), rho.trace_deficit());
}

DensityMatrix channel_N(Complex alpha, const JammerSpec& jammer, Index d, const ChannelConfig& cfg) {
  return prune(apply_bs_semiclassical(alpha, jammer, cfg), d);
}

}  // namespace bavc
