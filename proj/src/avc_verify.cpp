#include "bavc/avc_verify.hpp"

#include "bavc/errors.hpp"
#include "bavc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <variant>

namespace bavc {

namespace {

using u128 = unsigned __int128;

constexpr double kLn2 = 0.69314718055994530942;

bool mul_checked(u128& acc, u128 factor) {
  if (factor != 0 && acc > std::numeric_limits<u128>::max() / factor) return false;
  acc *= factor;
  return true;
}

bool pow_checked(u128& acc, u128 base, int exp) {
  for (int i = 0; i < exp; ++i)
    if (!mul_checked(acc, base)) return false;
  return true;
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

Index int_pow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void require_square(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(what) + " must be square");
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t multinomial(const std::vector<int>& counts) {
  // Product of binomials C(m_1 + ... + m_j, m_j), each exact.
  std::uint64_t result = 1;
  int total = 0;
  for (int m : counts) {
    if (m < 0) throw InvalidArgument("type counts must be non-negative");
    for (int i = 1; i <= m; ++i) {
      ++total;
      // result * total / i stays integral at every step.
      const u128 next = static_cast<u128>(result) * static_cast<u128>(total) / static_cast<u128>(i);
      if (next > std::numeric_limits<std::uint64_t>::max()) throw InvalidArgument("multinomial overflows 64 bits");
      result = static_cast<std::uint64_t>(next);
    }
  }
  return result;
}

TypeClass TypeClass::from_counts(std::vector<int> counts) {
  if (counts.empty()) throw InvalidArgument("type needs a non-empty alphabet");
  TypeClass t;
  t.alphabet = static_cast<int>(counts.size());
  t.length = std::accumulate(counts.begin(), counts.end(), 0);
  if (t.length <= 0) throw InvalidArgument("type length must be positive");
  t.size = multinomial(counts);
  t.counts = std::move(counts);
  return t;
}

double TypeClass::entropy_bits() const {
  double h = 0.0;
  for (int m : counts) {
    if (m == 0) continue;
    const double p = static_cast<double>(m) / length;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<TypeClass> enumerate_types(int alphabet, int length) {
  if (alphabet < 1 || length < 1) throw InvalidArgument("alphabet and length must be positive");
  std::vector<TypeClass> out;
  std::vector<int> counts(static_cast<std::size_t>(alphabet), 0);
  // Compositions of `length` into `alphabet` parts, lexicographic.
  const auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == alphabet - 1) {
      counts[static_cast<std::size_t>(pos)] = left;
      out.push_back(TypeClass::from_counts(counts));
      return;
    }
    for (int m = 0; m <= left; ++m) {
      counts[static_cast<std::size_t>(pos)] = m;
      self(self, pos + 1, left - m);
    }
  };
  rec(rec, 0, length);
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd single_site_marginal(const Eigen::MatrixXcd& rho, int d, int k, int site) {
  const Index dim = int_pow(d, k);
  if (rho.rows() != dim || rho.cols() != dim) throw DimensionMismatch("state does not act on (C^d)^k");
  if (site < 0 || site >= k) throw InvalidArgument("site out of range");
  const Index post = int_pow(d, k - site - 1);
  const Index pre = int_pow(d, site);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Index a = 0; a < pre; ++a)
    for (Index c = 0; c < post; ++c)
      for (Index x = 0; x < d; ++x)
        for (Index y = 0; y < d; ++y) m(x, y) += rho((a * d + x) * post + c, (a * d + y) * post + c);
  return m;
}

Lemma1Result lemma1_check(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& Q, int k) {
  require_square(Q, "projector");
  require_square(rho, "state");
  if (k < 1) throw InvalidArgument("k must be positive");
  const int d = static_cast<int>(Q.rows());
  const double dk = std::pow(static_cast<double>(d), k);
  if (dk > 4096.0) throw DimensionMismatch("d^k exceeds the dense limit 4096");
  const Index dim = int_pow(d, k);
  if (rho.rows() != dim) throw DimensionMismatch("state dimension is not d^k");

  Lemma1Result r;
  double min_local = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i)
    min_local = std::min(min_local, (Q * single_site_marginal(rho, d, k, i)).trace().real());
  r.epsilon = 1.0 - min_local;

  // Apply Q to the row index one site at a time; the trace after i sites is
  // tr (Q^{(x)i} (x) 1) rho.
  Eigen::MatrixXcd M = rho;
  Eigen::VectorXcd buf(d);
  r.chain_holds = true;
  for (int s = 0; s < k; ++s) {
    const Index post = int_pow(d, k - s - 1), pre = int_pow(d, s);
    for (Index col = 0; col < dim; ++col)
      for (Index a = 0; a < pre; ++a)
        for (Index c = 0; c < post; ++c) {
          for (Index x = 0; x < d; ++x) buf(x) = M((a * d + x) * post + c, col);
          const Eigen::VectorXcd out = Q * buf;
          for (Index x = 0; x < d; ++x) M((a * d + x) * post + c, col) = out(x);
        }
    const double t = M.trace().real();
    r.chain.push_back(t);
    if (t < 1.0 - (s + 1) * r.epsilon - 1e-12) r.chain_holds = false;
  }
  r.passed = r.chain.back() >= 1.0 - k * r.epsilon - 1e-12;
  return r;
}

// ---------------------------------------------------------------------------

SymmetrizeResult symmetrize_marginal_check(const std::vector<DensityMatrix>& factors, double P) {
  if (factors.empty()) throw InvalidArgument("need at least one factor");
  const int k = static_cast<int>(factors.size());
  if (k > 6) throw InvalidArgument("at most 6 factors");
  const Index D = factors[0].dim();
  std::vector<Eigen::VectorXd> p;
  for (const auto& f : factors) {
    if (f.dim() != D) throw DimensionMismatch("factors must share a cutoff");
    if (!f.is_diagonal()) throw InvalidArgument("factors must be diagonal");
    p.push_back(f.diagonal());
  }
  const Index total = int_pow(D, k);
  if (static_cast<double>(total) > 1e6) throw InvalidArgument("D^k exceeds 1e6");

  // Permutation average of the product distribution over all k! orderings.
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(total);
  std::size_t nperm = 0;
  do {
    ++nperm;
    for (Index idx = 0; idx < total; ++idx) {
      Index rem = idx;
      double prob = 1.0;
      for (int s = k - 1; s >= 0; --s) {
        prob *= p[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])](rem % D);
        rem /= D;
      }
      avg(idx) += prob;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  avg /= static_cast<double>(nperm);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
  double product_energy = 0.0;
  for (const auto& v : p) {
    mean += v;
    for (Index n = 0; n < D; ++n) product_energy += n * v(n);
  }
  mean /= k;

  SymmetrizeResult r;
  std::vector<Eigen::VectorXd> marg(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(D));
  double avg_energy = 0.0;
  for (Index idx = 0; idx < total; ++idx) {
    Index rem = idx;
    for (int s = k - 1; s >= 0; --s) {
      const Index x = rem % D;
      rem /= D;
      marg[static_cast<std::size_t>(s)](x) += avg(idx);
      avg_energy += static_cast<double>(x) * avg(idx);
    }
  }
  for (const auto& m : marg) r.marginal_error = std::max(r.marginal_error, (m - mean).cwiseAbs().maxCoeff());
  r.energy_error = std::abs(avg_energy - product_energy);
  for (Index n = 0; n < D; ++n) r.marginal_energy += n * marg[0](n);
  r.within_budget = r.marginal_energy <= P + 1e-12;
  r.passed = r.marginal_error <= 1e-12 && r.energy_error <= 1e-12 * std::max(1.0, product_energy) && r.within_budget;
  return r;
}

// ---------------------------------------------------------------------------

double log_jammer_tail(const JammerSpec& jammer, Index N, Index quadrature) {
  if (N <= 0) return 0.0;
  return std::visit(
      [&](const auto& j) -> double {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, ThermalJammer>) {
          if (j.mean_photons == 0.0) return -std::numeric_limits<double>::infinity();
          return static_cast<double>(N) * std::log(j.mean_photons / (j.mean_photons + 1.0));
        } else if constexpr (std::is_same_v<T, PhavJammer>) {
          return log_poisson_upper_tail(j.radius * j.radius, N);
        } else if constexpr (std::is_same_v<T, PhavMixtureJammer>) {
          std::vector<double> terms;
          for (const auto& c : j.components)
            if (c.weight > 0.0) terms.push_back(std::log(c.weight) + log_poisson_upper_tail(c.radius * c.radius, N));
          return log_sum_exp(terms);
        } else {
          if (j.radius == 0.0) return log_poisson_upper_tail(std::norm(j.center), N);
          // Uniform ring of coherent states; periodic integrand, so the
          // equispaced rule converges fast.
          const Index M = std::max<Index>(quadrature, 8);
          std::vector<double> terms;
          for (Index m = 0; m < M; ++m) {
            const double phi = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(M);
            terms.push_back(log_poisson_upper_tail(std::norm(j.center + std::polar(j.radius, phi)), N));
          }
          return log_sum_exp(terms) - std::log(static_cast<double>(M));
        }
      },
      jammer.kind());
}

Lemma3Result lemma3_tail_check(const JammerSpec& jammer, Index N, double K) {
  if (N < 1) throw InvalidArgument("N must be positive");
  Lemma3Result r;
  r.N = N;
  r.log_tail = log_jammer_tail(jammer, N);
  const double n = static_cast<double>(N);
  // Thresholds allow for a radius that squares to b^2 with roundoff.

  // Pure PHAV: a single radius b (the vacuum is b = 0).
  std::optional<double> b;
  Complex center(0.0, 0.0);
  std::visit(
      [&](const auto& j) {
        using T = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<T, ThermalJammer>) {
          if (j.mean_photons == 0.0) b = 0.0;
        } else if constexpr (std::is_same_v<T, PhavJammer>) {
          b = j.radius;
        } else if constexpr (std::is_same_v<T, PhavMixtureJammer>) {
          if (j.components.size() == 1) b = j.components[0].radius;
        } else {
          center = j.center;
          if (j.center == Complex(0.0, 0.0)) b = j.radius;
        }
      },
      jammer.kind());
  if (b) {
    r.pure_applicable = n >= 22.0 * std::max(2.0, *b * *b) * (1.0 - 1e-12);
    if (r.pure_applicable) r.pure_holds = r.log_tail <= -n * std::log(4.0) + 1e-12 * n;
  }

  r.K = K > 0.0 ? K : std::sqrt(jammer.subgaussian_K());
  // K = 0 only fits the point mass at the origin.
  r.subgaussian_ok = r.K > 0.0 ? check_subgaussian(jammer, r.K).passed : jammer.subgaussian_K() == 0.0;
  const double rate = r.K > 0.0 ? std::min(2.0, 1.0 / (kLn2 * 22.0 * r.K * r.K)) : 2.0;
  r.log_mixed_bound = (2.0 - n * rate) * kLn2;
  r.mixed_applicable = r.subgaussian_ok && n >= 22.0 * std::max(2.0, std::norm(center)) * (1.0 - 1e-12);
  if (r.mixed_applicable) r.mixed_holds = r.log_tail <= r.log_mixed_bound + 1e-12 * n;
  r.passed = r.pure_holds && r.mixed_holds;
  return r;
}

// ---------------------------------------------------------------------------

Lemma4Result lemma4_concentration_check(const std::vector<std::vector<double>>& dists, double eps,
                                        std::size_t trials, std::uint64_t seed) {
  if (dists.empty()) throw InvalidArgument("need at least one distribution");
  const std::size_t k = dists.size();
  const std::size_t d = dists[0].size();
  if (d < 1 || d > 4) throw InvalidArgument("alphabet size must be in 1..4");
  if (k > 10000) throw InvalidArgument("k must be at most 10^4");
  if (!(eps >= 0.0)) throw DomainError("eps must be >= 0");
  if (trials == 0) throw InvalidArgument("trials must be positive");

  std::vector<std::vector<double>> cdf(k);
  std::vector<double> pbar(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (dists[i].size() != d) throw DimensionMismatch("distributions must share an alphabet");
    double s = 0.0;
    for (double v : dists[i]) {
      if (!(v >= 0.0)) throw DomainError("probabilities must be >= 0");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw DomainError("each distribution must sum to 1");
    double acc = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
      acc += dists[i][x];
      cdf[i].push_back(acc);
      pbar[x] += dists[i][x] / static_cast<double>(k);
    }
    cdf[i].back() = 1.0;
  }

  // Fixed chunking keeps the count independent of the thread count.
  constexpr std::size_t kChunk = 1000;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    std::seed_seq ss{seed, static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> perm(k);
    std::vector<std::size_t> counts(d);
    const std::size_t end = std::min(trials, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < k; ++i) {
        const auto& f = cdf[perm[i]];
        const double v = u(rng);
        std::size_t x = 0;
        while (x + 1 < d && v >= f[x]) ++x;
        ++counts[x];
      }
      double l1 = 0.0;
      for (std::size_t x = 0; x < d; ++x) l1 += std::abs(static_cast<double>(counts[x]) / k - pbar[x]);
      if (l1 > eps) ++hits[c];
    }
  });

  Lemma4Result r;
  r.trials = trials;
  r.deviations = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  r.empirical_tail = static_cast<double>(r.deviations) / static_cast<double>(trials);
  r.standard_error = std::sqrt(r.empirical_tail * (1.0 - r.empirical_tail) / static_cast<double>(trials));
  const double kd = static_cast<double>(k);
  const double base = std::pow(2.0 * kd, static_cast<double>(d)) * std::exp(-eps * eps * kd);
  r.bound_c2 = 2.0 * base;
  r.bound_c2d = 2.0 * static_cast<double>(d) * base;
  r.vacuous = r.bound_c2 >= 1.0;
  r.passed = r.empirical_tail <= r.bound_c2;
  return r;
}

// ---------------------------------------------------------------------------

bool lemma5_type_bound(const TypeClass& t) {
  const int k = t.length, d = t.alphabet;
  // k^k <= (2k)^d |T| prod m_i^{m_i}
  u128 lhs = 1, rhs = static_cast<u128>(t.size);
  bool exact = pow_checked(lhs, static_cast<u128>(k), k) && pow_checked(rhs, static_cast<u128>(2 * k), d);
  for (int m : t.counts) exact = exact && pow_checked(rhs, static_cast<u128>(m), m);
  if (exact) return lhs <= rhs;
  // Too large for 128 bits: compare logarithms in extended precision.
  long double l = static_cast<long double>(k) * std::log(static_cast<long double>(k));
  long double r = static_cast<long double>(d) * std::log(2.0L * k) + std::log(static_cast<long double>(t.size));
  for (int m : t.counts)
    if (m > 0) r += static_cast<long double>(m) * std::log(static_cast<long double>(m));
  return l <= r + 1e-15L * std::abs(l);
}

bool type_size_bounds(const TypeClass& t) {
  const double kh = t.length * t.entropy_bits();
  const double log_size = std::log2(static_cast<double>(t.size));
  const double slack = 1e-12 * std::max(1.0, kh);
  return log_size <= kh + slack && log_size >= kh - t.alphabet * std::log2(1.0 + t.length) - slack;
}

Lemma5Result lemma5_exhaustive(int alphabet, int length) {
  if (alphabet < 1 || length < 1) throw InvalidArgument("alphabet and length must be positive");
  if (std::pow(static_cast<double>(alphabet), length) > 1e6) throw InvalidArgument("d^k exceeds 1e6");
  const Index total = int_pow(alphabet, length);

  std::map<std::vector<int>, std::size_t> seen;
  std::vector<int> counts(static_cast<std::size_t>(alphabet));
  for (Index idx = 0; idx < total; ++idx) {
    std::fill(counts.begin(), counts.end(), 0);
    Index rem = idx;
    for (int s = 0; s < length; ++s) {
      ++counts[static_cast<std::size_t>(rem % alphabet)];
      rem /= alphabet;
    }
    ++seen[counts];
  }

  const auto types = enumerate_types(alphabet, length);
  Lemma5Result r;
  r.types = types.size();
  r.sequences = static_cast<std::size_t>(total);
  r.cardinalities_match = seen.size() == types.size();
  r.bound_holds = true;
  r.size_bounds_hold = true;
  for (const auto& t : types) {
    const auto it = seen.find(t.counts);
    if (it == seen.end() || it->second != t.size) r.cardinalities_match = false;
    // The bound reads the same for every sequence of the class.
    r.bound_holds = r.bound_holds && lemma5_type_bound(t);
    r.size_bounds_hold = r.size_bounds_hold && type_size_bounds(t);
  }
  r.passed = r.cardinalities_match && r.bound_holds && r.size_bounds_hold;
  return r;
}

// ---------------------------------------------------------------------------

GentleResult gentle_operator_check(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& P) {
  require_square(rho, "state");
  require_square(P, "projector");
  if (rho.rows() != P.rows()) throw DimensionMismatch("state and projector differ in dimension");
  if ((P * P - P).cwiseAbs().maxCoeff() > 1e-10 || (P - P.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("P is not an orthogonal projector");
  GentleResult r;
  const Eigen::MatrixXcd diff = P * rho * P - rho;
  r.lhs = trace_norm_hermitian(0.5 * (diff + diff.adjoint()));
  const double outside = std::max(0.0, 1.0 - (P * rho).trace().real());
  r.rhs = 2.0 * std::sqrt(outside);
  r.passed = r.lhs <= r.rhs + 1e-12;
  return r;
}

}  // namespace bavc
