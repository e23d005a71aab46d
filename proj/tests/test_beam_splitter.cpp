#include "bavc/beam_splitter.hpp"
#include "bavc/entropy.hpp"
#include "bavc/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <thread>

using namespace bavc;

namespace {

// exp(theta (a1^+ a2 - a1 a2^+)) on a per-mode cutoff L, index n1 * L + n2.
Eigen::MatrixXd generator_unitary(double tau, Index L) {
  const Index dim = L * L;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
  for (Index n1 = 0; n1 < L; ++n1) {
    for (Index n2 = 0; n2 < L; ++n2) {
      const Index col = n1 * L + n2;
      if (n2 >= 1 && n1 + 1 < L) G((n1 + 1) * L + (n2 - 1), col) += std::sqrt((n1 + 1.0) * n2);  // a1^+ a2
      if (n1 >= 1 && n2 + 1 < L) G((n1 - 1) * L + (n2 + 1), col) -= std::sqrt(n1 * (n2 + 1.0));  // a1 a2^+
    }
  }
  const double theta = std::acos(std::sqrt(tau));
  return (theta * G).exp();
}


}  // namespace

TEST_CASE("block unitary structure") {
  SUBCASE("identity at tau = 1") {
    const auto U = build_block_unitary(1.0, 6);
    for (Index n = 0; n <= U.max_photons(); ++n)
      CHECK((U.block(n) - Eigen::MatrixXd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("vacuum block") {
    for (double tau : {0.0, 0.3, 0.9}) CHECK(build_block_unitary(tau, 4).block(0)(0, 0) == 1.0);
  }
  SUBCASE("single-photon block at tau = 1/2") {
    // Index 1 is |1,0>, index 0 is |0,1>. |1,0> -> sqrt(.5)(|1,0> - |0,1>),
    // |0,1> -> sqrt(.5)(|1,0> + |0,1>).
    const auto U = build_block_unitary(0.5, 3);
    const auto& B = U.block(1);
    const double h = std::sqrt(0.5);
    CHECK(std::abs(B(1, 1) - h) < 1e-15);
    CHECK(std::abs(B(1, 0) - h) < 1e-15);
    CHECK(std::abs(B(0, 1) + h) < 1e-15);
    CHECK(std::abs(B(0, 0) - h) < 1e-15);
  }
  SUBCASE("unitarity up to D = 200") {
    for (double tau : {0.1, 0.5, 0.77}) {
      const auto U = build_block_unitary(tau, 200);
      double worst = 0.0;
      for (Index n = 0; n <= U.max_photons(); n += 7) {
        const auto& B = U.block(n);
        worst = std::max(worst, (B.transpose() * B - Eigen::MatrixXd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff());
      }
      CHECK(worst < 1e-10);
    }
  }
  SUBCASE("agrees with the binomial expansion") {
    for (double tau : {0.2, 0.5, 0.85}) {
      const auto U = build_block_unitary(tau, 9);
      for (Index n = 0; n <= U.max_photons(); ++n)
        for (Index j = 0; j <= n; ++j)
          for (Index i = 0; i <= n; ++i) CHECK(std::abs(U.block(n)(j, i) - oracle::bs_element(tau, n, j, i)) < 1e-12);
    }
  }
  SUBCASE("matches the generator exponential and conserves photon number") {
    for (double tau : {0.3, 0.6}) {
      for (Index D : {3, 6}) {
        const Index L = 2 * D - 1;
        const Eigen::MatrixXd full = generator_unitary(tau, L);
        const auto U = build_block_unitary(tau, D);
        double off_block = 0.0, mismatch = 0.0;
        for (Index n1 = 0; n1 < D; ++n1) {
          for (Index n2 = 0; n2 < D; ++n2) {
            const Index col = n1 * L + n2;
            for (Index m1 = 0; m1 < L; ++m1) {
              for (Index m2 = 0; m2 < L; ++m2) {
                const double v = full(m1 * L + m2, col);
                if (m1 + m2 != n1 + n2) off_block = std::max(off_block, std::abs(v));
                else mismatch = std::max(mismatch, std::abs(v - U.block(n1 + n2)(m1, n1)));
              }
            }
          }
        }
        CHECK(off_block < 1e-12);
        CHECK(mismatch < 1e-12);
      }
    }
  }
}

TEST_CASE("block cache") {
  clear_block_cache();
  const auto a = cached_block_unitary(0.4, 10);
  const auto b = cached_block_unitary(0.4 + 1e-17, 10);
  CHECK(a.get() == b.get());
  CHECK(cached_block_unitary(0.4, 11).get() != a.get());
  CHECK(cached_block_unitary(0.4, 10, PortSign::Minus).get() != a.get());

  std::vector<const BlockUnitary*> seen(8);
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < 8; ++w) workers.emplace_back([&, w] { seen[w] = cached_block_unitary(0.123, 12).get(); });
  }
  for (auto* p : seen) CHECK(p == seen.front());
}

TEST_CASE("block cache persistence") {
  const auto dir = std::filesystem::temp_directory_path() / "bavc_cache_test";
  std::filesystem::remove_all(dir);
  ::setenv("BOSONIC_AVC_CACHE_DIR", dir.c_str(), 1);
  clear_block_cache();
  const auto first = cached_block_unitary(0.37, 7);
  CHECK(std::filesystem::exists(dir));
  clear_block_cache();
  const auto second = cached_block_unitary(0.37, 7);
  for (Index n = 0; n <= first->max_photons(); ++n) CHECK((first->block(n) - second->block(n)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(BlockUnitary::load(dir / "missing.bin", 0.37, 7, PortSign::Plus).has_value());
  ::unsetenv("BOSONIC_AVC_CACHE_DIR");
  clear_block_cache();
  std::filesystem::remove_all(dir);
}

TEST_CASE("apply_bs basic laws") {
  SUBCASE("vacuum jammer at tau = 1 is the identity") {
    std::mt19937_64 rng(3);
    const auto rho = oracle::random_state(rng, 8, 3);
    const auto out = apply_bs(rho, make_vacuum(8), {.tau = 1.0, .output_cutoff = 8});
    CHECK(trace_distance(out, rho).raw < 1e-12);
  }
  SUBCASE("coherent in, coherent out") {
    const Index D = 30;
    for (double tau : {0.25, 0.5, 0.8}) {
      const Complex a(1.0, 0.5), b(-0.7, 0.9);
      const auto out = apply_bs(make_coherent(a, D), make_coherent(b, D), {.tau = tau});
      const auto expected = make_coherent(std::sqrt(tau) * a + std::sqrt(1.0 - tau) * b, 2 * D - 1);
      CHECK(trace_distance(out, expected).raw < 1e-8);
    }
  }
  SUBCASE("coherent and PHAV mix into DPHAV") {
    const Index D = 30;
    const double tau = 0.6;
    const Complex a(0.9, -0.4);
    const double b = 1.1;
    const auto out = apply_bs(make_coherent(a, D), make_phav(b, D), {.tau = tau});
    const auto expected = make_dphav(std::sqrt(tau) * a, std::sqrt(1.0 - tau) * b, 2 * D - 1);
    CHECK(trace_distance(out, expected).raw < 1e-8);
  }
  SUBCASE("trace plus deficit") {
    std::mt19937_64 rng(5);
    const auto rho = oracle::random_state(rng, 10, 10);
    const auto sigma = make_thermal(0.8, 10, 1.0);
    const auto out = apply_bs(rho, sigma, {.tau = 0.4});
    CHECK(std::abs(out.entries().trace().real() - 1.0) < 1e-9);
    CHECK(std::abs(out.trace_deficit() - sigma.trace_deficit()) < 1e-12);
    const auto cut = apply_bs(rho, sigma, {.tau = 0.4, .output_cutoff = 6});
    CHECK(cut.dim() == 6);
    CHECK(cut.trace_deficit() > out.trace_deficit());
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(apply_bs(make_vacuum(4), make_vacuum(5), {.tau = 0.5}), DimensionMismatch);
  }
}

TEST_CASE("phase covariance") {
  std::mt19937_64 rng(17);
  const double theta = 0.7;
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = oracle::random_state(rng, 7, 2);
    const auto sigma = oracle::random_state(rng, 7, 3);
    const ChannelConfig cfg{.tau = 0.35};
    const auto lhs = apply_bs(phase_rotate(rho, theta), phase_rotate(sigma, theta), cfg);
    const auto rhs = phase_rotate(apply_bs(rho, sigma, cfg), theta);
    CHECK(trace_distance(lhs, rhs).raw < 1e-12);
  }
}

TEST_CASE("port sign convention") {
  const Index D = 25;
  const double tau = 0.45;
  const Complex a(0.6, 0.2);
  // Phase-invariant jammers cannot tell the conventions apart.
  for (const auto& jam : {JammerSpec::thermal(0.7), JammerSpec::phav(0.9)}) {
    const auto plus = apply_bs(make_coherent(a, D), jam.state(D, 1e-6), {.tau = tau, .sign = PortSign::Plus});
    const auto minus = apply_bs(make_coherent(a, D), jam.state(D, 1e-6), {.tau = tau, .sign = PortSign::Minus});
    CHECK(trace_distance(plus, minus).raw < 1e-12);
  }
  const Complex b(0.4, -0.3);
  const auto minus = apply_bs(make_coherent(a, D), make_coherent(b, D), {.tau = tau, .sign = PortSign::Minus});
  CHECK(trace_distance(minus, make_coherent(std::sqrt(tau) * a - std::sqrt(1.0 - tau) * b, 2 * D - 1)).raw < 1e-8);
}

TEST_CASE("semi-classical fast path agrees with the general path") {
  const Index D = 34;
  for (double tau : {0.3, 0.7}) {
    for (const Complex alpha : {Complex(0.0, 0.0), Complex(0.8, -0.3), Complex(-1.2, 0.5)}) {
      for (const auto& jam : {JammerSpec::vacuum(), JammerSpec::thermal(0.6), JammerSpec::phav(0.9),
                              JammerSpec::phav_mixture({{0.4, 0.5}, {1.2, 0.5}}),
                              JammerSpec::dphav(Complex(0.3, 0.2), 0.5)}) {
        CAPTURE(jam.label());
        const ChannelConfig cfg{.tau = tau, .input_cutoff = D};
        const auto fast = apply_bs_semiclassical(alpha, jam, cfg);
        const auto slow = apply_bs(make_coherent(alpha, D), jam.state(D), cfg);
        CHECK(trace_distance(fast, slow).raw < 1e-8);
      }
    }
  }
}

TEST_CASE("semi-classical special cases") {
  const ChannelConfig cfg{.tau = 0.6, .input_cutoff = 30};
  SUBCASE("vacuum jammer is pure loss") {
    const Complex a(1.0, 1.0);
    CHECK(trace_distance(apply_bs_semiclassical(a, JammerSpec::vacuum(), cfg),
                         make_coherent(std::sqrt(0.6) * a, cfg.out_dim()))
              .raw < 1e-12);
  }
  SUBCASE("PHAV jammer against the vacuum input") {
    const auto out = apply_bs_semiclassical(0.0, JammerSpec::phav(1.3), cfg);
    const double mean = 0.4 * 1.69;
    Eigen::VectorXd oracle(cfg.out_dim());
    for (Index n = 0; n < oracle.size(); ++n) oracle(n) = std::exp(-mean) * std::pow(mean, n) / std::tgamma(n + 1.0);
    oracle /= oracle.sum();
    CHECK(trace_distance(out, DensityMatrix::from_diagonal(oracle)).raw < 1e-10);
  }
  SUBCASE("thermal jammer output entropy does not depend on alpha") {
    const double P = 1.0;
    const auto ref = apply_bs(make_vacuum(60), make_thermal(P, 60), {.tau = 0.6});
    const double s0 = entropy_bits(ref);
    CHECK(std::abs(s0 - gordon_g(0.4 * P)) < 1e-8);
    const ChannelConfig big{.tau = 0.6, .input_cutoff = 60};
    for (const Complex a : {Complex(0.5, 0.0), Complex(1.0, -1.0), Complex(0.0, 1.7)})
      CHECK(std::abs(entropy_bits(apply_bs_semiclassical(a, JammerSpec::thermal(P), big)) - s0) < 1e-8);
  }
}

TEST_CASE("displaced thermal closed form") {
  const Index D = 20;
  const double N = 0.5;
  const Complex g(0.6, 0.3);
  const auto fast = make_displaced_thermal(g, N, D);
  // General-path oracle with tau chosen so the output is D(sqrt(tau) a) S_{tau' P}.
  const double tau = 0.5;
  const Index Din = 36;
  const auto ref = apply_bs(make_coherent(g / std::sqrt(tau), Din), make_thermal(N / (1.0 - tau), Din),
                            {.tau = tau, .output_cutoff = D});
  CHECK(trace_distance(fast, ref).raw < 1e-8);
  CHECK(trace_distance(make_displaced_thermal(g, 0.0, D), make_coherent(g, D)).raw < 1e-14);
  CHECK(trace_distance(make_displaced_thermal(0.0, N, D), make_thermal(N, D, 1.0)).raw < 1e-12);
}

TEST_CASE("prune") {
  SUBCASE("identity on F_d") {
    const auto rho = make_coherent(0.2, 5, 1.0);
    CHECK(trace_distance(prune(rho, 4), rho).raw == 0.0);
    CHECK(trace_distance(prune(rho, 10), rho).raw == 0.0);
  }
  SUBCASE("weight outside goes to vacuum") {
    const auto out = prune(make_fock(4, 6), 3);
    CHECK(out.dim() == 4);
    CHECK(trace_distance(out, make_vacuum(4)).raw < 1e-15);
  }
  SUBCASE("trace preserved, energy not increased") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd d(12);
      for (Index i = 0; i < 12; ++i) d(i) = u(rng);
      d /= d.sum();
      const auto rho = DensityMatrix::from_diagonal(d);
      const auto out = prune(rho, static_cast<Index>(u(rng) * 10));
      CHECK(std::abs(out.entries().trace().real() - 1.0) < 1e-14);
      CHECK(energy(out) <= energy(rho) + 1e-14);
    }
  }
}

TEST_CASE("pruned jammed channel") {
  const ChannelConfig cfg{.tau = 0.7, .input_cutoff = 30};
  CHECK(trace_distance(channel_N(0.0, JammerSpec::vacuum(), 10, cfg), make_vacuum(11)).raw < 1e-14);
  const auto jam = JammerSpec::phav(0.8);
  CHECK(trace_distance(channel_N(0.5, jam, 100, cfg), apply_bs_semiclassical(0.5, jam, cfg)).raw == 0.0);
  for (const auto& j : {JammerSpec::thermal(1.0), JammerSpec::phav(1.0), JammerSpec::dphav(0.5, 0.5)}) {
    for (const double a : {0.0, 0.8, 1.6}) {
      for (const Index d : {2, 5, 12}) {
        const auto out = channel_N(a, j, d, cfg);
        CHECK(energy(out) <= energy(apply_bs_semiclassical(a, j, cfg)) + 1e-12);
      }
    }
  }
}
