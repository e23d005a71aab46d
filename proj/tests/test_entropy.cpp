#include "bavc/entropy.hpp"
#include "bavc/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace bavc;

namespace {

double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// Independent reference for chi: every output through the general two-mode path.
double chi_reference(const Constellation& c, const JammerSpec& jam, double tau, Index D) {
  const DensityMatrix js = jam.state(D, 1e-6);
  const ChannelConfig cfg{.tau = tau};
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(2 * D - 1, 2 * D - 1);
  double cond = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto out = apply_bs(make_coherent(c.points()[i], D), js, cfg);
    avg += c.weights()[i] * out.entries();
    cond += c.weights()[i] * entropy_bits(out);
  }
  return entropy_bits(renormalized(avg)) - cond;
}

}  // namespace

TEST_CASE("von Neumann entropy") {
  CHECK(entropy_bits(make_coherent(Complex(2.0, 0.0), 40)) < 1e-9);
  CHECK(entropy_bits(make_vacuum(3)) == 0.0);
  for (double N : {0.1, 1.0, 3.0}) CHECK(std::abs(entropy_bits(make_thermal(N, 120)) - gordon_g(N)) < 1e-8);
  CHECK(std::abs(entropy_bits(make_thermal(1.0, 60)) - 2.0) < 1e-8);
  for (Index d : {2, 5, 16}) {
    const auto mixed = DensityMatrix::from_diagonal(Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d)));
    CHECK(std::abs(entropy_bits(mixed) - std::log2(static_cast<double>(d))) < 1e-12);
  }
  SUBCASE("non-diagonal pure state") {
    const auto r = von_neumann_entropy(make_dphav(Complex(0.7, 0.2), 0.0, 20));
    CHECK(r.value_bits < 1e-9);
    CHECK(r.clipped_mass <= 1e-9);
  }
}

TEST_CASE("entropy properties") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rho = oracle::random_state(rng, 8, 1 + trial % 8);
    const auto sigma = oracle::random_state(rng, 8, 1 + (trial * 3) % 8);
    const double s = entropy_bits(rho);
    CHECK(s >= 0.0);
    CHECK(std::abs(entropy_bits(phase_rotate(rho, u(rng))) - s) < 1e-10);
    const std::vector<double> w{0.5, 0.5};
    const std::vector<DensityMatrix> states{rho, sigma};
    CHECK(entropy_bits(mixture(w, states)) >= 0.5 * s + 0.5 * entropy_bits(sigma) - 1e-12);
    CHECK(s <= gordon_g(energy(rho)) + 1e-12);
  }
}

TEST_CASE("spectrum") {
  const auto ev = spectrum(make_thermal(0.5, 30));
  for (Index i = 1; i < ev.size(); ++i) CHECK(ev(i) >= ev(i - 1));
  CHECK(std::abs(ev.sum() - 1.0) < 1e-12);
  Eigen::VectorXd p(3);
  p << 0.5, 0.5, 0.0;
  CHECK(shannon_entropy_bits(p) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("relative entropy") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = oracle::random_state(rng, 6, 1 + trial % 6);
    const auto full = oracle::random_state(rng, 6, 6);
    CHECK(relative_entropy(rho, rho).value_bits < 1e-9);
    const auto mixed = DensityMatrix::from_diagonal(Eigen::VectorXd::Constant(6, 1.0 / 6.0));
    const auto d = relative_entropy(rho, mixed);
    CHECK_FALSE(d.support_mismatch);
    CHECK(std::abs(d.value_bits - (std::log2(6.0) - entropy_bits(rho))) < 1e-10);
    CHECK(relative_entropy(rho, full).value_bits >= 0.0);
  }
  const auto d01 = relative_entropy(make_fock(0, 3), make_fock(1, 3));
  CHECK(d01.support_mismatch);
  CHECK(d01.value_bits == std::numeric_limits<double>::infinity());
  // Non-diagonal disjoint supports.
  const auto c = make_coherent(Complex(0.5, 0.5), 30);
  Eigen::VectorXcd v = coherent_amplitudes(Complex(0.5, 0.5), 30);
  v /= v.norm();
  Eigen::MatrixXcd perp = Eigen::MatrixXcd::Identity(30, 30) - v * v.adjoint();
  perp /= perp.trace().real();
  CHECK(relative_entropy(c, DensityMatrix(0.5 * (perp + perp.adjoint()))).support_mismatch);
  CHECK_THROWS_AS(relative_entropy(make_vacuum(2), make_vacuum(3)), DimensionMismatch);
}

TEST_CASE("Gordon function") {
  CHECK(gordon_g(0.0) == 0.0);
  CHECK(std::abs(gordon_g(1.0) - 2.0) < 1e-15);
  CHECK(std::abs(gordon_g_inv(2.0) - 1.0) < 1e-12);
  CHECK(gordon_g_inv(0.0) == 0.0);
  CHECK_THROWS_AS(gordon_g(-1e-3), DomainError);
  CHECK_THROWS_AS(gordon_g_inv(-1.0), DomainError);
  double prev = -1.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = 100.0 * i / 20000.0;
    const double g = gordon_g(x);
    CHECK(g > prev);
    prev = g;
    CHECK(std::abs(gordon_g_inv(g) - x) < 1e-10);
  }
  for (double y : {1e-9, 1e-4, 0.3, 1.0, 5.0, 17.0, 40.0}) CHECK(std::abs(gordon_g(gordon_g_inv(y)) - y) <= 1e-12);
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(binary_entropy(0.11) - 0.49993) < 1e-4);
  CHECK_THROWS_AS(binary_entropy(1.5), DomainError);
}

TEST_CASE("Holevo quantity") {
  const Index D = 30;
  SUBCASE("single point") {
    const Constellation c({Complex(0.8, 0.1)}, {1.0});
    CHECK(holevo_chi(c, JammerSpec::thermal(0.5), {.tau = 0.5, .input_cutoff = D}) < 1e-10);
  }
  SUBCASE("two coherent points under pure loss") {
    // Outputs |b>, |-b> with overlap e^{-2|b|^2}; average state has eigenvalues (1 +- overlap)/2.
    double last = 0.0;
    for (double a : {0.5, 1.0, 2.0, 3.0}) {
      const Constellation c({Complex(a, 0.0), Complex(-a, 0.0)}, {0.5, 0.5});
      const double tau = 0.8;
      const double chi = holevo_chi(c, JammerSpec::vacuum(), {.tau = tau, .input_cutoff = 40});
      const double ov = std::exp(-2.0 * tau * a * a);
      CHECK(std::abs(chi - h2(0.5 * (1.0 + ov))) < 1e-9);
      CHECK(chi > last);
      last = chi;
    }
    CHECK(std::abs(last - 1.0) < 1e-9);
  }
  SUBCASE("pure outputs give the average entropy") {
    const Constellation c({Complex(0.3, 0.0), Complex(0.0, 0.9), Complex(-0.5, -0.5)}, {0.2, 0.5, 0.3});
    const auto b = holevo_breakdown(c, JammerSpec::vacuum(), {.tau = 0.6, .input_cutoff = D});
    CHECK(b.conditional_entropy < 1e-9);
    CHECK(std::abs(b.chi_bits - b.average_output_entropy) < 1e-9);
  }
  SUBCASE("matches the general two-mode path") {
    const Constellation c({Complex(0.5, 0.0), Complex(0.0, 0.5), Complex(-0.5, 0.0), Complex(0.3, -0.9), Complex(0.0, 0.0)},
                          {0.2, 0.2, 0.2, 0.3, 0.1});
    for (const auto& jam : {JammerSpec::thermal(0.5), JammerSpec::phav(0.7), JammerSpec::phav_mixture({{0.3, 0.4}, {1.0, 0.6}}),
                            JammerSpec::dphav(Complex(0.2, 0.1), 0.4)}) {
      CAPTURE(jam.label());
      const double chi = holevo_chi(c, jam, {.tau = 0.55, .input_cutoff = D});
      CHECK(chi >= 0.0);
      CHECK(std::abs(chi - chi_reference(c, jam, 0.55, D)) < 1e-7);
    }
  }
  SUBCASE("Gaussian constellation against a thermal jammer") {
    // Square grid with Gaussian weights; chi approaches g(tau E + tau' P) - g(tau' P).
    const double E = 0.5, P = 0.5, tau = 0.7, h = 0.25;
    std::vector<Complex> pts;
    std::vector<double> w;
    double total = 0.0;
    for (int i = -14; i <= 14; ++i) {
      for (int j = -14; j <= 14; ++j) {
        const Complex a(h * i, h * j);
        pts.push_back(a);
        w.push_back(std::exp(-std::norm(a) / E));
        total += w.back();
      }
    }
    for (auto& x : w) x /= total;
    const Constellation c(pts, w);
    const double chi = holevo_chi(c, JammerSpec::thermal(P), {.tau = tau, .input_cutoff = 40});
    const double target = gordon_g(tau * c.mean_energy() + (1 - tau) * P) - gordon_g((1 - tau) * P);
    CHECK(std::abs(chi - target) < 1e-3);
    CHECK(chi <= target + 1e-9);
  }
}

TEST_CASE("L and R functionals") {
  CHECK(L_lambda(make_vacuum(5), 0.3) < 1e-12);
  CHECK(R_lambda(make_vacuum(5), 0.3) < 1e-12);
  for (double tau : {0.2, 0.5, 0.9}) {
    for (double N : {0.3, 1.0}) {
      const auto th = make_thermal(N, 50, 1e-6);
      CHECK(std::abs(R_lambda(th, tau) - (1.0 - tau) * N) < 1e-6);
      CHECK(std::abs(L_lambda(th, tau) - tau * N) < 1e-6);
    }
  }
  CHECK_THROWS_AS(L_lambda(make_vacuum(2), 1.5), DomainError);
  // Mode-1 output is symmetric under swapping the inputs together with tau -> 1 - tau.
  std::mt19937_64 rng(2);
  const auto x = oracle::random_state(rng, 6, 2);
  CHECK(std::abs(L_lambda(x, 0.3) - R_lambda(x, 0.7)) < 1e-10);
}
