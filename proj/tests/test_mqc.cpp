#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mqclab/errors.hpp"
#include "mqclab/mqc.hpp"
#include "oracle_two_spin.hpp"

using namespace mqclab;

namespace {

DensityOperator pair_state(double d, double t) {
  auto sys = make_network(NetworkKind::chain, 2, d);
  return evolve(thermal_state(build_basis(2)), make_propagator(build_h0(sys), t));
}

DensityOperator evolved_state(int n, std::uint64_t seed, double t, double p = 0.0) {
  auto sys = make_network(NetworkKind::complete_random, n, 3.0e3, seed);
  return evolve(thermal_state(build_basis(n)),
                make_propagator(build_heff(sys, p), t));
}

}  // namespace

TEST_CASE("decompose: thermal state is pure zero-quantum") {
  const auto parts = decompose_orders(thermal_state(build_basis(3)));
  CHECK(parts.size() == 1);
  CHECK(parts.count(0) == 1);
}

TEST_CASE("decompose: H0 evolution populates only even orders and reassembles") {
  const DensityOperator rho = evolved_state(5, 7, 3.0e-4);
  const auto parts = decompose_orders(rho);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(32, 32);
  for (const auto& [q, comp] : parts) {
    CHECK(q % 2 == 0);
    sum += comp;
  }
  CHECK((sum - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);
  // rho_q^dagger = rho_{-q}
  for (const auto& [q, comp] : parts) {
    REQUIRE(parts.count(-q) == 1);
    CHECK((comp.adjoint() - parts.at(-q)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("direct spectrum: thermal state is a delta at q = 0") {
  MqcSpectrum spec = mqc_spectrum_direct(thermal_state(build_basis(4)));
  CHECK(spec.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int q = 1; q <= 4; ++q) {
    CHECK(spec.at(q) == 0.0);
    CHECK(spec.at(-q) == 0.0);
  }
}

TEST_CASE("direct spectrum: two-spin closed form at 20 times") {
  const double d = 2.0 * M_PI * 2.0e3;
  for (int i = 1; i <= 20; ++i) {
    const double t = i * 1.0e-4 / 20.0;
    MqcSpectrum spec = mqc_spectrum_direct(pair_state(d, t));
    spec.normalize();
    const double c2 = std::cos(d * t) * std::cos(d * t);
    CHECK(spec.at(0) == doctest::Approx(c2).epsilon(1e-10));
    CHECK(spec.at(2) == doctest::Approx(0.5 * (1 - c2)).epsilon(1e-10));
    // and against the brute-force oracle
    const auto want = oracle::mqc(oracle::evolve(oracle::thermal(), oracle::h0(d), t));
    CHECK(spec.at(0) == doctest::Approx(want[2]).epsilon(1e-10));
    CHECK(spec.at(2) == doctest::Approx(want[4]).epsilon(1e-10));
    CHECK(spec.at(1) == 0.0);
  }
}

TEST_CASE("direct spectrum: dt = pi/4 gives (1/2, 1/4, 1/4)") {
  const double d = 1.0e4;
  MqcSpectrum spec = mqc_spectrum_direct(pair_state(d, M_PI / (4.0 * d)));
  spec.normalize();
  CHECK(spec.at(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(spec.at(2) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(spec.at(-2) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("sum rule: spectrum total equals the purity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const DensityOperator rho = evolved_state(6, seed, 4.0e-4, 0.2);
    const MqcSpectrum spec = mqc_spectrum_direct(rho);
    CHECK(std::abs(spec.sum() - rho.purity()) < 1e-10);
  }
}

TEST_CASE("overlap spectrum: collapses to the direct route when ref == rho") {
  const DensityOperator rho = evolved_state(6, 5, 5.0e-4);
  const MqcSpectrum direct = mqc_spectrum_direct(rho);
  const MqcSpectrum overlap = mqc_spectrum_overlap(rho, rho);
  for (int q = -6; q <= 6; ++q) {
    CHECK(overlap.at(q) == doctest::Approx(direct.at(q)).epsilon(1e-13));
  }
}

TEST_CASE("overlap spectrum: matches block-product evaluation for mixed states") {
  const DensityOperator ref = evolved_state(5, 9, 4.0e-4, 0.0);
  const DensityOperator rho = evolved_state(5, 9, 4.0e-4, 0.25);
  const MqcSpectrum overlap = mqc_spectrum_overlap(ref, rho);

  const auto ref_parts = decompose_orders(ref);
  const auto rho_parts = decompose_orders(rho);
  for (const auto& [q, comp] : ref_parts) {
    if (!rho_parts.count(q)) continue;
    const std::complex<double> tr = (comp.adjoint() * rho_parts.at(q)).trace();
    CHECK(std::abs(tr.imag()) < 1e-12);
    CHECK(overlap.at(q) == doctest::Approx(std::max(tr.real(), 0.0)).epsilon(1e-10));
  }
}

TEST_CASE("phase route: thermal state with a small grid") {
  const MqcSpectrum spec =
      mqc_spectrum_phase(thermal_state(build_basis(2)), thermal_state(build_basis(2)), 8);
  CHECK(spec.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec.at(2) == doctest::Approx(0.0));
}

TEST_CASE("phase route: matches the direct route for evolved states") {
  for (int n : {4, 6}) {
    const DensityOperator rho = evolved_state(n, 13, 6.0e-4);
    const MqcSpectrum direct = mqc_spectrum_direct(rho);
    const MqcSpectrum phase = mqc_spectrum_phase(rho, rho, 4 * n);
    for (int q = -n; q <= n; ++q) {
      CHECK(std::abs(phase.at(q) - direct.at(q)) < 1e-9);
    }
    // symmetry comes out exact
    for (int q = 1; q <= n; ++q) CHECK(phase.at(q) == phase.at(-q));
  }
}

TEST_CASE("phase route: matches the overlap route for perturbed pairs") {
  const DensityOperator ref = evolved_state(6, 17, 5.0e-4, 0.0);
  const DensityOperator rho = evolved_state(6, 17, 5.0e-4, 0.3);
  const MqcSpectrum overlap = mqc_spectrum_overlap(ref, rho);
  const MqcSpectrum phase = mqc_spectrum_phase(ref, rho, 24);
  for (int q = -6; q <= 6; ++q) {
    CHECK(std::abs(phase.at(q) - overlap.at(q)) < 1e-9);
  }
}

TEST_CASE("phase route: aliasing grid is rejected") {
  const DensityOperator rho = thermal_state(build_basis(4));
  CHECK_THROWS_AS(mqc_spectrum_phase(rho, rho, 8), ValidationError);
}

TEST_CASE("binomial profile: small-k ratios") {
  const MqcSpectrum one = binomial_profile(1);
  CHECK(one.at(0) / one.at(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(one.at(-1) == doctest::Approx(one.at(1)).epsilon(1e-12));

  const MqcSpectrum two = binomial_profile(2);
  CHECK(two.at(0) / two.at(2) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(two.at(1) / two.at(2) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(two.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial profile: Gaussian limit near the center") {
  const int k = 400;
  const MqcSpectrum spec = binomial_profile(k);
  for (int q = 2; q <= 20; q += 2) {
    const double ratio = spec.at(q) / spec.at(0) / std::exp(-double(q) * q / k);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("width: exact for exponential and Gaussian profiles") {
  MqcSpectrum expo(40);
  for (int q = -40; q <= 40; ++q) expo.at(q) = std::exp(-std::abs(q) / 4.0);
  CHECK(width_at_1_over_e(expo) == doctest::Approx(4.0).epsilon(1e-12));

  MqcSpectrum gauss(40);
  for (int q = -40; q <= 40; ++q) gauss.at(q) = std::exp(-double(q) * q / 16.0);
  CHECK(width_at_1_over_e(gauss) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("width: delta spectrum has no crossing") {
  MqcSpectrum delta(6);
  delta.at(0) = 1.0;
  CHECK_THROWS_AS(width_at_1_over_e(delta), NoCrossingError);
}

TEST_CASE("width recovers K for synthetic exponential profiles") {
  for (double k_true : {25.0, 100.0}) {
    const double sigma = std::sqrt(k_true);
    MqcSpectrum spec(80);
    for (int q = -80; q <= 80; ++q) spec.at(q) = std::exp(-std::abs(q) / sigma);
    spec.normalize();
    const ClusterEstimate est = cluster_size(spec);
    CHECK(est.k_width == doctest::Approx(k_true).epsilon(1e-9));
  }
}

TEST_CASE("cluster size: thermal state and the two-spin dt = pi/2 point") {
  MqcSpectrum delta = mqc_spectrum_direct(thermal_state(build_basis(4)));
  delta.normalize();
  const ClusterEstimate est = cluster_size(delta);
  CHECK(!est.width_available);
  CHECK(std::isnan(est.k_width));
  CHECK(est.k_m2_exp == 0.0);
  CHECK(est.k_m2_gauss == 0.0);

  const double d = 1.0e4;
  MqcSpectrum spec = mqc_spectrum_direct(pair_state(d, M_PI / (2.0 * d)));
  spec.normalize();
  CHECK(spec.second_moment() == doctest::Approx(4.0).epsilon(1e-10));
  const ClusterEstimate pair = cluster_size(spec);
  CHECK(pair.k_m2_exp == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(pair.k_m2_gauss == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("cluster size requires a normalized spectrum") {
  MqcSpectrum raw(4);
  raw.at(0) = 2.0;
  CHECK_THROWS_AS(cluster_size(raw), ValidationError);
}

TEST_CASE("fidelity profile: unity at p = 0, empty orders omitted, grids checked") {
  const DensityOperator rho = evolved_state(5, 21, 4.0e-4);
  MqcSpectrum ideal = mqc_spectrum_direct(rho);
  const auto f = fidelity_profile(ideal, ideal);
  CHECK(!f.empty());
  for (const auto& [q, v] : f) {
    CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ideal.at(q) >= 1e-12);
  }
  for (int q = 1; q <= 5; q += 2) CHECK(f.count(q) == 0);  // odd orders empty

  MqcSpectrum other(4);
  CHECK_THROWS_AS(fidelity_profile(other, ideal), ValidationError);
}

TEST_CASE("fidelity profile: perturbation only reduces populated orders") {
  const DensityOperator ref = evolved_state(6, 25, 6.0e-4, 0.0);
  const DensityOperator rho = evolved_state(6, 25, 6.0e-4, 0.2);
  const MqcSpectrum ideal = mqc_spectrum_direct(ref);
  const MqcSpectrum pert = mqc_spectrum_overlap(ref, rho);
  const auto f = fidelity_profile(pert, ideal);
  REQUIRE(!f.empty());
  double mean = 0.0;
  for (const auto& [q, v] : f) {
    CHECK(v <= 1.1);  // trend check, not a strict per-order bound
    mean += v;
  }
  mean /= static_cast<double>(f.size());
  CHECK(mean < 1.0);
}
