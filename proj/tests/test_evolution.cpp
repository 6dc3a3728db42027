#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mqclab/errors.hpp"
#include "mqclab/evolution.hpp"
#include "oracle_two_spin.hpp"

using namespace mqclab;

namespace {

SpinSystem pair_system(double d) { return make_network(NetworkKind::chain, 2, d); }

DensityOperator random_evolved_state(int n, std::uint64_t seed, double t) {
  auto sys = make_network(NetworkKind::complete_random, n, 3.0e3, seed);
  return evolve(thermal_state(build_basis(n)), make_propagator(build_h0(sys), t));
}

}  // namespace

TEST_CASE("thermal state: one spin") {
  const DensityOperator rho = thermal_state(build_basis(1));
  const double want = 0.5 / std::sqrt(0.5);
  CHECK(rho.matrix()(0, 0).real() == doctest::Approx(-want));
  CHECK(rho.matrix()(1, 1).real() == doctest::Approx(want));
  CHECK(rho.purity() == doctest::Approx(1.0));
}

TEST_CASE("thermal state: two spins, diagonal proportional to (-1, 0, 0, 1)") {
  const DensityOperator rho = thermal_state(build_basis(2));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(rho.matrix()(0, 0).real() == doctest::Approx(-s));
  CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.0));
  CHECK(rho.matrix()(2, 2).real() == doctest::Approx(0.0));
  CHECK(rho.matrix()(3, 3).real() == doctest::Approx(s));
  CHECK((rho.matrix() - oracle::thermal()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("thermal state: traceless with unit purity for any N") {
  for (int n : {1, 3, 6, 9}) {
    const DensityOperator rho = thermal_state(build_basis(n));
    CHECK(std::abs(rho.matrix().trace()) < 1e-12);
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("propagator: t = 0 is the identity") {
  auto sys = pair_system(1.0e3);
  const Propagator u = make_propagator(build_h0(sys), 0.0);
  CHECK((u.unitary - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagator: U(t) U(-t) = 1 and unitarity") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 9);
  const Operator h = build_heff(sys, 0.3);
  const Propagator fwd = make_propagator(h, 1.7e-4);
  const Propagator bwd = make_propagator(h, -1.7e-4);
  const auto dim = fwd.unitary.rows();
  CHECK((fwd.unitary * bwd.unitary - Eigen::MatrixXcd::Identity(dim, dim))
            .cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fwd.unitary * fwd.unitary.adjoint() - Eigen::MatrixXcd::Identity(dim, dim))
            .cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("evolution matches the independent two-spin oracle") {
  const double d = 2.0 * M_PI * 1.5e3;
  auto sys = pair_system(d);
  const Operator h0 = build_h0(sys);
  const DensityOperator rho0 = thermal_state(build_basis(2));
  for (double frac : {0.13, 0.37, 0.5, 0.81}) {
    const double t = frac * M_PI / d;
    const DensityOperator rho = evolve(rho0, make_propagator(h0, t));
    const oracle::M4 want = oracle::evolve(oracle::thermal(), oracle::h0(d), t);
    CHECK((rho.matrix() - want).cwiseAbs().maxCoeff() < 1e-12);
    // diagonal part ~ cos(dt) (|uu><uu| - |dd><dd|)
    const double c = std::cos(d * t) / std::sqrt(2.0);
    CHECK(rho.matrix()(3, 3).real() == doctest::Approx(c).epsilon(1e-10));
    CHECK(rho.matrix()(0, 0).real() == doctest::Approx(-c).epsilon(1e-10));
  }
}

TEST_CASE("evolution at dt = pi/2 moves all weight onto the double-quantum corner") {
  const double d = 1.0e4;
  auto sys = pair_system(d);
  const DensityOperator rho =
      evolve(thermal_state(build_basis(2)),
             make_propagator(build_h0(sys), M_PI / (2.0 * d)));
  CHECK(std::abs(rho.matrix()(3, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(rho.matrix()(0, 0)) < 1e-10);
  CHECK(std::abs(rho.matrix()(3, 3)) < 1e-10);
}

TEST_CASE("evolve: identity propagator returns the input, purity conserved") {
  const DensityOperator rho = random_evolved_state(5, 3, 2.0e-4);
  Propagator id;
  id.unitary = Eigen::MatrixXcd::Identity(32, 32);
  const DensityOperator same = evolve(rho, id);
  CHECK((same.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);

  auto sys = make_network(NetworkKind::complete_random, 5, 3.0e3, 3);
  const DensityOperator moved = evolve(rho, make_propagator(build_hdd(sys), 5.0e-4));
  CHECK(std::abs(moved.purity() - rho.purity()) < 1e-10);
}

TEST_CASE("evolve: dimension mismatch is rejected") {
  const DensityOperator rho = thermal_state(build_basis(3));
  Propagator wrong;
  wrong.unitary = Eigen::MatrixXcd::Identity(4, 4);
  CHECK_THROWS_AS(evolve(rho, wrong), ValidationError);
}

TEST_CASE("z_rotate: identities and invariance") {
  const DensityOperator rho = random_evolved_state(4, 8, 3.0e-4);

  const DensityOperator same = z_rotate(rho, 0.0);
  CHECK((same.matrix() - rho.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const DensityOperator turn = z_rotate(rho, 2.0 * M_PI);
  CHECK((turn.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  const DensityOperator rho0 = thermal_state(build_basis(4));
  const DensityOperator still = z_rotate(rho0, 1.234);
  CHECK((still.matrix() - rho0.matrix()).cwiseAbs().maxCoeff() < 1e-15);

  const DensityOperator rot = z_rotate(rho, 0.7);
  CHECK(std::abs(rot.purity() - rho.purity()) < 1e-10);
}

TEST_CASE("z_rotate agrees with conjugation by the total-Iz phase operator") {
  const int n = 4;
  const DensityOperator rho = random_evolved_state(n, 2, 2.5e-4);
  auto basis = build_basis(n);
  const double phi = 0.9;

  Eigen::MatrixXcd iz = Eigen::MatrixXcd::Zero(16, 16);
  for (std::size_t s = 0; s < 16; ++s) iz(s, s) = basis->m(s);
  // exp(-i Iz (-phi)) = exp(+i phi Iz)
  const DensityOperator via_evolve = evolve(rho, make_propagator(Operator(iz, true), -phi));
  const DensityOperator via_rotate = z_rotate(rho, phi);
  CHECK((via_evolve.matrix() - via_rotate.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("run_cycles: tau_sigma = 0 makes both modes coincide") {
  auto sys = make_network(NetworkKind::complete_random, 5, 3.0e3, 21);
  const DensityOperator rho0 = thermal_state(build_basis(5));
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;
  cfg.tau_sigma = 0.0;
  const DensityOperator a = run_cycles(rho0, sys, cfg, 7, CycleMode::concatenated);
  const DensityOperator b = run_cycles(rho0, sys, cfg, 7, CycleMode::effective);
  CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("run_cycles: composability is exact") {
  auto sys = make_network(NetworkKind::complete_random, 5, 3.0e3, 4);
  const DensityOperator rho0 = thermal_state(build_basis(5));
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;
  cfg.tau_sigma = 20.0e-6;
  const DensityOperator whole = run_cycles(rho0, sys, cfg, 5, CycleMode::concatenated);
  const DensityOperator split = run_cycles(
      run_cycles(rho0, sys, cfg, 2, CycleMode::concatenated), sys, cfg, 3,
      CycleMode::concatenated);
  CHECK((whole.matrix() - split.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("echo: forward then backward restores the thermal state at p = 0") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 6);
  const DensityOperator rho0 = thermal_state(build_basis(6));
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;
  const DensityOperator fwd = run_cycles(rho0, sys, cfg, 10, CycleMode::concatenated);
  const DensityOperator back = backward_evolve(fwd, sys, 10 * cfg.tau0);
  CHECK((back.matrix() - rho0.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("echo: t = 0 backward evolution is the identity") {
  const DensityOperator rho = random_evolved_state(4, 12, 4.0e-4);
  auto sys = make_network(NetworkKind::complete_random, 4, 3.0e3, 12);
  const DensityOperator same = backward_evolve(rho, sys, 0.0);
  CHECK((same.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("echo deficit appears for p > 0 and grows with p") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 30);
  const DensityOperator rho0 = thermal_state(build_basis(6));
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;

  auto deficit = [&](double p) {
    ProtocolConfig c = cfg;
    c.tau_sigma = ProtocolConfig::tau_sigma_for_p(c.tau0, p);
    const DensityOperator fwd = run_cycles(rho0, sys, c, 12, CycleMode::concatenated);
    const DensityOperator back = backward_evolve(fwd, sys, 12 * c.tau0);
    return (back.matrix() - rho0.matrix()).cwiseAbs().maxCoeff();
  };

  const double weak = deficit(0.1), strong = deficit(0.4);
  CHECK(weak > 1e-6);
  CHECK(strong > weak);
}
