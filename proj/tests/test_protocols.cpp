#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mqclab/errors.hpp"
#include "mqclab/evolution.hpp"
#include "mqclab/mqc.hpp"
#include "mqclab/protocols.hpp"

using namespace mqclab;

namespace {

ProtocolConfig base_config() {
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;
  cfg.n_cycles = 24;
  cfg.sample_every = 4;
  return cfg;
}

ProtocolConfig perturbed_config(double p, int n_cycles, int sample_every) {
  ProtocolConfig cfg;
  cfg.tau0 = 57.6e-6;
  cfg.tau_sigma = ProtocolConfig::tau_sigma_for_p(cfg.tau0, p);
  cfg.n_cycles = n_cycles;
  cfg.sample_every = sample_every;
  return cfg;
}

}  // namespace

TEST_CASE("growth: cycle 0 is a delta spectrum, totals conserved") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 3);
  const ClusterSeries series = run_growth(sys, base_config());
  REQUIRE(series.samples.size() == 7);
  CHECK(!series.samples.front().k.width_available);
  CHECK(std::isnan(series.k0));
  for (const SeriesSample& s : series.samples) {
    CHECK(std::abs(s.total - 1.0) < 1e-9);
  }
  CHECK(series.samples.front().cycle == 0);
  CHECK(series.samples.back().cycle == 24);
}

TEST_CASE("growth: width estimates grow at N = 10 over 40 cycles") {
  auto sys = make_network(NetworkKind::complete_random, 10, 2.0e3, 41);
  ProtocolConfig cfg = base_config();
  cfg.n_cycles = 40;
  cfg.sample_every = 2;
  const ClusterSeries series = run_growth(sys, cfg);
  double prev = -1.0;
  int checked = 0;
  for (const SeriesSample& s : series.samples) {
    if (!s.k.width_available) continue;
    if (prev >= 0.0) {
      CHECK(s.k.k_width >= prev * (1.0 - 1e-9));
      ++checked;
    }
    prev = s.k.k_width;
  }
  CHECK(checked >= 10);
}

TEST_CASE("growth rejects a perturbed config") {
  auto sys = make_network(NetworkKind::complete_random, 4, 3.0e3, 1);
  CHECK_THROWS_AS(run_growth(sys, perturbed_config(0.1, 8, 2)), ValidationError);
}

TEST_CASE("perturbed run matches a hand-built dense reference at N = 6") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 15);
  ProtocolConfig cfg = perturbed_config(0.25, 12, 4);
  cfg.precision = Precision::float64;
  const ClusterSeries series = run_perturbed(sys, cfg);

  auto basis = build_basis(6);
  const DensityOperator rho0 = thermal_state(basis);
  const Operator h0 = build_h0(sys);
  for (const SeriesSample& s : series.samples) {
    const DensityOperator rho = run_cycles(rho0, sys, cfg, s.cycle, CycleMode::concatenated);
    const DensityOperator ref = evolve(rho0, make_propagator(h0, s.cycle * cfg.tau0));
    MqcSpectrum spec = mqc_spectrum_overlap(ref, rho);
    spec.normalize();
    CHECK(std::abs(s.total - spec.total()) < 1e-9);
    const ClusterEstimate est = cluster_size(spec);
    if (est.width_available) {
      CHECK(s.k.k_width == doctest::Approx(est.k_width).epsilon(1e-8));
    }
    CHECK(s.k.k_m2_exp == doctest::Approx(est.k_m2_exp).epsilon(1e-8));
  }
}

TEST_CASE("perturbed run: sampled values do not depend on the sampling rate") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 8);
  const ClusterSeries coarse = run_perturbed(sys, perturbed_config(0.2, 16, 4));
  const ClusterSeries fine = run_perturbed(sys, perturbed_config(0.2, 16, 2));
  for (const SeriesSample& c : coarse.samples) {
    bool found = false;
    for (const SeriesSample& f : fine.samples) {
      if (f.cycle != c.cycle) continue;
      found = true;
      CHECK(f.total == c.total);  // bit-exact: sampling is read-only
      if (c.k.width_available) CHECK(f.k.k_width == c.k.k_width);
      CHECK(f.k.k_m2_exp == c.k.k_m2_exp);
    }
    CHECK(found);
  }
}

TEST_CASE("perturbed run: repeated runs are bit-identical") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 19);
  const ClusterSeries a = run_perturbed(sys, perturbed_config(0.3, 16, 4));
  const ClusterSeries b = run_perturbed(sys, perturbed_config(0.3, 16, 4));
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].total == b.samples[i].total);
    CHECK(a.samples[i].k.k_m2_exp == b.samples[i].k.k_m2_exp);
  }
}

TEST_CASE("perturbed run: pure dipolar limit keeps everything zero-quantum") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 10);
  // tau0 -> 0: the cycle is H_dd apart from a vanishing H_0 sliver.
  ProtocolConfig cfg;
  cfg.tau0 = 1.0e-12;
  cfg.tau_sigma = 57.6e-6;
  cfg.n_cycles = 12;
  cfg.sample_every = 4;

  // The state itself never leaves zero quantum: H_dd conserves M.
  auto basis = build_basis(6);
  const DensityOperator rho =
      run_cycles(thermal_state(basis), sys, cfg, 12, CycleMode::concatenated);
  const MqcSpectrum spec = mqc_spectrum_direct(rho);
  for (int q = 1; q <= 6; ++q) {
    CHECK(spec.at(q) < 1e-9);
    CHECK(spec.at(-q) < 1e-9);
  }

  const ClusterSeries series = run_perturbed(sys, cfg);
  for (const SeriesSample& s : series.samples) {
    CHECK(!s.k.width_available);      // delta-like overlap spectrum
    CHECK(s.k.k_m2_exp < 1e-9);       // cluster stays at its initial size
  }
}

TEST_CASE("equilibrium: k0_cycles = 0 reproduces run_perturbed exactly") {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 22);
  const ProtocolConfig cfg = perturbed_config(0.25, 16, 4);
  const ClusterSeries direct = run_perturbed(sys, cfg);
  const ClusterSeries prepared = run_equilibrium(sys, cfg, 0);
  REQUIRE(direct.samples.size() == prepared.samples.size());
  for (std::size_t i = 0; i < direct.samples.size(); ++i) {
    CHECK(direct.samples[i].total == prepared.samples[i].total);
    CHECK(direct.samples[i].k.k_m2_exp == prepared.samples[i].k.k_m2_exp);
  }
}

TEST_CASE("equilibrium: preparation records a nontrivial K0") {
  auto sys = make_network(NetworkKind::complete_random, 8, 3.0e3, 33);
  const ClusterSeries series = run_equilibrium(sys, perturbed_config(0.3, 16, 4), 12);
  CHECK(series.samples.front().cycle == 0);
  CHECK(series.k0 > 1.0);  // prepared cluster, not a delta
  CHECK(series.samples.front().time_s == doctest::Approx(12 * 57.6e-6));
}

TEST_CASE("plateau detection: constant, growing and noisy-converged series") {
  auto make_series = [](const std::vector<double>& ks) {
    ClusterSeries s;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      SeriesSample sample;
      sample.cycle = static_cast<int>(i);
      sample.time_s = static_cast<double>(i);
      sample.k.k_width = ks[i];
      sample.k.width_available = true;
      s.samples.push_back(sample);
    }
    return s;
  };

  // constant
  const auto flat = make_series(std::vector<double>(12, 7.5));
  const PlateauReport flat_report = detect_plateau(flat, 10, 0.02);
  CHECK(flat_report.reached);
  CHECK(flat_report.k_loc == doctest::Approx(7.5));
  CHECK(flat_report.onset_cycle == 0);

  // strict exponential growth
  std::vector<double> growing;
  for (int i = 0; i < 16; ++i) growing.push_back(std::exp(0.3 * i));
  CHECK(!detect_plateau(make_series(growing), 10, 0.02).reached);

  // converging to 25 with 1 % noise
  std::mt19937_64 rng(7);
  std::vector<double> noisy;
  for (int i = 0; i < 40; ++i) {
    const double u = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    noisy.push_back(25.0 * (1.0 - std::exp(-(i + 1) / 5.0)) * (1.0 + 0.01 * u));
  }
  const PlateauReport report = detect_plateau(make_series(noisy), 10, 0.02);
  CHECK(report.reached);
  CHECK(std::abs(report.k_loc - 25.0) < 0.5);

  // too short
  CHECK_THROWS_AS(detect_plateau(make_series({1.0, 2.0}), 10, 0.02), ValidationError);
  // window precondition
  CHECK_THROWS_AS(detect_plateau(flat, 2, 0.02), ValidationError);
}

TEST_CASE("sweep: duplicates kept, results sorted, failures contained") {
  auto sys = make_network(NetworkKind::complete_random, 5, 3.0e3, 12);
  ProtocolConfig cfg = perturbed_config(0.2, 8, 2);  // too short for window 10
  const auto cells = sweep_kloc(sys, cfg, {0.3, 0.1, 0.3}, 10, 0.02, 2);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].p == 0.1);
  CHECK(cells[1].p == 0.3);
  CHECK(cells[2].p == 0.3);
  for (const SweepCell& cell : cells) {
    CHECK(!cell.note.empty());  // plateau window cannot be satisfied
    CHECK(!cell.plateau.reached);
  }
  CHECK_THROWS_AS(sweep_kloc(sys, cfg, {0.0}, 10, 0.02, 1), ValidationError);
}

TEST_CASE("sweep: thread count does not change the numbers") {
  auto sys = make_network(NetworkKind::complete_random, 5, 3.0e3, 14);
  ProtocolConfig cfg = perturbed_config(0.2, 24, 2);
  const auto serial = sweep_kloc(sys, cfg, {0.1, 0.2, 0.4}, 5, 0.1, 1);
  const auto parallel = sweep_kloc(sys, cfg, {0.1, 0.2, 0.4}, 5, 0.1, 3);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].p == parallel[i].p);
    REQUIRE(serial[i].series.samples.size() == parallel[i].series.samples.size());
    for (std::size_t j = 0; j < serial[i].series.samples.size(); ++j) {
      CHECK(serial[i].series.samples[j].total == parallel[i].series.samples[j].total);
    }
  }
}

TEST_CASE("power-law fit: exact data, model shape, degenerate input") {
  std::vector<std::pair<double, double>> exact;
  for (double p : {0.025, 0.034, 0.065, 0.080, 0.108}) exact.emplace_back(p, std::pow(p, -2.0));
  const PowerLawFit fit = fit_power_law(exact);
  CHECK(std::abs(fit.exponent + 2.0) < 1e-10);
  CHECK(fit.stderr_exponent < 1e-10);

  // k_loc = (alpha / (2 b p))^2 is a pure p^-2 law
  std::vector<std::pair<double, double>> model;
  const double alpha = 1.3, b = 0.7;
  for (double p : {0.05, 0.1, 0.2, 0.4}) {
    const double root = alpha / (2.0 * b * p);
    model.emplace_back(p, root * root);
  }
  CHECK(std::abs(fit_power_law(model).exponent + 2.0) < 1e-10);

  CHECK_THROWS_AS(fit_power_law({{0.1, 1.0}, {0.1, 2.0}, {0.1, 3.0}}), ValidationError);
  CHECK_THROWS_AS(fit_power_law({{0.1, 1.0}, {0.2, 2.0}}), ValidationError);
}
