#include "mqclab/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "mqclab/engine.hpp"
#include "mqclab/errors.hpp"
#include "mqclab/evolution.hpp"
#include "mqclab/io.hpp"
#include "mqclab/mqc.hpp"
#include "mqclab/operators.hpp"
#include "mqclab/pheno.hpp"
#include "mqclab/protocols.hpp"

namespace mqclab {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Reference system for the desk-scale localization runs (checks 6 and 7).
// d0 is chosen so that the unperturbed cluster size still grows monotonically
// across the first 40 cycles at N = 12 while the perturbed runs saturate
// within the configured cycle budget.
// ---------------------------------------------------------------------------

constexpr int kBigN = 12;
constexpr double kBigD0 = 2.0e3;        // rad/s
constexpr std::uint64_t kBigSeed = 23;
constexpr double kTau0 = 57.6e-6;       // s
constexpr int kGrowthCycles = 40;
constexpr int kGrowthSampleEvery = 2;
constexpr int kPerturbedCycles = 240;
constexpr int kPerturbedSampleEvery = 12;
constexpr int kPlateauWindow = 10;
constexpr double kPlateauEpsilon = 0.02;
constexpr int kEquilibriumPrepCycles = 20;

struct CheckContext {
  std::ostringstream detail;
  // Results shared between the localization and equilibrium checks so the
  // expensive N = 12 run is not repeated.
  ClusterSeries shared_p03_series;
  bool shared_p03_ready = false;
};

using CheckFn = std::function<bool(CheckContext&)>;

SpinSystem big_system() {
  return make_network(NetworkKind::complete_random, kBigN, kBigD0, kBigSeed);
}

ProtocolConfig perturbed_config(double p) {
  ProtocolConfig cfg;
  cfg.tau0 = kTau0;
  cfg.tau_sigma = ProtocolConfig::tau_sigma_for_p(kTau0, p);
  cfg.n_cycles = kPerturbedCycles;
  cfg.sample_every = kPerturbedSampleEvery;
  return cfg;
}

bool spectra_rules_ok(const MqcSpectrum& spec, std::ostringstream& detail) {
  for (int q = 1; q <= spec.q_max(); q += 2) {
    if (spec.at(q) > 1e-12 || spec.at(-q) > 1e-12) {
      detail << "odd-order amplitude " << spec.at(q) << " at q=" << q << "; ";
      return false;
    }
  }
  for (int q = 1; q <= spec.q_max(); ++q) {
    if (std::abs(spec.at(q) - spec.at(-q)) > 1e-12) {
      detail << "asymmetry " << std::abs(spec.at(q) - spec.at(-q)) << " at q=" << q << "; ";
      return false;
    }
  }
  return true;
}

// --------------------------- check 1 ---------------------------------------

bool check_two_spin_analytic(CheckContext& ctx) {
  const double d = 2.0 * M_PI * 1.0e3;
  auto sys = make_network(NetworkKind::chain, 2, d);
  auto basis = build_basis(2);
  const Operator h0 = build_h0(sys);
  const DensityOperator rho0 = thermal_state(basis);

  double max_err = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double t = i * (2.0 * M_PI / d) / 20.0;  // dt spans (0, 2 pi]
    const DensityOperator rho = evolve(rho0, make_propagator(h0, t));
    MqcSpectrum spec = mqc_spectrum_direct(rho);
    spec.normalize();
    const double c2 = std::cos(d * t) * std::cos(d * t);
    const double s2 = 0.5 * std::sin(d * t) * std::sin(d * t);
    max_err = std::max(max_err, std::abs(spec.at(0) - c2));
    max_err = std::max(max_err, std::abs(spec.at(2) - s2));
    max_err = std::max(max_err, std::abs(spec.at(-2) - s2));
  }
  ctx.detail << "max |A - analytic| = " << max_err;
  return max_err < 1e-10;
}

// --------------------------- check 2 ---------------------------------------

bool check_sum_rule_echo(CheckContext& ctx) {
  auto sys = make_network(NetworkKind::complete_random, 8, 3.0e3, 11);
  auto basis = build_basis(8);
  const Operator h0 = build_h0(sys);
  const DensityOperator rho0 = thermal_state(basis);
  const Propagator cycle = make_propagator(h0, kTau0);

  double worst_sum = 0.0;
  DensityOperator rho = rho0;
  for (int n = 1; n <= 50; ++n) {
    rho = evolve(rho, cycle);
    const MqcSpectrum spec = mqc_spectrum_direct(rho);
    worst_sum = std::max(worst_sum, std::abs(spec.sum() - 1.0));
  }
  const DensityOperator back = backward_evolve(rho, sys, 50 * kTau0);
  const double echo_err = (back.matrix() - rho0.matrix()).cwiseAbs().maxCoeff();
  ctx.detail << "max |sum A - 1| = " << worst_sum << ", echo error = " << echo_err;
  return worst_sum < 1e-9 && echo_err < 1e-9;
}

// --------------------------- check 3 ---------------------------------------

bool check_selection_symmetry(CheckContext& ctx) {
  bool ok = true;
  // Odd N growth run.
  {
    auto sys = make_network(NetworkKind::complete_random, 7, 3.0e3, 5);
    ProtocolConfig cfg;
    cfg.tau0 = kTau0;
    cfg.n_cycles = 24;
    cfg.sample_every = 4;
    RunOptions opts;
    int checked = 0;
    opts.spectrum_sink = [&](int, const MqcSpectrum& spec) {
      ok = spectra_rules_ok(spec, ctx.detail) && ok;
      ++checked;
    };
    run_growth(sys, cfg, opts);
    ctx.detail << "growth spectra checked: " << checked << "; ";
  }
  // Even N perturbed run.
  {
    auto sys = make_network(NetworkKind::complete_random, 8, 3.0e3, 5);
    ProtocolConfig cfg = perturbed_config(0.3);
    cfg.n_cycles = 48;
    cfg.sample_every = 8;
    RunOptions opts;
    int checked = 0;
    opts.spectrum_sink = [&](int, const MqcSpectrum& spec) {
      ok = spectra_rules_ok(spec, ctx.detail) && ok;
      ++checked;
    };
    run_perturbed(sys, cfg, opts);
    ctx.detail << "perturbed spectra checked: " << checked;
  }
  return ok;
}

// --------------------------- check 4 ---------------------------------------

bool check_route_equivalence(CheckContext& ctx) {
  int runs = 0;
  for (int n : {6, 8}) {
    auto sys = make_network(NetworkKind::complete_random, n, 3.0e3, 7);
    RunOptions opts;
    opts.cross_check = true;  // throws beyond 1e-9
    ProtocolConfig grow;
    grow.tau0 = kTau0;
    grow.n_cycles = 20;
    grow.sample_every = 4;
    run_growth(sys, grow, opts);
    ++runs;
    for (double p : {0.108, 0.3}) {
      ProtocolConfig cfg = perturbed_config(p);
      cfg.n_cycles = 24;
      cfg.sample_every = 4;
      run_perturbed(sys, cfg, opts);
      ++runs;
    }
  }
  ctx.detail << runs << " cross-checked runs (N = 6, 8), phase grid 4N";
  return true;  // cross_check throws on any mismatch
}

// --------------------------- check 5 ---------------------------------------

bool check_trotter_gap(CheckContext& ctx) {
  auto sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 13);
  auto basis = build_basis(6);
  const DensityOperator rho0 = thermal_state(basis);

  const double total_time = 1.6e-3;
  const int base_cycles = 8;
  std::vector<double> errors;
  for (int level = 0; level < 5; ++level) {
    const int n_cycles = base_cycles << level;
    ProtocolConfig cfg;
    cfg.tau0 = 0.5 * total_time / n_cycles;
    cfg.tau_sigma = cfg.tau0;  // p = 1/2
    const DensityOperator concat =
        run_cycles(rho0, sys, cfg, n_cycles, CycleMode::concatenated);
    const DensityOperator eff =
        run_cycles(rho0, sys, cfg, n_cycles, CycleMode::effective);
    errors.push_back((concat.matrix() - eff.matrix()).norm());
  }

  bool ok = true;
  ctx.detail << "errors:";
  for (double e : errors) ctx.detail << " " << e;
  ctx.detail << ", ratios:";
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    ctx.detail << " " << ratio;
    if (ratio < 1.7 || ratio > 2.3) ok = false;
  }
  return ok;
}

// --------------------------- check 6 ---------------------------------------

bool check_localization(CheckContext& ctx) {
  const SpinSystem sys = big_system();

  // Unperturbed growth: nondecreasing width over the first 40 cycles.
  ProtocolConfig grow;
  grow.tau0 = kTau0;
  grow.n_cycles = kGrowthCycles;
  grow.sample_every = kGrowthSampleEvery;
  const ClusterSeries growth = run_growth(sys, grow);
  bool ok = true;
  double prev = -1.0;
  for (const SeriesSample& s : growth.samples) {
    if (!s.k.width_available) continue;
    if (prev >= 0.0 && s.k.k_width < prev * (1.0 - 1e-9)) {
      ctx.detail << "growth not monotone at cycle " << s.cycle << " ("
                 << prev << " -> " << s.k.k_width << "); ";
      ok = false;
    }
    prev = s.k.k_width;
  }
  ctx.detail << "growth K(40 cycles) = " << prev << "; ";

  // Perturbed runs: plateaus detected and ordered.
  std::vector<double> klocs;
  for (double p : {0.1, 0.3, 0.5}) {
    const ClusterSeries series = run_perturbed(sys, perturbed_config(p));
    const PlateauReport report =
        detect_plateau(series, kPlateauWindow, kPlateauEpsilon);
    ctx.detail << "p=" << p << ": k_loc=" << report.k_loc
               << (report.reached ? "" : " (no plateau)") << ", onset cycle "
               << report.onset_cycle << "; ";
    if (!report.reached) ok = false;
    klocs.push_back(report.k_loc);
    if (p == 0.3) {
      ctx.shared_p03_series = series;
      ctx.shared_p03_ready = true;
    }
  }
  if (!(klocs[0] > klocs[1] && klocs[1] > klocs[2])) {
    ctx.detail << "plateau ordering violated; ";
    ok = false;
  }
  return ok;
}

// --------------------------- check 7 ---------------------------------------

bool check_dynamic_equilibrium(CheckContext& ctx) {
  const SpinSystem sys = big_system();
  const ProtocolConfig cfg = perturbed_config(0.3);

  ClusterSeries from_below;
  if (ctx.shared_p03_ready) {
    from_below = ctx.shared_p03_series;  // same config as the k0 = 0 run
  } else {
    from_below = run_perturbed(sys, cfg);
  }
  const ClusterSeries from_above = run_equilibrium(sys, cfg, kEquilibriumPrepCycles);

  const PlateauReport below = detect_plateau(from_below, kPlateauWindow, kPlateauEpsilon);
  const PlateauReport above = detect_plateau(from_above, kPlateauWindow, kPlateauEpsilon);
  ctx.detail << "k0(prepared) = " << from_above.k0 << ", k_loc: " << below.k_loc
             << " (k0=0) vs " << above.k_loc << " (k0="
             << kEquilibriumPrepCycles << " cycles)";
  if (!below.reached || !above.reached) {
    ctx.detail << "; plateau missing";
    return false;
  }
  const double rel = std::abs(above.k_loc - below.k_loc) / below.k_loc;
  ctx.detail << ", relative gap = " << rel;
  return rel <= 0.15;
}

// --------------------------- check 8 ---------------------------------------

bool check_pheno_fixed_point(CheckContext& ctx) {
  PhenoParams params{1.0, 1.0, 0.1, 1e-3};  // alpha tau = 1e-3
  const double closed = stationary_kloc(params);
  if (std::abs(closed - 25.0) > 1e-9) {
    ctx.detail << "closed form gave " << closed;
    return false;
  }

  bool ok = true;
  for (double k0 : {25.0 / 4.0, 4.0 * 25.0}) {
    const PhenoPrediction pred = simulate_model(k0, params, 40000);
    const double final_k = pred.trajectory.back();
    ctx.detail << "k0=" << k0 << " -> " << final_k << "; ";
    if (std::abs(final_k - 25.0) > 0.25) ok = false;  // within 1 %
  }

  // Fit recovery on a noisy synthetic trajectory.
  const double alpha_true = 1.0, b_true = 0.8, p = 0.1, tau = 0.05;
  const PhenoPrediction clean =
      simulate_model(1.0, PhenoParams{alpha_true, b_true, p, tau}, 200);
  std::mt19937_64 rng(99);
  ClusterSeries synthetic;
  synthetic.p = p;
  for (std::size_t i = 0; i < clean.trajectory.size(); ++i) {
    SeriesSample s;
    s.cycle = static_cast<int>(i);
    s.time_s = static_cast<double>(i) * tau;
    const double noise = 1.0 + 0.01 * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    s.k.k_width = clean.trajectory[i] * noise;
    s.k.width_available = true;
    s.total = 1.0;
    synthetic.samples.push_back(s);
  }
  const PhenoFit fit = fit_alpha_b(synthetic, p);
  const double alpha_err = std::abs(fit.alpha - alpha_true) / alpha_true;
  const double b_err = std::abs(fit.b - b_true) / b_true;
  ctx.detail << "fit alpha=" << fit.alpha << " (err " << alpha_err
             << "), b=" << fit.b << " (err " << b_err << ")";
  if (alpha_err > 0.05 || b_err > 0.05) ok = false;
  return ok;
}

// --------------------------- check 9 ---------------------------------------

bool check_power_law_fit(CheckContext& ctx) {
  std::vector<std::pair<double, double>> points;
  for (double p : {0.025, 0.034, 0.065, 0.080, 0.108}) {
    points.emplace_back(p, 1.0 / (p * p));
  }
  const PowerLawFit fit = fit_power_law(points);
  ctx.detail << "exponent = " << fit.exponent << " +- " << fit.stderr_exponent;
  return std::abs(fit.exponent + 2.0) < 1e-10;
}

// --------------------------- check 10 --------------------------------------

bool check_determinism(CheckContext& ctx, const std::string& scratch_dir) {
  const SpinSystem sys = make_network(NetworkKind::complete_random, 6, 3.0e3, 17);
  ProtocolConfig cfg = perturbed_config(0.1);
  cfg.n_cycles = 40;
  cfg.sample_every = 4;
  const std::vector<double> p_list = {0.1, 0.3};

  const fs::path base = scratch_dir.empty()
                            ? fs::temp_directory_path() / "mqclab_selftest"
                            : fs::path(scratch_dir);
  std::vector<std::string> payloads;
  for (int round = 0; round < 2; ++round) {
    const fs::path dir = base / ("round" + std::to_string(round));
    fs::create_directories(dir);
    const auto cells = sweep_kloc(sys, cfg, p_list, 5, 0.05, 4);
    std::vector<SweepSummaryRow> rows;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      write_series(cells[i].series, (dir / ("series_" + std::to_string(i) + ".csv")).string(),
                   OutputFormat::csv);
      rows.push_back({cells[i].p, cells[i].plateau, false, {}});
    }
    write_sweep_summary(rows, (dir / "sweep_summary.csv").string(), OutputFormat::csv, false);

    std::ostringstream all;
    for (const auto& entry : {std::string("series_0.csv"), std::string("series_1.csv"),
                              std::string("sweep_summary.csv")}) {
      std::ifstream in(dir / entry, std::ios::binary);
      all << in.rdbuf() << '\0';
    }
    payloads.push_back(all.str());
  }
  fs::remove_all(base);
  const bool identical = payloads[0] == payloads[1];
  ctx.detail << (identical ? "repeated sweep outputs byte-identical"
                           : "outputs differ between repeated sweeps");
  return identical;
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& options,
                                      std::ostream& log) {
  use_single_threaded_blas();

  CheckContext ctx;
  std::vector<std::pair<std::string, CheckFn>> checks = {
      {"two_spin_analytic", check_two_spin_analytic},
      {"sum_rule_echo", check_sum_rule_echo},
      {"selection_symmetry", check_selection_symmetry},
      {"route_equivalence", check_route_equivalence},
      {"trotter_gap", check_trotter_gap},
      {"localization_plateaus", check_localization},
      {"dynamic_equilibrium", check_dynamic_equilibrium},
      {"pheno_fixed_point", check_pheno_fixed_point},
      {"power_law_fit", check_power_law_fit},
      {"determinism_sweep",
       [&](CheckContext& c) { return check_determinism(c, options.scratch_dir); }},
  };

  std::vector<CheckResult> results;
  for (auto& [name, fn] : checks) {
    if (!options.filter.empty()) {
      const bool wanted = std::any_of(
          options.filter.begin(), options.filter.end(),
          [&](const std::string& f) { return name.find(f) != std::string::npos; });
      if (!wanted) continue;
    }
    CheckResult result;
    result.name = name;
    ctx.detail.str("");
    const auto start = std::chrono::steady_clock::now();
    try {
      result.pass = fn(ctx);
      result.detail = ctx.detail.str();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << (result.pass ? "[PASS] " : "[FAIL] ") << result.name << " ("
        << result.seconds << " s)"
        << (result.detail.empty() ? "" : ": " + result.detail) << "\n";
    log.flush();
    results.push_back(std::move(result));
  }
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace mqclab
