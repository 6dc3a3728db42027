#include "mqclab/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "mqclab/errors.hpp"

namespace mqclab {

namespace {

constexpr double kRouteTol = 1e-9;

void cross_check_routes(const MqcSpectrum& direct, const DensityOperator& ref,
                        const DensityOperator& rho, int n_phases, int cycle) {
  const MqcSpectrum phase = mqc_spectrum_phase(ref, rho, n_phases);
  double max_diff = 0.0;
  for (int q = -direct.q_max(); q <= direct.q_max(); ++q) {
    max_diff = std::max(max_diff, std::abs(direct.at(q) - phase.at(q)));
  }
  if (max_diff > kRouteTol) {
    throw NumericalError("phase route disagrees with direct route by " +
                         std::to_string(max_diff) + " at cycle " +
                         std::to_string(cycle));
  }
}

SeriesSample make_sample(int cycle, double time_s, MqcSpectrum& spec,
                         const RunOptions& opts) {
  SeriesSample sample;
  sample.cycle = cycle;
  sample.time_s = time_s;
  spec.normalize();
  sample.total = spec.total();
  sample.k = cluster_size(spec);
  if (opts.spectrum_sink) opts.spectrum_sink(cycle, spec);
  return sample;
}

}  // namespace

ClusterSeries run_growth(const SpinSystem& sys, const ProtocolConfig& cfg,
                         const RunOptions& opts) {
  cfg.validate(sys.n_spins);
  if (cfg.tau_sigma != 0.0) {
    throw ValidationError("growth runs need tau_sigma = 0 (use run_perturbed)");
  }
  auto runner = make_runner(sys, cfg.precision);

  ClusterSeries out;
  out.p = 0.0;
  for (int n = 0; n <= cfg.n_cycles; n += cfg.sample_every) {
    DensityOperator rho = runner->h0_state(n * cfg.tau0);
    MqcSpectrum spec = mqc_spectrum_direct(rho);
    if (opts.cross_check) {
      cross_check_routes(spec, rho, rho, cfg.phases_for(sys.n_spins), n);
    }
    out.samples.push_back(make_sample(n, n * cfg.tau0, spec, opts));
  }
  out.k0 = out.samples.front().k.k_width;
  return out;
}

namespace {

ClusterSeries run_overlap_protocol(const SpinSystem& sys,
                                   const ProtocolConfig& cfg, int k0_cycles,
                                   const RunOptions& opts) {
  cfg.validate(sys.n_spins);
  if (!(cfg.tau_sigma > 0.0)) {
    throw ValidationError("perturbed runs need tau_sigma > 0 (use run_growth)");
  }
  if (k0_cycles < 0) throw ValidationError("k0_cycles must be nonnegative");

  auto runner = make_runner(sys, cfg.precision);
  const double t_prep = k0_cycles * cfg.tau0;
  runner->set_preparation(t_prep);
  runner->prepare_cycles(cfg.tau0, cfg.tau_sigma);

  ClusterSeries out;
  out.p = cfg.p();
  for (int n = 0; n <= cfg.n_cycles; n += cfg.sample_every) {
    DensityOperator rho = runner->cycle_state(n);
    // Reference: the ideal pure-H_0 trajectory at the matched cycle count.
    DensityOperator ref = runner->h0_state(t_prep + n * cfg.tau0);
    MqcSpectrum spec = mqc_spectrum_overlap(ref, rho);
    if (opts.cross_check) {
      cross_check_routes(spec, ref, rho, cfg.phases_for(sys.n_spins), n);
    }
    out.samples.push_back(make_sample(n, t_prep + n * cfg.tau_c(), spec, opts));
  }
  out.k0 = out.samples.front().k.k_width;
  return out;
}

}  // namespace

ClusterSeries run_perturbed(const SpinSystem& sys, const ProtocolConfig& cfg,
                            const RunOptions& opts) {
  return run_overlap_protocol(sys, cfg, 0, opts);
}

ClusterSeries run_equilibrium(const SpinSystem& sys, const ProtocolConfig& cfg,
                              int k0_cycles, const RunOptions& opts) {
  return run_overlap_protocol(sys, cfg, k0_cycles, opts);
}

PlateauReport detect_plateau(const ClusterSeries& series, int window,
                             double epsilon) {
  if (window < 3) throw ValidationError("plateau window must cover at least 3 samples");
  if (!(epsilon > 0.0)) throw ValidationError("plateau epsilon must be positive");

  std::vector<std::pair<int, double>> valid;  // (cycle, k_width)
  for (const SeriesSample& s : series.samples) {
    if (s.k.width_available) valid.emplace_back(s.cycle, s.k.k_width);
  }
  if (static_cast<int>(valid.size()) < window) {
    throw ValidationError("series too short: " + std::to_string(valid.size()) +
                          " usable samples, plateau window needs " +
                          std::to_string(window));
  }

  PlateauReport report;
  report.window = window;
  report.epsilon = epsilon;

  const std::size_t begin = valid.size() - static_cast<std::size_t>(window);
  double mean = 0.0;
  for (std::size_t i = begin; i < valid.size(); ++i) mean += valid[i].second;
  mean /= window;
  double max_dev = 0.0;
  for (std::size_t i = begin; i < valid.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(valid[i].second - mean));
  }
  if (!(mean > 0.0) || max_dev > epsilon * mean) {
    return report;  // not reached
  }

  report.reached = true;
  report.k_loc = mean;
  std::size_t onset = valid.size() - 1;
  while (onset > 0 && std::abs(valid[onset - 1].second - mean) <= epsilon * mean) {
    --onset;
  }
  report.onset_cycle = valid[onset].first;
  return report;
}

std::vector<SweepCell> sweep_kloc(const SpinSystem& sys,
                                  const ProtocolConfig& cfg_template,
                                  const std::vector<double>& p_list,
                                  int plateau_window, double plateau_epsilon,
                                  int n_threads,
                                  const CellOptionsFactory& cell_options) {
  for (double p : p_list) {
    if (!(p > 0.0 && p < 1.0)) {
      throw ValidationError("sweep weights must lie in (0, 1), got " +
                            std::to_string(p));
    }
  }

  std::vector<SweepCell> cells(p_list.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= p_list.size()) return;
      SweepCell& cell = cells[i];
      cell.p = p_list[i];
      try {
        ProtocolConfig cfg = cfg_template;
        cfg.tau_sigma = ProtocolConfig::tau_sigma_for_p(cfg.tau0, cell.p);
        const RunOptions opts = cell_options ? cell_options(i, cell.p) : RunOptions{};
        cell.series = run_perturbed(sys, cfg, opts);
        cell.plateau = detect_plateau(cell.series, plateau_window, plateau_epsilon);
      } catch (const std::exception& e) {
        cell.note = e.what();  // per-cell failure, sweep continues
        cell.plateau = PlateauReport{};
        cell.plateau.window = plateau_window;
        cell.plateau.epsilon = plateau_epsilon;
      }
    }
  };

  const int pool = std::max(1, std::min<int>(n_threads, static_cast<int>(p_list.size())));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }

  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cells[a].p < cells[b].p; });
  std::vector<SweepCell> sorted;
  sorted.reserve(cells.size());
  for (std::size_t i : order) sorted.push_back(std::move(cells[i]));
  return sorted;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw ValidationError("power-law fit needs at least 3 points");
  }
  for (const auto& [p, k] : points) {
    if (!(p > 0.0) || !(k > 0.0)) {
      throw ValidationError("power-law fit needs positive (p, k) pairs");
    }
  }
  const bool all_equal = std::all_of(points.begin(), points.end(), [&](const auto& pt) {
    return pt.first == points.front().first;
  });
  if (all_equal) throw ValidationError("power-law fit degenerate: all p equal");

  const std::size_t n = points.size();
  double sx = 0.0, sy = 0.0;
  for (const auto& [p, k] : points) {
    sx += std::log(p);
    sy += std::log(k);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [p, k] : points) {
    const double dx = std::log(p) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(k) - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ssr = 0.0;
  for (const auto& [p, k] : points) {
    const double r = std::log(k) - (my + fit.exponent * (std::log(p) - mx));
    ssr += r * r;
  }
  fit.stderr_exponent = n > 2 ? std::sqrt(ssr / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
  return fit;
}

}  // namespace mqclab
