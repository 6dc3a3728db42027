#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mqclab/engine.hpp"
#include "mqclab/mqc.hpp"
#include "mqclab/protocol_config.hpp"
#include "mqclab/spin_system.hpp"

namespace mqclab {

struct SeriesSample {
  int cycle = 0;        // cycles elapsed in the run's own clock
  double time_s = 0.0;  // total simulated forward time
  ClusterEstimate k;
  double total = 0.0;   // sum of amplitudes before per-sample normalization
};

struct ClusterSeries {
  std::vector<SeriesSample> samples;
  double p = 0.0;
  double k0 = std::numeric_limits<double>::quiet_NaN();
};

struct RunOptions {
  // Re-derive each sampled spectrum through the phase-encoding route and
  // require agreement with the direct route to 1e-9.
  bool cross_check = false;
  // Receives each normalized sampled spectrum (drives spectrum dumping).
  std::function<void(int cycle, const MqcSpectrum&)> spectrum_sink;
};

// Unperturbed cluster growth under H_0; requires tau_sigma = 0. Samples the
// spectrum every cfg.sample_every cycles from cycle 0 to cfg.n_cycles.
ClusterSeries run_growth(const SpinSystem& sys, const ProtocolConfig& cfg,
                         const RunOptions& opts = {});

// Perturbed growth (tau_sigma > 0): concatenated cycles forward, the
// unperturbed H_0 trajectory at matched cycle counts as reference, and the
// order-resolved overlap of the two as the sampled spectrum, normalized per
// sample.
ClusterSeries run_perturbed(const SpinSystem& sys, const ProtocolConfig& cfg,
                            const RunOptions& opts = {});

// k0_cycles of pure H_0 preparation (recording K0), then the perturbed run;
// the reference trajectory covers the matched total duration.
ClusterSeries run_equilibrium(const SpinSystem& sys, const ProtocolConfig& cfg,
                              int k0_cycles, const RunOptions& opts = {});

struct PlateauReport {
  bool reached = false;
  double k_loc = std::numeric_limits<double>::quiet_NaN();
  int onset_cycle = -1;
  int window = 0;
  double epsilon = 0.0;
};

// A plateau is reached when the last `window` width estimates deviate from
// their mean by at most epsilon (relative); k_loc is that mean and the onset
// is the earliest sample from which the series stays within the band.
PlateauReport detect_plateau(const ClusterSeries& series, int window,
                             double epsilon);

struct SweepCell {
  double p = 0.0;
  PlateauReport plateau;
  ClusterSeries series;
  std::string note;  // per-cell failure description, empty on success
};

using CellOptionsFactory = std::function<RunOptions(std::size_t index, double p)>;

// Independent run_perturbed + detect_plateau per entry of p_list (duplicates
// kept). Cells run on a small worker pool; results are sorted by p and are
// independent of scheduling order.
std::vector<SweepCell> sweep_kloc(const SpinSystem& sys,
                                  const ProtocolConfig& cfg_template,
                                  const std::vector<double>& p_list,
                                  int plateau_window = 10,
                                  double plateau_epsilon = 0.02,
                                  int n_threads = 1,
                                  const CellOptionsFactory& cell_options = {});

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double stderr_exponent = 0.0;
};

// Least squares of log k against log p.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace mqclab
