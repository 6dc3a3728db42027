#pragma once

#include <vector>

#include "mqclab/protocols.hpp"

namespace mqclab {

// Growth/decay competition model: clusters grow exponentially at rate alpha
// while the perturbation damps amplitudes in proportion to the coherence
// order, with b the single-quantum decay rate at full perturbation.
struct PhenoParams {
  double alpha = 0.0;  // 1/s
  double b = 0.0;      // 1/s
  double p = 0.0;
  double tau = 0.0;    // s, discrete step
  void validate() const;
};

// One step of the full (unapproximated) update map
//   K' = K (1 + alpha tau) / (1 + sqrt(K (1 + alpha tau)) p b tau)^2.
double update_map_step(double k, const PhenoParams& params);

// Closed-form stationary cluster size (alpha / (2 b p))^2.
double stationary_kloc(const PhenoParams& params);

struct PhenoPrediction {
  double k_loc = 0.0;
  std::vector<double> trajectory;  // steps + 1 values, starting at k0
};

// Iterates the update map; the trajectory approaches the fixed point
// monotonically from either side.
PhenoPrediction simulate_model(double k0, const PhenoParams& params, int steps);

struct PhenoFit {
  double alpha = 0.0;
  double b = 0.0;
  double residual = 0.0;  // rms misfit of the converged model
};

// Least-squares fit of simulate_model trajectories against the k_width
// series. tau is the series' sample interval; the start value is the first
// usable sample. Deterministic: alpha seeded from the early-time log slope,
// b from the tail plateau through the closed form.
PhenoFit fit_alpha_b(const ClusterSeries& series, double p);

// Several series sharing one (alpha, b); each keeps its own p and spacing.
PhenoFit fit_alpha_b_joint(const std::vector<const ClusterSeries*>& series_list,
                           const std::vector<double>& p_values);

}  // namespace mqclab
