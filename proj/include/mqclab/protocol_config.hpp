#pragma once

#include <string>

namespace mqclab {

// concatenated: per cycle apply exp(-i H_dd tau_sigma) exp(-i H_0 tau0),
//               the direct simulation of the alternating sequence.
// effective:    per cycle apply exp(-i H_eff tau_c), the short-cycle limit.
enum class CycleMode { concatenated, effective };

CycleMode parse_cycle_mode(std::string_view name);
const char* to_string(CycleMode mode);

// float32 halves the cost of the large-N propagation kernels; analysis
// always runs in double on the assembled states. automatic picks float32
// from n_spins >= 12, where the dense double path stops being interactive.
enum class Precision { automatic, float64, float32 };

Precision parse_precision(std::string_view name);
const char* to_string(Precision precision);

struct ProtocolConfig {
  double tau0 = 57.6e-6;  // s, cycle time of the double-quantum block
  double tau_sigma = 0.0; // s, dipolar perturbation block per cycle
  int n_cycles = 40;
  int n0_cycles = 0;      // preparation cycles (pure H_0) before the run
  int n_phases = 0;       // 0 = choose 4 * n_spins at run time
  int sample_every = 1;   // cycles between spectrum samples
  CycleMode mode = CycleMode::concatenated;
  Precision precision = Precision::automatic;

  double p() const { return tau_sigma <= 0.0 ? 0.0 : tau_sigma / (tau0 + tau_sigma); }
  double tau_c() const { return tau0 + tau_sigma; }
  int phases_for(int n_spins) const { return n_phases > 0 ? n_phases : 4 * n_spins; }

  // tau_sigma that realises perturbation weight p at fixed tau0.
  static double tau_sigma_for_p(double tau0, double p);

  // Throws ValidationError on inconsistent settings (anti-aliasing rule,
  // nonpositive timings, bad counts).
  void validate(int n_spins) const;
};

}  // namespace mqclab
