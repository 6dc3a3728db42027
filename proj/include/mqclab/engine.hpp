#pragma once

#include <memory>

#include "mqclab/evolution.hpp"
#include "mqclab/protocol_config.hpp"
#include "mqclab/spin_system.hpp"

namespace mqclab {

// Fast forward-trajectory producer behind the protocol runners.
//
// H_0 and H_dd both preserve the parity of the number of up spins and the
// thermal state is diagonal, so the whole pipeline lives in two parity
// sectors of dimension 2^(N-1); propagating per sector quarters the dense
// matrix work. Within a sector states are ordered by M, which makes H_dd
// block diagonal and keeps the thermal columns contiguous. Sampled states
// are assembled back into ordinary double-precision DensityOperators, so all
// analysis downstream is precision-independent.
//
// Cycle states U(n) = P^n are built from cached squarings of the cycle
// propagator with a fixed product order that depends only on n, never on the
// sampling schedule.
class Runner {
 public:
  virtual ~Runner() = default;

  virtual const BasisPtr& basis() const = 0;

  // State after pure double-quantum evolution of duration t.
  virtual DensityOperator h0_state(double t) = 0;

  // Installs the cycle propagator exp(-i H_dd tau_sigma) exp(-i H_0 tau0).
  virtual void prepare_cycles(double tau0, double tau_sigma) = 0;

  // Preparation block exp(-i H_0 t_prep) applied before the cycles;
  // t_prep = 0 restores the unprepared runner exactly.
  virtual void set_preparation(double t_prep) = 0;

  // State after n cycles acting on the (possibly prepared) thermal state.
  virtual DensityOperator cycle_state(int n) = 0;
};

std::unique_ptr<Runner> make_runner(const SpinSystem& sys,
                                    Precision precision = Precision::automatic);

// Pins the BLAS pool to one thread so that results depend only on config and
// seeds. Called once by the runners and the CLI.
void use_single_threaded_blas();

}  // namespace mqclab
