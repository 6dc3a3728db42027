#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "mqclab/basis.hpp"
#include "mqclab/operators.hpp"
#include "mqclab/protocol_config.hpp"
#include "mqclab/spin_system.hpp"

namespace mqclab {

// Deviation density operator: dense Hermitian, traceless (the identity part
// of the thermal state carries no signal and is dropped).
class DensityOperator {
 public:
  DensityOperator(Eigen::MatrixXcd matrix, BasisPtr basis);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const Basis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }

  // Tr{rho^2}; cached after the first call.
  double purity() const;

 private:
  Eigen::MatrixXcd matrix_;
  BasisPtr basis_;
  mutable std::optional<double> purity_;
};

// rho_0 ~ I_z: diagonal M values scaled so that Tr{rho_0^2} = 1.
DensityOperator thermal_state(BasisPtr basis);

struct Propagator {
  Eigen::MatrixXcd unitary;
  double duration = 0.0;  // s
};

// U = exp(-i H t) through the Hamiltonian's cached eigendecomposition, so
// every duration served by the same Operator reuses one factorisation.
Propagator make_propagator(const Operator& h, double t);

// U rho U^dagger. Throws ValidationError on dimension mismatch.
DensityOperator evolve(const DensityOperator& rho, const Propagator& u);

// Coherence-order phase encoding: rho_ij <- rho_ij exp(i phi (M_i - M_j)).
// Elementwise, no matrix products involved.
DensityOperator z_rotate(const DensityOperator& rho, double phi);

// n_cycles applications of the cycle propagator (computed once per call):
//   concatenated: P = exp(-i H_dd tau_sigma) exp(-i H_0 tau0)
//   effective:    P = exp(-i H_eff tau_c), p = tau_sigma / tau_c
DensityOperator run_cycles(const DensityOperator& rho, const SpinSystem& sys,
                           const ProtocolConfig& cfg, int n_cycles,
                           CycleMode mode);

// Time-reversed double-quantum block: exp(+i H_0 t) rho exp(-i H_0 t).
DensityOperator backward_evolve(const DensityOperator& rho,
                                const SpinSystem& sys, double t);

}  // namespace mqclab
