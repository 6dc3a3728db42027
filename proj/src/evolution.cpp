#include "mqclab/evolution.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "mqclab/errors.hpp"

namespace mqclab {

CycleMode parse_cycle_mode(std::string_view name) {
  if (name == "concatenated") return CycleMode::concatenated;
  if (name == "effective") return CycleMode::effective;
  throw ValidationError("unknown cycle mode '" + std::string(name) +
                        "' (expected concatenated | effective)");
}

const char* to_string(CycleMode mode) {
  return mode == CycleMode::concatenated ? "concatenated" : "effective";
}

Precision parse_precision(std::string_view name) {
  if (name == "auto") return Precision::automatic;
  if (name == "float64") return Precision::float64;
  if (name == "float32") return Precision::float32;
  throw ValidationError("unknown precision '" + std::string(name) +
                        "' (expected auto | float64 | float32)");
}

const char* to_string(Precision precision) {
  switch (precision) {
    case Precision::automatic: return "auto";
    case Precision::float64: return "float64";
    case Precision::float32: return "float32";
  }
  return "?";
}

double ProtocolConfig::tau_sigma_for_p(double tau0, double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ValidationError("perturbation weight p = " + std::to_string(p) +
                          " outside [0, 1)");
  }
  return p <= 0.0 ? 0.0 : tau0 * p / (1.0 - p);
}

void ProtocolConfig::validate(int n_spins) const {
  if (!(tau0 > 0.0)) throw ValidationError("protocol.tau0_us must be positive");
  if (tau_sigma < 0.0) throw ValidationError("protocol.tau_sigma_us must be nonnegative");
  if (n_cycles < 0) throw ValidationError("protocol.n_cycles must be nonnegative");
  if (n0_cycles < 0) throw ValidationError("protocol.n0_cycles must be nonnegative");
  if (sample_every < 1) throw ValidationError("protocol.sample_every must be at least 1");
  if (phases_for(n_spins) <= 2 * n_spins) {
    throw ValidationError("protocol.n_phases = " + std::to_string(n_phases) +
                          " aliases coherence orders; need more than " +
                          std::to_string(2 * n_spins));
  }
}

DensityOperator::DensityOperator(Eigen::MatrixXcd matrix, BasisPtr basis)
    : matrix_(std::move(matrix)), basis_(std::move(basis)) {
  if (!basis_) throw ValidationError("density operator needs a basis");
  const auto dim = static_cast<Eigen::Index>(basis_->dimension());
  if (matrix_.rows() != dim || matrix_.cols() != dim) {
    throw ValidationError("density matrix dimension does not match its basis");
  }
}

double DensityOperator::purity() const {
  if (!purity_) purity_ = matrix_.squaredNorm();  // sum |rho_ij|^2 = Tr{rho^2}
  return *purity_;
}

DensityOperator thermal_state(BasisPtr basis) {
  const std::size_t dim = basis->dimension();
  double sum_m2 = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    const double m = basis->m(s);
    sum_m2 += m * m;
  }
  const double scale = 1.0 / std::sqrt(sum_m2);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s) {
    rho(s, s) = scale * basis->m(s);
  }
  return DensityOperator(std::move(rho), std::move(basis));
}

Propagator make_propagator(const Operator& h, double t) {
  if (!h.hermitian()) {
    throw ValidationError("propagator generator must be Hermitian");
  }
  const HermitianEig& eig = h.eig();
  const Eigen::Index n = eig.eigenvalues.size();
  Eigen::VectorXcd phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases(k) = std::polar(1.0, -eig.eigenvalues(k) * t);
  }
  Propagator u;
  u.duration = t;
  u.unitary = (eig.eigenvectors * phases.asDiagonal()) * eig.eigenvectors.adjoint();
  return u;
}

DensityOperator evolve(const DensityOperator& rho, const Propagator& u) {
  if (u.unitary.rows() != rho.matrix().rows()) {
    throw ValidationError("propagator and state dimensions do not match");
  }
  return DensityOperator(u.unitary * rho.matrix() * u.unitary.adjoint(),
                         rho.basis_ptr());
}

DensityOperator z_rotate(const DensityOperator& rho, double phi) {
  const Basis& basis = rho.basis();
  const std::size_t dim = basis.dimension();
  std::vector<std::complex<double>> phase(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    phase[s] = std::polar(1.0, phi * basis.m(s));
  }
  Eigen::MatrixXcd out(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const std::complex<double> pj = std::conj(phase[j]);
    for (std::size_t i = 0; i < dim; ++i) {
      out(i, j) = rho.matrix()(i, j) * phase[i] * pj;
    }
  }
  return DensityOperator(std::move(out), rho.basis_ptr());
}

DensityOperator run_cycles(const DensityOperator& rho, const SpinSystem& sys,
                           const ProtocolConfig& cfg, int n_cycles,
                           CycleMode mode) {
  if (!(cfg.tau0 > 0.0) || cfg.tau_sigma < 0.0 || n_cycles < 0) {
    throw ValidationError("run_cycles: tau0 must be positive, tau_sigma and n_cycles nonnegative");
  }

  Eigen::MatrixXcd cycle;
  if (mode == CycleMode::concatenated) {
    const Propagator u0 = make_propagator(build_h0(sys), cfg.tau0);
    if (cfg.tau_sigma > 0.0) {
      const Propagator udd = make_propagator(build_hdd(sys), cfg.tau_sigma);
      cycle = udd.unitary * u0.unitary;
    } else {
      cycle = u0.unitary;
    }
  } else {
    const Propagator ueff =
        make_propagator(build_heff(sys, cfg.p()), cfg.tau_c());
    cycle = ueff.unitary;
  }

  Eigen::MatrixXcd state = rho.matrix();
  const Eigen::MatrixXcd cycle_adj = cycle.adjoint();
  for (int c = 0; c < n_cycles; ++c) {
    state = cycle * state * cycle_adj;
  }
  return DensityOperator(std::move(state), rho.basis_ptr());
}

DensityOperator backward_evolve(const DensityOperator& rho,
                                const SpinSystem& sys, double t) {
  if (t < 0.0) throw ValidationError("backward_evolve: t must be nonnegative");
  return evolve(rho, make_propagator(build_h0(sys), -t));
}

}  // namespace mqclab
