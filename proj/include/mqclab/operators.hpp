#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>

#include "mqclab/basis.hpp"
#include "mqclab/spin_system.hpp"

namespace mqclab {

// Eigendecomposition of a Hermitian matrix: H = V diag(w) V^dagger.
struct HermitianEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
};

// Dense Hermitian eigensolve (LAPACK zheevd). Throws NumericalError if the
// solver does not converge.
HermitianEig hermitian_eig(const Eigen::MatrixXcd& h);

// Dense operator on the full Zeeman basis. The eigendecomposition is computed
// on first use and shared by all copies, so that every duration served by the
// same Hamiltonian reuses one factorisation. Initialisation is guarded; after
// that the decomposition is safe for concurrent read.
class Operator {
 public:
  Operator() = default;
  Operator(Eigen::MatrixXcd matrix, bool hermitian);

  // Reference accessors are lvalue-only: binding them to a temporary
  // Operator would dangle.
  const Eigen::MatrixXcd& matrix() const& { return matrix_; }
  Eigen::MatrixXcd matrix() && { return std::move(matrix_); }
  bool hermitian() const { return hermitian_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }

  const HermitianEig& eig() const&;
  void eig() && = delete;

 private:
  struct EigCell {
    std::once_flag once;
    std::shared_ptr<const HermitianEig> value;
  };

  Eigen::MatrixXcd matrix_;
  bool hermitian_ = true;
  std::shared_ptr<EigCell> eig_cell_ = std::make_shared<EigCell>();
};

// The secular dipolar Hamiltonian
//   H_dd = sum_{i<j} d_ij [2 Iz_i Iz_j - (Ix_i Ix_j + Iy_i Iy_j)].
// Commutes with total Iz (block diagonal in M).
Operator build_hdd(const SpinSystem& sys);

// The double-quantum Hamiltonian
//   H_0 = -sum_{i<j} d_ij [Ix_i Ix_j - Iy_i Iy_j]
//       = -(1/2) sum_{i<j} d_ij [I+_i I+_j + I-_i I-_j].
// Connects only states with Delta M = +-2.
Operator build_h0(const SpinSystem& sys);

// H_eff = (1-p) H_0 + p H_dd. Throws ValidationError unless p is in [0, 1].
Operator build_heff(const SpinSystem& sys, double p);

}  // namespace mqclab
