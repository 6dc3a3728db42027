#include "mqclab/operators.hpp"

#include <lapacke.h>

#include <complex>
#include <string>
#include <utility>

#include "mqclab/errors.hpp"

namespace mqclab {

HermitianEig hermitian_eig(const Eigen::MatrixXcd& h) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  HermitianEig out;
  out.eigenvectors = h;  // overwritten with eigenvectors
  out.eigenvalues.resize(n);
  const lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'V', 'L', n,
      reinterpret_cast<lapack_complex_double*>(out.eigenvectors.data()), n,
      out.eigenvalues.data());
  if (info != 0) {
    throw NumericalError("Hermitian eigensolver failed to converge (zheevd info = " +
                         std::to_string(info) + ")");
  }
  return out;
}

Operator::Operator(Eigen::MatrixXcd matrix, bool hermitian)
    : matrix_(std::move(matrix)), hermitian_(hermitian) {}

const HermitianEig& Operator::eig() const {
  std::call_once(eig_cell_->once, [this] {
    eig_cell_->value = std::make_shared<const HermitianEig>(hermitian_eig(matrix_));
  });
  return *eig_cell_->value;
}

namespace {

void check_system(const SpinSystem& sys) {
  if (sys.n_spins < 1 || sys.n_spins > spin_cap()) {
    throw ValidationError("spin system size outside the configured cap");
  }
  if (sys.couplings.rows() != sys.n_spins || sys.couplings.cols() != sys.n_spins) {
    throw ValidationError("coupling matrix dimension does not match n_spins");
  }
}

}  // namespace

Operator build_hdd(const SpinSystem& sys) {
  check_system(sys);
  const int n = sys.n_spins;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  for (std::size_t a = 0; a < dim; ++a) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool up_i = (a >> i) & 1u;
      for (int j = i + 1; j < n; ++j) {
        const double d = sys.couplings(i, j);
        if (d == 0.0) continue;
        const bool up_j = (a >> j) & 1u;
        // 2 Iz_i Iz_j: +d/2 for parallel spins, -d/2 for antiparallel.
        diag += (up_i == up_j) ? 0.5 * d : -0.5 * d;
        // Flip-flop -(Ix Ix + Iy Iy) = -(1/2)(I+ I- + I- I+): couples
        // antiparallel pairs to the state with both spins exchanged.
        if (up_i != up_j) {
          const std::size_t b = a ^ ((std::size_t{1} << i) | (std::size_t{1} << j));
          h(b, a) += std::complex<double>(-0.5 * d, 0.0);
        }
      }
    }
    h(a, a) = diag;
  }
  return Operator(std::move(h), true);
}

Operator build_h0(const SpinSystem& sys) {
  check_system(sys);
  const int n = sys.n_spins;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  // -(1/2) d_ij (I+_i I+_j + I-_i I-_j): flips parallel pairs together,
  // connecting states whose M differs by exactly 2.
  for (std::size_t a = 0; a < dim; ++a) {
    for (int i = 0; i < n; ++i) {
      const bool up_i = (a >> i) & 1u;
      for (int j = i + 1; j < n; ++j) {
        const double d = sys.couplings(i, j);
        if (d == 0.0) continue;
        const bool up_j = (a >> j) & 1u;
        if (up_i == up_j) {
          const std::size_t b = a ^ ((std::size_t{1} << i) | (std::size_t{1} << j));
          h(b, a) += std::complex<double>(-0.5 * d, 0.0);
        }
      }
    }
  }
  return Operator(std::move(h), true);
}

Operator build_heff(const SpinSystem& sys, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("perturbation weight p = " + std::to_string(p) +
                          " outside [0, 1]");
  }
  const Operator h0 = build_h0(sys);
  const Operator hdd = build_hdd(sys);
  return Operator((1.0 - p) * h0.matrix() + p * hdd.matrix(), true);
}

}  // namespace mqclab
