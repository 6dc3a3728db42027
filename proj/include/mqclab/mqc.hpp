#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "mqclab/evolution.hpp"

namespace mqclab {

// Multiple-quantum coherence spectrum: nonnegative amplitudes A(q) on the
// integer order grid q in [-q_max, q_max], symmetric in q for Hermitian
// states.
class MqcSpectrum {
 public:
  explicit MqcSpectrum(int q_max);

  int q_max() const { return q_max_; }
  double at(int q) const { return amplitudes_[static_cast<std::size_t>(q + q_max_)]; }
  double& at(int q) { return amplitudes_[static_cast<std::size_t>(q + q_max_)]; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }

  bool normalized() const { return normalized_; }
  double total() const { return total_; }

  double sum() const;
  double second_moment() const;  // sum q^2 A(q)

  // Divides by the current sum and records it as the total. Throws
  // ValidationError for an all-zero spectrum.
  void normalize();

 private:
  int q_max_;
  std::vector<double> amplitudes_;
  bool normalized_ = false;
  double total_ = 0.0;
};

// Splits rho into coherence-order components rho_q (elements with
// M_row - M_col = q). The components reassemble to rho exactly and satisfy
// rho_q^dagger = rho_{-q}. Only orders with nonzero content appear.
std::map<int, Eigen::MatrixXcd> decompose_orders(const DensityOperator& rho);

// A(q) = Tr{rho_q rho_q^dagger} = sum of |rho_ij|^2 over the order-q block.
// The sum over q equals Tr{rho^2}; A(q) = A(-q) holds exactly.
MqcSpectrum mqc_spectrum_direct(const DensityOperator& rho);

// Overlap spectrum A(q) = Tr{ref_q^dagger rho_q}, the order-resolved overlap
// of a perturbed state with its unperturbed reference. Equal to
// mqc_spectrum_direct when ref == rho. Negative excursions (decayed overlaps
// at the noise floor) carry no model meaning and are clamped to zero.
MqcSpectrum mqc_spectrum_overlap(const DensityOperator& ref,
                                 const DensityOperator& rho);

// Phase-encoding route: S(phi_k) = Tr{ref . z_rotate(rho, phi_k)} on the
// uniform grid phi_k = 2 pi k / n_phases, Fourier-transformed over phi.
// Requires n_phases > 2 q_max (anti-aliasing). Imaginary residues above
// 1e-9 and amplitudes below -1e-9 signal convention mismatches and throw
// NumericalError; smaller negatives are clamped to zero.
MqcSpectrum mqc_spectrum_phase(const DensityOperator& ref,
                               const DensityOperator& rho, int n_phases);

// Normalized binomial transition-count profile n(q, k) on q in [-k, k],
// evaluated in log space so large k cannot overflow.
MqcSpectrum binomial_profile(int k);

// Half width at A(q)/A(0) = 1/e by linear interpolation of log A(q) against
// q, walking even orders when odd orders are empty. Throws NoCrossingError
// when the populated grid never drops below A(0)/e.
double width_at_1_over_e(const MqcSpectrum& spec);

struct ClusterEstimate {
  double sigma = 0.0;       // 1/e half width (NaN when unavailable)
  double k_width = 0.0;     // sigma^2
  double k_m2_exp = 0.0;    // M2 / 2 (exponential profile)
  double k_m2_gauss = 0.0;  // 2 M2  (Gaussian profile)
  bool width_available = false;
};

// Requires a normalized spectrum. A missing 1/e crossing leaves k_width and
// sigma as NaN; the second-moment estimates are always filled.
ClusterEstimate cluster_size(const MqcSpectrum& spec);

// Per-order ratios f_q = A_perturbed(q) / A_ideal(q); orders whose ideal
// amplitude sits below 1e-12 are omitted.
std::map<int, double> fidelity_profile(const MqcSpectrum& perturbed,
                                       const MqcSpectrum& ideal);

}  // namespace mqclab
