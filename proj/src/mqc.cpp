#include "mqclab/mqc.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "mqclab/errors.hpp"

namespace mqclab {

namespace {

constexpr double kImagResidueTol = 1e-9;
constexpr double kNegativeAmplitudeTol = 1e-9;
constexpr double kFidelityFloor = 1e-12;

}  // namespace

MqcSpectrum::MqcSpectrum(int q_max)
    : q_max_(q_max), amplitudes_(static_cast<std::size_t>(2 * q_max + 1), 0.0) {
  if (q_max < 0) throw ValidationError("q_max must be nonnegative");
}

double MqcSpectrum::sum() const {
  double s = 0.0;
  for (double a : amplitudes_) s += a;
  return s;
}

double MqcSpectrum::second_moment() const {
  double m2 = 0.0;
  for (int q = -q_max_; q <= q_max_; ++q) m2 += static_cast<double>(q) * q * at(q);
  return m2;
}

void MqcSpectrum::normalize() {
  const double s = sum();
  if (!(s > 0.0)) throw ValidationError("cannot normalize an all-zero spectrum");
  for (double& a : amplitudes_) a /= s;
  total_ = s;
  normalized_ = true;
}

std::map<int, Eigen::MatrixXcd> decompose_orders(const DensityOperator& rho) {
  const Basis& basis = rho.basis();
  const std::size_t dim = basis.dimension();
  std::map<int, Eigen::MatrixXcd> components;
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < dim; ++i) {
      const std::complex<double> v = rho.matrix()(i, j);
      if (v == std::complex<double>(0.0, 0.0)) continue;
      const int q = basis.order(i, j);
      auto [it, inserted] = components.try_emplace(q);
      if (inserted) it->second = Eigen::MatrixXcd::Zero(dim, dim);
      it->second(i, j) = v;
    }
  }
  return components;
}

MqcSpectrum mqc_spectrum_direct(const DensityOperator& rho) {
  const Basis& basis = rho.basis();
  const std::size_t dim = basis.dimension();
  MqcSpectrum spec(basis.n_spins());
  // Upper triangle only; the mirror element has the same modulus, so writing
  // it into -q keeps A(q) = A(-q) exact.
  for (std::size_t j = 0; j < dim; ++j) {
    spec.at(0) += std::norm(rho.matrix()(j, j));
    for (std::size_t i = 0; i < j; ++i) {
      const double v = std::norm(rho.matrix()(i, j));
      if (v == 0.0) continue;
      const int q = basis.order(i, j);
      spec.at(q) += v;
      spec.at(-q) += v;
    }
  }
  return spec;
}

MqcSpectrum mqc_spectrum_overlap(const DensityOperator& ref,
                                 const DensityOperator& rho) {
  if (ref.basis().n_spins() != rho.basis().n_spins()) {
    throw ValidationError("overlap spectrum: states live on different bases");
  }
  const Basis& basis = rho.basis();
  const std::size_t dim = basis.dimension();
  const int q_max = basis.n_spins();

  // acc[|q|] collects conj(ref_ij) rho_ij over both order blocks +-q: the
  // lower-triangle elements of block +q are the mirrors of the upper-triangle
  // elements of block -q and contribute the exact conjugate, so one triangle
  // pass covers everything and A(q) = A(-q) holds bit-exactly.
  std::vector<std::complex<double>> acc(static_cast<std::size_t>(q_max + 1), 0.0);
  double scale = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    acc[0] += std::conj(ref.matrix()(j, j)) * rho.matrix()(j, j);
    for (std::size_t i = 0; i < j; ++i) {
      const std::complex<double> t = std::conj(ref.matrix()(i, j)) * rho.matrix()(i, j);
      if (t == std::complex<double>(0.0, 0.0)) continue;
      const int q = basis.order(i, j);
      if (q == 0) {
        acc[0] += t + std::conj(t);  // element and its mirror both sit at q = 0
      } else if (q > 0) {
        acc[static_cast<std::size_t>(q)] += t;
      } else {
        acc[static_cast<std::size_t>(-q)] += std::conj(t);
      }
    }
  }
  for (const auto& a : acc) scale += std::abs(a);
  const double residue_tol = kImagResidueTol * std::max(1.0, scale);

  MqcSpectrum spec(q_max);
  for (int q = 0; q <= q_max; ++q) {
    const std::complex<double> a = acc[static_cast<std::size_t>(q)];
    if (std::abs(a.imag()) > residue_tol) {
      throw NumericalError("overlap spectrum has imaginary residue " +
                           std::to_string(a.imag()) + " at order " + std::to_string(q));
    }
    const double v = std::max(a.real(), 0.0);
    spec.at(q) = v;
    spec.at(-q) = v;
  }
  return spec;
}

MqcSpectrum mqc_spectrum_phase(const DensityOperator& ref,
                               const DensityOperator& rho, int n_phases) {
  if (ref.basis().n_spins() != rho.basis().n_spins()) {
    throw ValidationError("phase spectrum: states live on different bases");
  }
  const Basis& basis = rho.basis();
  const int q_max = basis.n_spins();
  if (n_phases <= 2 * q_max) {
    throw ValidationError("n_phases = " + std::to_string(n_phases) +
                          " aliases coherence orders up to " + std::to_string(q_max) +
                          "; need more than " + std::to_string(2 * q_max));
  }
  const std::size_t dim = basis.dimension();

  // S(phi_k) = Tr{ref . z_rotate(rho, phi_k)}; real because both states are
  // Hermitian. Computed directly from the phase table, no rotated copy.
  std::vector<double> signal(static_cast<std::size_t>(n_phases));
  std::vector<std::complex<double>> phase(dim);
  for (int k = 0; k < n_phases; ++k) {
    const double phi = 2.0 * M_PI * k / n_phases;
    for (std::size_t s = 0; s < dim; ++s) phase[s] = std::polar(1.0, phi * basis.m(s));
    std::complex<double> tr = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t i = 0; i < dim; ++i) {
        // element (i,j) of ref times element (j,i) of the rotated rho
        tr += ref.matrix()(i, j) * rho.matrix()(j, i) * phase[j] * std::conj(phase[i]);
      }
    }
    signal[static_cast<std::size_t>(k)] = tr.real();
  }

  MqcSpectrum spec(q_max);
  double scale = 0.0;
  for (double s : signal) scale += std::abs(s);
  scale = std::max(1.0, scale / n_phases);

  for (int q = -q_max; q <= q_max; ++q) {
    std::complex<double> a = 0.0;
    for (int k = 0; k < n_phases; ++k) {
      const double ang = -2.0 * M_PI * k * q / n_phases;
      a += signal[static_cast<std::size_t>(k)] * std::polar(1.0, ang);
    }
    a /= static_cast<double>(n_phases);
    if (std::abs(a.imag()) > kImagResidueTol * scale) {
      throw NumericalError("phase spectrum has imaginary residue at order " +
                           std::to_string(q));
    }
    double v = a.real();
    if (v < -kNegativeAmplitudeTol * scale) {
      throw NumericalError("negative amplitude " + std::to_string(v) +
                           " at order " + std::to_string(q) +
                           " (reference/state conventions do not match)");
    }
    spec.at(q) = std::max(v, 0.0);
  }
  return spec;
}

MqcSpectrum binomial_profile(int k) {
  if (k < 1) throw ValidationError("binomial profile needs k >= 1");
  MqcSpectrum spec(k);
  // n(q, k) = (2k)! / ((k+q)! (k-q)!), evaluated via lgamma and rescaled by
  // the q = 0 value before exponentiation.
  const double log_center = std::lgamma(2.0 * k + 1.0) - 2.0 * std::lgamma(k + 1.0);
  double sum = 0.0;
  for (int q = -k; q <= k; ++q) {
    const double log_n = std::lgamma(2.0 * k + 1.0) -
                         std::lgamma(static_cast<double>(k + q) + 1.0) -
                         std::lgamma(static_cast<double>(k - q) + 1.0);
    const double v = std::exp(log_n - log_center);
    spec.at(q) = v;
    sum += v;
  }
  spec.normalize();
  return spec;
}

double width_at_1_over_e(const MqcSpectrum& spec) {
  const double a0 = spec.at(0);
  if (!(a0 > 0.0)) throw ValidationError("width needs A(0) > 0");
  const double target = a0 / M_E;

  // Even orders suffice when odd orders are empty (the double-quantum
  // selection rule); otherwise walk every order. "Empty" is relative to
  // A(0): dense arithmetic leaves roundoff dust at odd orders.
  int step = 2;
  for (int q = 1; q <= spec.q_max(); q += 2) {
    if (spec.at(q) > 1e-12 * a0) {
      step = 1;
      break;
    }
  }

  double prev_q = 0.0;
  double prev_log = std::log(a0);
  const double log_target = std::log(target);
  for (int q = step; q <= spec.q_max(); q += step) {
    const double a = spec.at(q);
    if (a <= 0.0) continue;  // unpopulated orders carry no width information
    const double lg = std::log(a);
    if (a < target) {
      return prev_q + (prev_log - log_target) * (q - prev_q) / (prev_log - lg);
    }
    prev_q = q;
    prev_log = lg;
  }
  throw NoCrossingError("spectrum never falls below A(0)/e inside |q| <= " +
                        std::to_string(spec.q_max()));
}

ClusterEstimate cluster_size(const MqcSpectrum& spec) {
  if (!spec.normalized()) {
    throw ValidationError("cluster estimates need a normalized spectrum");
  }
  ClusterEstimate est;
  const double m2 = spec.second_moment();
  est.k_m2_exp = 0.5 * m2;
  est.k_m2_gauss = 2.0 * m2;
  try {
    est.sigma = width_at_1_over_e(spec);
    est.k_width = est.sigma * est.sigma;
    est.width_available = true;
  } catch (const NoCrossingError&) {
    est.sigma = std::numeric_limits<double>::quiet_NaN();
    est.k_width = std::numeric_limits<double>::quiet_NaN();
    est.width_available = false;
  }
  return est;
}

std::map<int, double> fidelity_profile(const MqcSpectrum& perturbed,
                                       const MqcSpectrum& ideal) {
  if (perturbed.q_max() != ideal.q_max()) {
    throw ValidationError("fidelity profile: order grids do not match");
  }
  std::map<int, double> f;
  for (int q = -ideal.q_max(); q <= ideal.q_max(); ++q) {
    if (ideal.at(q) < kFidelityFloor) continue;
    f[q] = perturbed.at(q) / ideal.at(q);
  }
  return f;
}

}  // namespace mqclab
