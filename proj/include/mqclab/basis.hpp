#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace mqclab {

// Dense 2^N x 2^N complex matrices put a hard wall at N = 14 (4 GiB per
// matrix); the default cap is lower because most workflows stay responsive
// only up to N = 12. MQCLAB_MAX_SPINS raises the soft cap, never past the
// hard one.
inline constexpr int kHardSpinCap = 14;
inline constexpr int kDefaultSpinCap = 12;

int spin_cap();

// Computational (Zeeman) basis of N spins 1/2. Bit b of a state index gives
// the orientation of spin b (1 = up). M is the total magnetic quantum number
// (n_up - n_down)/2; it is stored doubled so that coherence orders
// M_i - M_j remain exact integers for any N.
class Basis {
 public:
  explicit Basis(int n_spins);

  int n_spins() const { return n_spins_; }
  std::size_t dimension() const { return std::size_t{1} << n_spins_; }
  int twice_m(std::size_t state) const { return twice_m_[state]; }
  double m(std::size_t state) const { return 0.5 * twice_m_[state]; }
  const std::vector<int>& twice_m_values() const { return twice_m_; }

  // Coherence order of matrix element (row, col).
  int order(std::size_t row, std::size_t col) const {
    return (twice_m_[row] - twice_m_[col]) / 2;
  }

 private:
  int n_spins_;
  std::vector<int> twice_m_;
};

using BasisPtr = std::shared_ptr<const Basis>;

// Throws ValidationError if n_spins is outside [1, spin_cap()].
BasisPtr build_basis(int n_spins);

}  // namespace mqclab
