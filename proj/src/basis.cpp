#include "mqclab/basis.hpp"

#include <bit>
#include <cstdlib>
#include <string>

#include "mqclab/errors.hpp"

namespace mqclab {

int spin_cap() {
  static const int cap = [] {
    int value = kDefaultSpinCap;
    if (const char* env = std::getenv("MQCLAB_MAX_SPINS")) {
      char* end = nullptr;
      const long parsed = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && parsed >= 1) {
        value = static_cast<int>(parsed);
      }
    }
    return value < kHardSpinCap ? value : kHardSpinCap;
  }();
  return cap;
}

Basis::Basis(int n_spins) : n_spins_(n_spins) {
  const std::size_t dim = std::size_t{1} << n_spins;
  twice_m_.resize(dim);
  for (std::size_t state = 0; state < dim; ++state) {
    const int n_up = std::popcount(state);
    twice_m_[state] = 2 * n_up - n_spins;  // 2M = n_up - n_down
  }
}

BasisPtr build_basis(int n_spins) {
  if (n_spins < 1) {
    throw ValidationError("n_spins must be at least 1, got " + std::to_string(n_spins));
  }
  if (n_spins > spin_cap()) {
    throw ValidationError("n_spins = " + std::to_string(n_spins) +
                          " exceeds the cap of " + std::to_string(spin_cap()) +
                          " (raise MQCLAB_MAX_SPINS, hard cap " +
                          std::to_string(kHardSpinCap) + ")");
  }
  return std::make_shared<const Basis>(n_spins);
}

}  // namespace mqclab
