#include "mqclab/spin_system.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mqclab/basis.hpp"
#include "mqclab/errors.hpp"

namespace mqclab {

namespace {

// Canonical uniform double in [0, 1) from the top 53 bits of an mt19937_64
// draw. std::uniform_real_distribution is implementation-defined, which
// would break cross-platform reproducibility of seeded networks.
double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Site index -> integer coordinates on a cubic lattice with side length
// ceil(n^(1/3)), x varying fastest.
struct LatticeSite {
  int x, y, z;
};

LatticeSite lattice_site(int index, int side) {
  return {index % side, (index / side) % side, index / (side * side)};
}

}  // namespace

NetworkKind parse_network_kind(std::string_view name) {
  if (name == "chain") return NetworkKind::chain;
  if (name == "lattice3d") return NetworkKind::lattice3d;
  if (name == "complete_random") return NetworkKind::complete_random;
  throw ValidationError("unknown network kind '" + std::string(name) +
                        "' (expected chain | lattice3d | complete_random)");
}

const char* to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::chain: return "chain";
    case NetworkKind::lattice3d: return "lattice3d";
    case NetworkKind::complete_random: return "complete_random";
  }
  return "?";
}

SpinSystem make_network(NetworkKind kind, int n_spins, double d0,
                        std::uint64_t seed, bool angular_factor) {
  if (n_spins < 1 || n_spins > spin_cap()) {
    throw ValidationError("n_spins = " + std::to_string(n_spins) +
                          " outside [1, " + std::to_string(spin_cap()) + "]");
  }
  if (!(d0 > 0.0)) {
    throw ValidationError("d0 must be positive");
  }

  SpinSystem sys;
  sys.n_spins = n_spins;
  sys.kind = kind;
  sys.seed = seed;
  sys.couplings = Eigen::MatrixXd::Zero(n_spins, n_spins);

  switch (kind) {
    case NetworkKind::chain:
      for (int i = 0; i + 1 < n_spins; ++i) {
        sys.couplings(i, i + 1) = d0;
        sys.couplings(i + 1, i) = d0;
      }
      break;

    case NetworkKind::lattice3d: {
      int side = 1;
      while (side * side * side < n_spins) ++side;
      for (int i = 0; i < n_spins; ++i) {
        const LatticeSite a = lattice_site(i, side);
        for (int j = i + 1; j < n_spins; ++j) {
          const LatticeSite b = lattice_site(j, side);
          const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
          const double r2 = dx * dx + dy * dy + dz * dz;
          const double r = std::sqrt(r2);
          double d = d0 / (r2 * r);
          if (angular_factor) {
            d *= 1.0 - 3.0 * (dz * dz) / r2;  // field along z
          }
          sys.couplings(i, j) = d;
          sys.couplings(j, i) = d;
        }
      }
      break;
    }

    case NetworkKind::complete_random: {
      std::mt19937_64 rng(seed);
      for (int i = 0; i < n_spins; ++i) {
        for (int j = i + 1; j < n_spins; ++j) {
          const double d = d0 * (2.0 * canonical_uniform(rng) - 1.0);
          sys.couplings(i, j) = d;
          sys.couplings(j, i) = d;
        }
      }
      break;
    }
  }
  return sys;
}

}  // namespace mqclab
