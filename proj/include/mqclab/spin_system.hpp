#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>

namespace mqclab {

enum class NetworkKind { chain, lattice3d, complete_random };

NetworkKind parse_network_kind(std::string_view name);
const char* to_string(NetworkKind kind);

// Coupling network of a spin-1/2 system. Couplings are angular frequencies
// (rad/s), symmetric with zero diagonal; only the products d*t enter the
// dynamics.
struct SpinSystem {
  int n_spins = 0;
  Eigen::MatrixXd couplings;  // rad/s
  NetworkKind kind = NetworkKind::chain;
  std::uint64_t seed = 0;
};

// chain:           nearest-neighbour coupling d0.
// lattice3d:       d_ij = d0 / r_ij^3 on the first n sites of a unit-spacing
//                  cubic lattice; the optional angular factor multiplies by
//                  (1 - 3 cos^2 theta) with the field along z.
// complete_random: all pairs drawn uniformly from [-d0, d0], symmetrised,
//                  reproducible from the seed across platforms.
SpinSystem make_network(NetworkKind kind, int n_spins, double d0,
                        std::uint64_t seed = 0, bool angular_factor = false);

}  // namespace mqclab
