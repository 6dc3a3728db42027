#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mqclab/protocol_config.hpp"
#include "mqclab/spin_system.hpp"

namespace mqclab {

enum class OutputFormat { csv, json };
OutputFormat parse_output_format(std::string_view name);
const char* to_string(OutputFormat format);

struct NetworkConfig {
  NetworkKind kind = NetworkKind::complete_random;
  int n_spins = 0;
  double d0_rad_s = 3.0e3;
  std::uint64_t seed = 1;
  bool angular_factor = false;
};

struct AnalysisConfig {
  int plateau_window = 10;
  double plateau_epsilon = 0.02;
  bool dump_spectra = false;
};

struct SweepConfig {
  std::vector<double> p_list = {0.025, 0.034, 0.065, 0.080, 0.108};
};

struct OutputConfig {
  std::string directory = "out";
  OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
  NetworkConfig network;
  ProtocolConfig protocol;
  AnalysisConfig analysis;
  SweepConfig sweep;
  OutputConfig output;

  SpinSystem make_system() const;
  // Cross-field checks; every run entry point calls this before simulating.
  void validate() const;
};

// Strict JSON config: unknown keys are errors with their field path, type
// mismatches name the offending field, defaults fill everything optional.
// Only network.kind and network.n_spins are required.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace mqclab
