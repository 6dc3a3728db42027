#include "mqclab/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mqclab/basis.hpp"
#include "mqclab/errors.hpp"

namespace mqclab {

using nlohmann::json;

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ValidationError("unknown output format '" + std::string(name) +
                        "' (expected csv | json)");
}

const char* to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

SpinSystem RunConfig::make_system() const {
  return make_network(network.kind, network.n_spins, network.d0_rad_s,
                      network.seed, network.angular_factor);
}

void RunConfig::validate() const {
  if (network.n_spins < 1 || network.n_spins > spin_cap()) {
    throw ValidationError("network.n_spins = " + std::to_string(network.n_spins) +
                          " outside [1, " + std::to_string(spin_cap()) + "]");
  }
  if (!(network.d0_rad_s > 0.0)) {
    throw ValidationError("network.d0_rad_s must be positive");
  }
  protocol.validate(network.n_spins);
  if (analysis.plateau_window < 3) {
    throw ValidationError("analysis.plateau_window must be at least 3");
  }
  if (!(analysis.plateau_epsilon > 0.0)) {
    throw ValidationError("analysis.plateau_epsilon must be positive");
  }
  for (double p : sweep.p_list) {
    if (!(p > 0.0 && p < 1.0)) {
      throw ValidationError("sweep.p_list entries must lie in (0, 1)");
    }
  }
  if (output.directory.empty()) {
    throw ValidationError("output.directory must not be empty");
  }
}

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& message) {
  throw ValidationError("config field '" + path + "': " + message);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) bad_field(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
T get_number(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_field(path + "." + key, "expected a number");
  return v.get<T>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad_field(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) bad_field(path + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) bad_field(path + "." + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config syntax: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown_keys(root, "", {"network", "protocol", "analysis", "sweep", "output"});

  RunConfig cfg;

  if (!root.contains("network") || !root.at("network").is_object()) {
    throw ValidationError("config field 'network': required object missing");
  }
  {
    const json& net = root.at("network");
    reject_unknown_keys(net, "network",
                        {"kind", "n_spins", "d0_rad_s", "seed", "angular_factor"});
    if (!net.contains("kind")) bad_field("network.kind", "required");
    if (!net.at("kind").is_string()) bad_field("network.kind", "expected a string");
    cfg.network.kind = parse_network_kind(net.at("kind").get<std::string>());
    if (!net.contains("n_spins")) bad_field("network.n_spins", "required");
    cfg.network.n_spins = get_int(net, "network", "n_spins", 0);
    cfg.network.d0_rad_s = get_number<double>(net, "network", "d0_rad_s", cfg.network.d0_rad_s);
    if (net.contains("seed")) {
      const json& v = net.at("seed");
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        bad_field("network.seed", "expected a nonnegative integer");
      }
      cfg.network.seed = v.get<std::uint64_t>();
    }
    cfg.network.angular_factor = get_bool(net, "network", "angular_factor", false);
  }

  if (root.contains("protocol")) {
    const json& prot = root.at("protocol");
    if (!prot.is_object()) bad_field("protocol", "expected an object");
    reject_unknown_keys(prot, "protocol",
                        {"tau0_us", "tau_sigma_us", "n_cycles", "n0_cycles",
                         "n_phases", "sample_every", "mode", "precision"});
    cfg.protocol.tau0 = 1e-6 * get_number<double>(prot, "protocol", "tau0_us", 57.6);
    cfg.protocol.tau_sigma = 1e-6 * get_number<double>(prot, "protocol", "tau_sigma_us", 0.0);
    cfg.protocol.n_cycles = get_int(prot, "protocol", "n_cycles", cfg.protocol.n_cycles);
    cfg.protocol.n0_cycles = get_int(prot, "protocol", "n0_cycles", cfg.protocol.n0_cycles);
    cfg.protocol.n_phases = get_int(prot, "protocol", "n_phases", cfg.protocol.n_phases);
    cfg.protocol.sample_every = get_int(prot, "protocol", "sample_every", cfg.protocol.sample_every);
    cfg.protocol.mode = parse_cycle_mode(get_string(prot, "protocol", "mode", "concatenated"));
    cfg.protocol.precision = parse_precision(get_string(prot, "protocol", "precision", "auto"));
  }

  if (root.contains("analysis")) {
    const json& ana = root.at("analysis");
    if (!ana.is_object()) bad_field("analysis", "expected an object");
    reject_unknown_keys(ana, "analysis",
                        {"plateau_window", "plateau_epsilon", "dump_spectra"});
    cfg.analysis.plateau_window = get_int(ana, "analysis", "plateau_window", 10);
    cfg.analysis.plateau_epsilon = get_number<double>(ana, "analysis", "plateau_epsilon", 0.02);
    cfg.analysis.dump_spectra = get_bool(ana, "analysis", "dump_spectra", false);
  }

  if (root.contains("sweep")) {
    const json& sw = root.at("sweep");
    if (!sw.is_object()) bad_field("sweep", "expected an object");
    reject_unknown_keys(sw, "sweep", {"p_list"});
    if (sw.contains("p_list")) {
      const json& list = sw.at("p_list");
      if (!list.is_array() || list.empty()) bad_field("sweep.p_list", "expected a nonempty array");
      cfg.sweep.p_list.clear();
      for (const json& v : list) {
        if (!v.is_number()) bad_field("sweep.p_list", "expected numbers");
        cfg.sweep.p_list.push_back(v.get<double>());
      }
    }
  }

  if (root.contains("output")) {
    const json& outp = root.at("output");
    if (!outp.is_object()) bad_field("output", "expected an object");
    reject_unknown_keys(outp, "output", {"directory", "format"});
    cfg.output.directory = get_string(outp, "output", "directory", cfg.output.directory);
    cfg.output.format = parse_output_format(get_string(outp, "output", "format", "csv"));
  }

  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config io: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw ValidationError("config io: failed reading '" + path + "'");
  }
  return parse_config_text(buffer.str());
}

}  // namespace mqclab
