// Command-line front end: growth, perturbed and prepared-cluster runs,
// localization sweeps, model fits and the verification suite.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mqclab/config.hpp"
#include "mqclab/engine.hpp"
#include "mqclab/errors.hpp"
#include "mqclab/io.hpp"
#include "mqclab/pheno.hpp"
#include "mqclab/protocols.hpp"
#include "mqclab/selftest.hpp"

namespace fs = std::filesystem;
using namespace mqclab;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<double> p_override;
  std::optional<int> k0_cycles;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool dump_spectra = false;
  bool cross_check = false;
  bool fit_model = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_config = true) {
  if (with_config) {
    cmd->add_option("--config", args.config_path, "run configuration file (JSON)")
        ->required();
  }
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--format", args.format, "output format: csv | json");
  cmd->add_option("--seed", args.seed, "network seed (overrides config)");
  cmd->add_flag("--dump-spectra", args.dump_spectra,
                "write spectrum_<cycle>.csv per sampled cycle");
  cmd->add_flag("--cross-check", args.cross_check,
                "verify the phase route against the direct route per sample");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg = parse_config(args.config_path);
  if (args.seed) cfg.network.seed = *args.seed;
  if (args.out_dir) cfg.output.directory = *args.out_dir;
  if (args.format) cfg.output.format = parse_output_format(*args.format);
  if (args.dump_spectra) cfg.analysis.dump_spectra = true;
  if (args.p_override) {
    cfg.protocol.tau_sigma =
        ProtocolConfig::tau_sigma_for_p(cfg.protocol.tau0, *args.p_override);
  }
  if (args.k0_cycles) cfg.protocol.n0_cycles = *args.k0_cycles;
  cfg.validate();
  return cfg;
}

std::string series_path(const RunConfig& cfg, const std::string& stem) {
  const char* ext = cfg.output.format == OutputFormat::csv ? ".csv" : ".json";
  return (fs::path(cfg.output.directory) / (stem + ext)).string();
}

RunOptions run_options(const RunConfig& cfg, const CommonArgs& args,
                       const fs::path& spectra_dir) {
  RunOptions opts;
  opts.cross_check = args.cross_check;
  if (cfg.analysis.dump_spectra) {
    fs::create_directories(spectra_dir);
    opts.spectrum_sink = [spectra_dir](int cycle, const MqcSpectrum& spec) {
      write_spectrum(spec, (spectra_dir / ("spectrum_" + std::to_string(cycle) + ".csv")).string());
    };
  }
  return opts;
}

int cmd_single_run(const CommonArgs& args, const std::string& stem,
                   ClusterSeries (*runner)(const SpinSystem&, const ProtocolConfig&,
                                           int, const RunOptions&)) {
  const RunConfig cfg = load_config(args);
  fs::create_directories(cfg.output.directory);
  const SpinSystem sys = cfg.make_system();
  const RunOptions opts = run_options(cfg, args, fs::path(cfg.output.directory) / "spectra");
  const ClusterSeries series = runner(sys, cfg.protocol, cfg.protocol.n0_cycles, opts);
  const std::string path = series_path(cfg, stem);
  write_series(series, path, cfg.output.format);
  std::cout << path << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  fs::create_directories(cfg.output.directory);
  const SpinSystem sys = cfg.make_system();

  CellOptionsFactory cell_options;
  if (cfg.analysis.dump_spectra || args.cross_check) {
    const RunConfig cfg_copy = cfg;
    const CommonArgs args_copy = args;
    cell_options = [cfg_copy, args_copy](std::size_t index, double) {
      return run_options(cfg_copy, args_copy,
                         fs::path(cfg_copy.output.directory) /
                             ("cell_" + std::to_string(index)) / "spectra");
    };
  }

  const auto cells = sweep_kloc(sys, cfg.protocol, cfg.sweep.p_list,
                                cfg.analysis.plateau_window,
                                cfg.analysis.plateau_epsilon, args.threads,
                                cell_options);

  std::vector<SweepSummaryRow> rows;
  std::vector<std::pair<double, double>> reached_points;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& cell = cells[i];
    write_series(cell.series,
                 series_path(cfg, "series_" + std::to_string(i)),
                 cfg.output.format);
    if (!cell.note.empty()) {
      std::cerr << "p = " << cell.p << ": " << cell.note << "\n";
    }
    SweepSummaryRow row;
    row.p = cell.p;
    row.plateau = cell.plateau;
    if (args.fit_model && cell.plateau.reached) {
      try {
        row.fit = fit_alpha_b(cell.series, cell.p);
        row.has_fit = true;
      } catch (const std::exception& e) {
        std::cerr << "p = " << cell.p << ": model fit failed: " << e.what() << "\n";
      }
    }
    rows.push_back(row);
    if (cell.plateau.reached) reached_points.emplace_back(cell.p, cell.plateau.k_loc);
  }
  write_sweep_summary(rows, series_path(cfg, "sweep_summary"), cfg.output.format,
                      args.fit_model);

  if (reached_points.size() >= 3) {
    const PowerLawFit fit = fit_power_law(reached_points);
    std::cout << "k_loc ~ p^(" << format_double(fit.exponent) << " +- "
              << format_double(fit.stderr_exponent) << "), prefactor "
              << format_double(fit.prefactor) << "\n";
    std::ofstream out(fs::path(cfg.output.directory) / "power_law.csv");
    out << "exponent,prefactor,stderr\n"
        << format_double(fit.exponent) << ',' << format_double(fit.prefactor)
        << ',' << format_double(fit.stderr_exponent) << '\n';
  } else {
    std::cerr << "power-law fit skipped: fewer than 3 plateaus reached\n";
  }
  return 0;
}

int cmd_fit(const std::string& input, std::optional<double> p_override) {
  const ClusterSeries series = read_series_csv(input);
  const double p = p_override ? *p_override : series.p;
  const PhenoFit fit = fit_alpha_b(series, p);
  std::cout << "alpha = " << format_double(fit.alpha)
            << " 1/s\nb = " << format_double(fit.b)
            << " 1/s\nresidual = " << format_double(fit.residual) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  use_single_threaded_blas();

  CLI::App app{"Exact desk-scale simulator for spin-cluster growth, "
               "perturbation-induced localization and the dynamic-equilibrium "
               "cluster size"};
  app.require_subcommand(1);

  CommonArgs grow_args, perturb_args, equil_args, sweep_args;
  std::string fit_input;
  std::optional<double> fit_p;
  std::vector<std::string> selftest_filter;

  CLI::App* grow = app.add_subcommand("grow", "unperturbed cluster growth");
  add_common(grow, grow_args);

  CLI::App* perturb = app.add_subcommand("perturb", "perturbed growth");
  add_common(perturb, perturb_args);
  perturb->add_option("-p", perturb_args.p_override,
                      "perturbation weight (overrides config tau_sigma)");

  CLI::App* equil = app.add_subcommand("equilibrium", "prepared-cluster run");
  add_common(equil, equil_args);
  equil->add_option("-p", equil_args.p_override,
                    "perturbation weight (overrides config tau_sigma)");
  equil->add_option("--k0-cycles", equil_args.k0_cycles,
                    "preparation cycles (overrides config n0_cycles)");

  CLI::App* sweep = app.add_subcommand("sweep", "localization-size sweep over p");
  add_common(sweep, sweep_args);
  sweep->add_option("--threads", sweep_args.threads, "worker pool size")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--fit", sweep_args.fit_model,
                  "fit the growth/decay model per plateaued cell");

  CLI::App* fit = app.add_subcommand("fit", "fit the growth/decay model to a series file");
  fit->add_option("--input", fit_input, "series CSV")->required();
  fit->add_option("-p", fit_p, "perturbation weight (overrides the file's p column)");

  CLI::App* selftest = app.add_subcommand("selftest", "run the verification suite");
  selftest->add_option("--filter", selftest_filter,
                       "run only checks whose name contains this substring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (grow->parsed()) {
      return cmd_single_run(grow_args, "series_grow",
                            [](const SpinSystem& sys, const ProtocolConfig& cfg, int,
                               const RunOptions& opts) { return run_growth(sys, cfg, opts); });
    }
    if (perturb->parsed()) {
      return cmd_single_run(perturb_args, "series_perturbed",
                            [](const SpinSystem& sys, const ProtocolConfig& cfg, int,
                               const RunOptions& opts) { return run_perturbed(sys, cfg, opts); });
    }
    if (equil->parsed()) {
      return cmd_single_run(equil_args, "series_equilibrium",
                            [](const SpinSystem& sys, const ProtocolConfig& cfg,
                               int k0_cycles, const RunOptions& opts) {
                              return run_equilibrium(sys, cfg, k0_cycles, opts);
                            });
    }
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (fit->parsed()) return cmd_fit(fit_input, fit_p);
    if (selftest->parsed()) {
      SelftestOptions options;
      options.filter = selftest_filter;
      const auto results = run_selftest(options, std::cout);
      return all_passed(results) ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
