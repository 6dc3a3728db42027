#pragma once

#include <string>
#include <vector>

#include "mqclab/config.hpp"
#include "mqclab/mqc.hpp"
#include "mqclab/pheno.hpp"
#include "mqclab/protocols.hpp"

namespace mqclab {

// Shortest exact decimal form of a double (17 significant digits round-trip
// exactly; NaN prints as "nan").
std::string format_double(double value);

// Series table: cycle,time_s,p,k_width,k_m2_exp,k_m2_gauss,sigma,total_A.
// JSON output mirrors the columns as arrays.
void write_series(const ClusterSeries& series, const std::string& path,
                  OutputFormat format);
ClusterSeries read_series_csv(const std::string& path);

// Sweep summary: p,k_loc,onset_cycle,reached plus the fit columns
// alpha_fit,b_fit,residual when fits are attached (NaN where missing).
struct SweepSummaryRow {
  double p = 0.0;
  PlateauReport plateau;
  bool has_fit = false;
  PhenoFit fit;
};
void write_sweep_summary(const std::vector<SweepSummaryRow>& rows,
                         const std::string& path, OutputFormat format,
                         bool with_fit_columns);

// Spectrum table: q,A (one row per order).
void write_spectrum(const MqcSpectrum& spec, const std::string& path);

}  // namespace mqclab
