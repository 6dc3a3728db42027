#include "mqclab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "mqclab/errors.hpp"

namespace mqclab {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("io: cannot open '" + path + "' for writing");
  return out;
}

json series_as_json(const ClusterSeries& series) {
  json j;
  j["p"] = series.p;
  j["k0"] = std::isnan(series.k0) ? json() : json(series.k0);
  auto col = [&](const char* name, auto getter) {
    json arr = json::array();
    for (const SeriesSample& s : series.samples) {
      const double v = getter(s);
      arr.push_back(std::isnan(v) ? json() : json(v));
    }
    j[name] = std::move(arr);
  };
  {
    json arr = json::array();
    for (const SeriesSample& s : series.samples) arr.push_back(s.cycle);
    j["cycle"] = std::move(arr);
  }
  col("time_s", [](const SeriesSample& s) { return s.time_s; });
  col("k_width", [](const SeriesSample& s) { return s.k.k_width; });
  col("k_m2_exp", [](const SeriesSample& s) { return s.k.k_m2_exp; });
  col("k_m2_gauss", [](const SeriesSample& s) { return s.k.k_m2_gauss; });
  col("sigma", [](const SeriesSample& s) { return s.k.sigma; });
  col("total_A", [](const SeriesSample& s) { return s.total; });
  return j;
}

}  // namespace

void write_series(const ClusterSeries& series, const std::string& path,
                  OutputFormat format) {
  std::ofstream out = open_out(path);
  if (format == OutputFormat::json) {
    out << series_as_json(series).dump(2) << '\n';
    return;
  }
  out << "cycle,time_s,p,k_width,k_m2_exp,k_m2_gauss,sigma,total_A\n";
  for (const SeriesSample& s : series.samples) {
    out << s.cycle << ',' << format_double(s.time_s) << ','
        << format_double(series.p) << ',' << format_double(s.k.k_width) << ','
        << format_double(s.k.k_m2_exp) << ',' << format_double(s.k.k_m2_gauss)
        << ',' << format_double(s.k.sigma) << ',' << format_double(s.total)
        << '\n';
  }
}

ClusterSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("io: empty series file");
  if (line != "cycle,time_s,p,k_width,k_m2_exp,k_m2_gauss,sigma,total_A") {
    throw ValidationError("io: unexpected series header in '" + path + "'");
  }
  ClusterSeries series;
  bool have_p = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 8) {
      throw ValidationError("io: malformed series row '" + line + "'");
    }
    auto num = [&](const std::string& text) {
      if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw ValidationError("io: bad number '" + text + "'");
      return v;
    };
    SeriesSample s;
    s.cycle = static_cast<int>(num(fields[0]));
    s.time_s = num(fields[1]);
    if (!have_p) {
      series.p = num(fields[2]);
      have_p = true;
    }
    s.k.k_width = num(fields[3]);
    s.k.k_m2_exp = num(fields[4]);
    s.k.k_m2_gauss = num(fields[5]);
    s.k.sigma = num(fields[6]);
    s.k.width_available = !std::isnan(s.k.k_width);
    s.total = num(fields[7]);
    series.samples.push_back(s);
  }
  if (!series.samples.empty()) {
    series.k0 = series.samples.front().k.k_width;
  }
  return series;
}

void write_sweep_summary(const std::vector<SweepSummaryRow>& rows,
                         const std::string& path, OutputFormat format,
                         bool with_fit_columns) {
  std::ofstream out = open_out(path);
  if (format == OutputFormat::json) {
    json arr = json::array();
    for (const SweepSummaryRow& r : rows) {
      json j;
      j["p"] = r.p;
      j["k_loc"] = std::isnan(r.plateau.k_loc) ? json() : json(r.plateau.k_loc);
      j["onset_cycle"] = r.plateau.onset_cycle;
      j["reached"] = r.plateau.reached;
      if (with_fit_columns) {
        j["alpha_fit"] = r.has_fit ? json(r.fit.alpha) : json();
        j["b_fit"] = r.has_fit ? json(r.fit.b) : json();
        j["residual"] = r.has_fit ? json(r.fit.residual) : json();
      }
      arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
    return;
  }
  out << "p,k_loc,onset_cycle,reached";
  if (with_fit_columns) out << ",alpha_fit,b_fit,residual";
  out << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepSummaryRow& r : rows) {
    out << format_double(r.p) << ',' << format_double(r.plateau.k_loc) << ','
        << r.plateau.onset_cycle << ',' << (r.plateau.reached ? 1 : 0);
    if (with_fit_columns) {
      out << ',' << format_double(r.has_fit ? r.fit.alpha : nan) << ','
          << format_double(r.has_fit ? r.fit.b : nan) << ','
          << format_double(r.has_fit ? r.fit.residual : nan);
    }
    out << '\n';
  }
}

void write_spectrum(const MqcSpectrum& spec, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "q,A\n";
  for (int q = -spec.q_max(); q <= spec.q_max(); ++q) {
    out << q << ',' << format_double(spec.at(q)) << '\n';
  }
}

}  // namespace mqclab
