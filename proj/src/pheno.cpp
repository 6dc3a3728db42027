#include "mqclab/pheno.hpp"

#include <cmath>
#include <string>

#include "mqclab/errors.hpp"

namespace mqclab {

void PhenoParams::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("pheno model needs alpha > 0");
  if (!(b > 0.0)) throw ValidationError("pheno model needs b > 0");
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("pheno model needs p in (0, 1]");
  if (!(tau > 0.0)) throw ValidationError("pheno model needs tau > 0");
}

double update_map_step(double k, const PhenoParams& params) {
  params.validate();
  if (!(k > 0.0)) throw ValidationError("update map needs k > 0");
  const double grown = k * (1.0 + params.alpha * params.tau);
  const double damp = 1.0 + std::sqrt(grown) * params.p * params.b * params.tau;
  return grown / (damp * damp);
}

double stationary_kloc(const PhenoParams& params) {
  params.validate();
  const double root = params.alpha / (2.0 * params.b * params.p);
  return root * root;
}

PhenoPrediction simulate_model(double k0, const PhenoParams& params, int steps) {
  params.validate();
  if (!(k0 > 0.0)) throw ValidationError("simulate_model needs k0 > 0");
  if (steps < 0) throw ValidationError("steps must be nonnegative");
  PhenoPrediction out;
  out.k_loc = stationary_kloc(params);
  out.trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  out.trajectory.push_back(k0);
  double k = k0;
  for (int s = 0; s < steps; ++s) {
    k = update_map_step(k, params);
    out.trajectory.push_back(k);
  }
  return out;
}

namespace {

struct FitData {
  std::vector<double> k;  // k_width samples, uniform spacing
  double tau = 0.0;
  double p = 0.0;
};

FitData extract_fit_data(const ClusterSeries& series, double p) {
  if (!(p > 0.0)) {
    throw NumericalError("b unidentifiable: the series has no decay term (p = 0)");
  }
  FitData data;
  data.p = p;
  std::vector<double> times;
  for (const SeriesSample& s : series.samples) {
    if (!s.k.width_available) continue;
    data.k.push_back(s.k.k_width);
    times.push_back(s.time_s);
  }
  if (data.k.size() < 8) {
    throw ValidationError("pheno fit needs at least 8 usable samples, got " +
                          std::to_string(data.k.size()));
  }
  data.tau = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (std::abs(dt - data.tau) > 1e-9 * data.tau) {
      throw ValidationError("pheno fit needs uniformly spaced samples");
    }
  }
  return data;
}

// Residual vector: model trajectory minus data, concatenated across series.
std::vector<double> model_residuals(const std::vector<FitData>& data,
                                    double alpha, double b) {
  std::vector<double> res;
  for (const FitData& d : data) {
    PhenoParams params{alpha, b, d.p, d.tau};
    double k = d.k.front();
    for (std::size_t i = 1; i < d.k.size(); ++i) {
      k = update_map_step(k, params);
      res.push_back(k - d.k[i]);
    }
  }
  return res;
}

double rss_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

PhenoFit fit_shared(const std::vector<FitData>& data) {
  // Initial guesses: growth rate from the early-time log slope of the first
  // series, decay rate from its tail plateau via the closed form.
  const FitData& lead = data.front();
  const std::size_t m = lead.k.size();
  const std::size_t head = std::min<std::size_t>(5, m);
  double slope = 0.0;
  int used = 0;
  for (std::size_t i = 1; i < head; ++i) {
    if (lead.k[i] > 0.0 && lead.k[i - 1] > 0.0) {
      slope += std::log(lead.k[i] / lead.k[i - 1]) / lead.tau;
      ++used;
    }
  }
  slope = used > 0 ? slope / used : 0.0;
  const double span = lead.tau * static_cast<double>(m - 1);
  const double alpha0 = std::max(std::abs(slope), 0.1 / span);

  const std::size_t tail = std::min<std::size_t>(5, m);
  double k_tail = 0.0;
  for (std::size_t i = m - tail; i < m; ++i) k_tail += lead.k[i];
  k_tail /= static_cast<double>(tail);
  const double b0 = alpha0 / (2.0 * lead.p * std::sqrt(std::max(k_tail, 1e-12)));

  // Levenberg-Marquardt on (log alpha, log b), numeric Jacobian.
  double u = std::log(alpha0), v = std::log(b0);
  std::vector<double> r = model_residuals(data, std::exp(u), std::exp(v));
  double rss = rss_of(r);
  double lambda = 1e-3;
  const double h = 1e-6;

  for (int iter = 0; iter < 200; ++iter) {
    const auto ru_p = model_residuals(data, std::exp(u + h), std::exp(v));
    const auto ru_m = model_residuals(data, std::exp(u - h), std::exp(v));
    const auto rv_p = model_residuals(data, std::exp(u), std::exp(v + h));
    const auto rv_m = model_residuals(data, std::exp(u), std::exp(v - h));

    double jtj_uu = 0.0, jtj_uv = 0.0, jtj_vv = 0.0, jtr_u = 0.0, jtr_v = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double ju = (ru_p[i] - ru_m[i]) / (2 * h);
      const double jv = (rv_p[i] - rv_m[i]) / (2 * h);
      jtj_uu += ju * ju;
      jtj_uv += ju * jv;
      jtj_vv += jv * jv;
      jtr_u += ju * r[i];
      jtr_v += jv * r[i];
    }

    const double auu = jtj_uu * (1.0 + lambda);
    const double avv = jtj_vv * (1.0 + lambda);
    const double det = auu * avv - jtj_uv * jtj_uv;
    if (!(std::abs(det) > 0.0)) break;
    const double du = -(avv * jtr_u - jtj_uv * jtr_v) / det;
    const double dv = -(auu * jtr_v - jtj_uv * jtr_u) / det;

    const auto r_trial = model_residuals(data, std::exp(u + du), std::exp(v + dv));
    const double rss_trial = rss_of(r_trial);
    if (std::isfinite(rss_trial) && rss_trial < rss) {
      const double gain = rss - rss_trial;
      u += du;
      v += dv;
      r = r_trial;
      rss = rss_trial;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (gain < 1e-12 * (1.0 + rss)) break;  // converged
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        throw NumericalError("pheno fit failed: residual decrease stalled");
      }
    }
  }

  if (!std::isfinite(rss)) {
    throw NumericalError("pheno fit failed: residual did not stay finite");
  }

  PhenoFit fit;
  fit.alpha = std::exp(u);
  fit.b = std::exp(v);
  fit.residual = std::sqrt(rss / static_cast<double>(r.size()));
  return fit;
}

}  // namespace

PhenoFit fit_alpha_b(const ClusterSeries& series, double p) {
  return fit_shared({extract_fit_data(series, p)});
}

PhenoFit fit_alpha_b_joint(const std::vector<const ClusterSeries*>& series_list,
                           const std::vector<double>& p_values) {
  if (series_list.empty() || series_list.size() != p_values.size()) {
    throw ValidationError("joint fit needs one p per series");
  }
  std::vector<FitData> data;
  data.reserve(series_list.size());
  for (std::size_t i = 0; i < series_list.size(); ++i) {
    data.push_back(extract_fit_data(*series_list[i], p_values[i]));
  }
  return fit_shared(data);
}

}  // namespace mqclab
