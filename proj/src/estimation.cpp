#include "opo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "opo/errors.hpp"

namespace opo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// log(1 + exp(k u)) / k and its derivative sigmoid(k u), overflow-safe.
double softplus(double u, double k) {
  const double z = k * u;
  return (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) / k;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_fit_size(const DataSeries& data) {
  if (data.size() < 3) throw AnalysisError("fit needs at least 3 data points");
}

}  // namespace

DataSeries::DataSeries(std::vector<DataPoint> points) : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw SchemaError("data series contains a non-finite value");
    if (p.uncertainty && !(*p.uncertainty > 0.0 && std::isfinite(*p.uncertainty)))
      throw SchemaError("data series uncertainties must be finite and > 0");
  }
  std::stable_sort(points_.begin(), points_.end(),
                   [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].x > points_[i - 1].x))
      throw SchemaError("data series x values must be distinct");
  }
}

bool DataSeries::weighted() const {
  return !points_.empty() && std::all_of(points_.begin(), points_.end(),
                                         [](const DataPoint& p) { return p.uncertainty.has_value(); });
}

// ---------------------------------------------------------------------------
// Threshold

FitResult fit_threshold_curve(const DataSeries& data, const ThresholdFitOptions& options) {
  require_fit_size(data);
  const auto& pts = data.points();
  const std::size_t n = pts.size();

  double x_scale = 0.0;
  double y_scale = 0.0;
  for (const auto& p : pts) {
    x_scale = std::max(x_scale, std::abs(p.x));
    y_scale = std::max(y_scale, p.y);
  }
  if (!(y_scale > 0.0) || !(x_scale > 0.0)) throw AnalysisError("threshold not bracketed");

  const bool weighted = data.weighted();
  Eigen::VectorXd xs(n), ys(n), ws(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].x < 0.0) throw SchemaError("pump power must be >= 0");
    xs[i] = pts[i].x / x_scale;
    ys[i] = pts[i].y / y_scale;
    ws[i] = weighted ? y_scale / *pts[i].uncertainty : 1.0;
  }

  // Above threshold y is linear in sqrt(P): y = (A / sqrt(P_th)) sqrt(P) - A.
  std::vector<std::size_t> lit;
  for (std::size_t i = 0; i < n; ++i)
    if (ys[i] > 0.05) lit.push_back(i);
  if (lit.size() < 2) throw AnalysisError("threshold not bracketed");

  double amp0 = 0.0;
  double pth0 = 0.0;
  {
    double sr = 0.0, sy = 0.0, srr = 0.0, sry = 0.0;
    for (auto i : lit) {
      const double r = std::sqrt(xs[i]);
      sr += r;
      sy += ys[i];
      srr += r * r;
      sry += r * ys[i];
    }
    const double m = static_cast<double>(lit.size());
    const double det = m * srr - sr * sr;
    if (det > 0.0) {
      const double slope = (m * sry - sr * sy) / det;
      const double intercept = (sy - slope * sr) / m;
      amp0 = -intercept;
      if (slope > 0.0 && amp0 > 0.0) pth0 = (amp0 / slope) * (amp0 / slope);
    }
    if (!(pth0 > 0.0) || !(pth0 < xs[lit.front()])) {
      pth0 = 0.5 * xs[lit.front()];
      amp0 = ys[lit.back()] / (std::sqrt(xs[lit.back()] / pth0) - 1.0);
    }
  }

  auto make_fn = [&](std::optional<double> sharpness) -> ResidualFn {
    return [&, sharpness](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
      const double amp = p[0];
      const double pth = p[1];
      r.resize(static_cast<Eigen::Index>(n));
      if (jac) jac->resize(static_cast<Eigen::Index>(n), 2);
      if (!(pth > 0.0)) {
        r.setConstant(kNaN);
        return;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double root = std::sqrt(xs[i] / pth);
        const double u = root - 1.0;
        double shape, dshape;
        if (sharpness) {
          shape = softplus(u, *sharpness);
          dshape = sigmoid(*sharpness * u);
        } else {
          shape = u > 0.0 ? u : 0.0;
          dshape = u > 0.0 ? 1.0 : 0.0;
        }
        const auto k = static_cast<Eigen::Index>(i);
        r[k] = ws[i] * (amp * shape - ys[i]);
        if (jac) {
          (*jac)(k, 0) = ws[i] * shape;
          (*jac)(k, 1) = ws[i] * amp * dshape * (-0.5 * root / pth);
        }
      }
    };
  };

  Eigen::VectorXd params(2);
  params << amp0, pth0;
  int iterations = 0;
  for (double k : options.sharpness_schedule) {
    auto stage = minimize_least_squares(make_fn(k), params, options.solver);
    iterations += stage.iterations;
    params = stage.params;
  }
  const auto final_stage = minimize_least_squares(make_fn(std::nullopt), params, options.solver);
  iterations += final_stage.iterations;

  FitResult result;
  result.parameters["A"] = final_stage.params[0] * y_scale;
  result.parameters["P_th"] = final_stage.params[1] * x_scale;
  result.iterations = iterations;
  result.converged = final_stage.converged;
  result.residual_norm =
      weighted ? std::sqrt(final_stage.cost) : std::sqrt(final_stage.cost) * y_scale;
  if (result.converged) {
    // Unweighted power sweeps are heteroscedastic (noise tracks signal), so
    // the classical s^2 (J^T J)^-1 over-covers; use the HC3 sandwich instead.
    const auto se = weighted ? standard_errors(final_stage, true)
                             : sandwich_standard_errors(final_stage, SandwichKind::hc3);
    if (se) {
      result.standard_errors["A"] = (*se)[0] * y_scale;
      result.standard_errors["P_th"] = (*se)[1] * x_scale;
    } else {
      result.standard_errors["A"] = kNaN;
      result.standard_errors["P_th"] = kNaN;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Coupling constant

double coupling_constant_from_threshold(const ThresholdMeasurement& m) {
  if (!(m.threshold_power > 0.0) || !std::isfinite(m.threshold_power))
    throw std::invalid_argument("threshold power must be finite and > 0");
  if (!(m.pump.gamma1() > 0.0)) throw std::invalid_argument("pump port 1 coupling must be > 0");
  if (!(m.pump_angular_frequency > 0.0))
    throw std::invalid_argument("pump angular frequency must be > 0");
  const double gamma = m.signal.total();
  const double gamma_p = m.pump.total();
  return std::sqrt(kHbar * m.pump_angular_frequency * gamma * gamma * gamma_p * gamma_p /
                   (8.0 * m.pump.gamma1() * m.threshold_power));
}

FitResult extract_coupling_constant(const std::vector<ThresholdMeasurement>& measurements) {
  if (measurements.empty()) throw std::invalid_argument("need at least one threshold measurement");
  std::vector<double> gs;
  gs.reserve(measurements.size());
  for (const auto& m : measurements) gs.push_back(coupling_constant_from_threshold(m));

  const double mean = mean_of(gs);
  const double spread = sample_std(gs);
  FitResult result;
  result.parameters["g"] = mean;
  result.standard_errors["g"] = spread;
  result.residual_norm = spread * std::sqrt(static_cast<double>(gs.size() - 1));
  result.converged = true;
  return result;
}

// ---------------------------------------------------------------------------
// Squeezing versus pump

FitResult fit_squeezing_vs_pump(const DataSeries& data, const SqueezingFitConfig& config) {
  const int n_free = static_cast<int>(config.fit_efficiency) +
                     static_cast<int>(config.fit_coupling_ratio) +
                     static_cast<int>(config.fit_linewidth);
  if (n_free == 0) throw AnalysisError("unidentifiable configuration: no free parameters");
  if (config.fit_efficiency && config.fit_coupling_ratio)
    throw AnalysisError(
        "unidentifiable configuration: efficiency and coupling ratio enter only as a product");
  if (data.size() < static_cast<std::size_t>(n_free) + 1)
    throw AnalysisError("unidentifiable configuration: fewer points than free parameters + 1");
  require_fit_size(data);

  const auto& pts = data.points();
  for (const auto& p : pts)
    if (p.x < 0.0) throw SchemaError("pump ratio P/P_th must be >= 0");

  const double gamma0 = config.signal.total();
  const double eff0 = config.detection.efficiency();
  const double ratio0 = config.signal.gamma2() / gamma0;
  const bool weighted = data.weighted();
  const double two_pi_f = 2.0 * kPi * config.sideband_frequency;
  const double sign = config.quadrature == Quadrature::squeezed ? -1.0 : 1.0;

  // Parameter vector holds the free entries; Gamma is carried as Gamma / Gamma0.
  struct Unpacked {
    double eff, ratio, gamma;
  };
  auto unpack = [&](const Eigen::VectorXd& p) {
    Unpacked u{eff0, ratio0, gamma0};
    Eigen::Index k = 0;
    if (config.fit_efficiency) u.eff = p[k++];
    if (config.fit_coupling_ratio) u.ratio = p[k++];
    if (config.fit_linewidth) u.gamma = p[k++] * gamma0;
    return u;
  };

  auto model_db = [&](const Unpacked& u, double coop) {
    if (!(u.gamma > 0.0)) return kNaN;
    const double s = std::sqrt(coop);
    const double w = two_pi_f / u.gamma;
    const double c = u.eff * u.ratio;
    const double denom = sign < 0.0 ? (1.0 + s) * (1.0 + s) + w * w : (1.0 - s) * (1.0 - s) + w * w;
    if (denom == 0.0) return kNaN;
    const double var = 1.0 + sign * 4.0 * c * s / denom;
    return var > 0.0 ? 10.0 * std::log10(var) : kNaN;
  };

  ResidualFn fn = with_numeric_jacobian([&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const Unpacked u = unpack(p);
    r.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double w = pts[i].uncertainty && weighted ? 1.0 / *pts[i].uncertainty : 1.0;
      r[static_cast<Eigen::Index>(i)] = w * (model_db(u, pts[i].x) - pts[i].y);
    }
  });

  Eigen::VectorXd init(n_free);
  {
    Eigen::Index k = 0;
    if (config.fit_efficiency) init[k++] = eff0;
    if (config.fit_coupling_ratio) init[k++] = ratio0;
    if (config.fit_linewidth) init[k++] = 1.0;
  }
  {
    Eigen::VectorXd r0;
    fn(init, r0, nullptr);
    if (!r0.allFinite())
      throw AnalysisError("model is not finite at the initial parameters for these data");
  }

  const auto summary = minimize_least_squares(fn, init, config.solver);
  const Unpacked best = unpack(summary.params);

  FitResult result;
  result.iterations = summary.iterations;
  result.converged = summary.converged;
  result.residual_norm = std::sqrt(summary.cost);
  if (config.fit_efficiency) result.parameters["efficiency"] = best.eff;
  if (config.fit_coupling_ratio) result.parameters["coupling_ratio"] = best.ratio;
  if (config.fit_linewidth) result.parameters["Gamma"] = best.gamma;
  const double w = two_pi_f / best.gamma;
  result.parameters["optimal_pump_ratio"] = 1.0 + w * w;

  if (result.converged) {
    const auto se = standard_errors(summary, weighted);
    Eigen::Index k = 0;
    auto put = [&](const char* name, double scale) {
      result.standard_errors[name] = se ? (*se)[k] * scale : kNaN;
      ++k;
    };
    if (config.fit_efficiency) put("efficiency", 1.0);
    if (config.fit_coupling_ratio) put("coupling_ratio", 1.0);
    if (config.fit_linewidth) put("Gamma", gamma0);
  }
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].x > 1.0) result.extrapolated_points.push_back(i);
  return result;
}

// ---------------------------------------------------------------------------
// Trace extrema

ExtremaResult extract_extrema(const NoiseTrace& trace, const NoiseTrace& calibration,
                              const ExtremaOptions& options) {
  const std::size_t n = trace.points.size();
  const std::size_t window = options.window;
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("extrema window must be odd and >= 3");
  if (calibration.points.size() != n)
    throw std::invalid_argument("trace and calibration must have the same number of points");
  const std::size_t half = window / 2;
  if (n < 2 * window) throw AnalysisError("no extrema: trace too short for the extrema window");

  std::vector<double> cal(n);
  for (std::size_t i = 0; i < n; ++i) cal[i] = calibration.points[i].variance_db;
  const double shot = mean_of(cal);
  const double cal_std = sample_std(cal);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = trace.points[i].variance_db - shot;

  // Quadratic Savitzky-Golay weights for a (2m+1)-point window.
  const double m = static_cast<double>(half);
  const double norm = (2.0 * m - 1.0) * (2.0 * m + 1.0) * (2.0 * m + 3.0);
  std::vector<double> weights(window);
  double noise_gain = 0.0;
  for (std::size_t j = 0; j < window; ++j) {
    const double k = static_cast<double>(j) - m;
    weights[j] = 3.0 * (3.0 * m * m + 3.0 * m - 1.0 - 5.0 * k * k) / norm;
    noise_gain += weights[j] * weights[j];
  }

  // smooth[i] valid for i in [half, n - half).
  std::vector<double> smooth(n, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = half; i + half < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < window; ++j) acc += weights[j] * y[i + j - half];
    smooth[i] = acc;
    lo = std::min(lo, acc);
    hi = std::max(hi, acc);
  }

  const double smooth_noise = cal_std * std::sqrt(noise_gain);
  if (!(hi - lo > options.flatness_sigmas * smooth_noise))
    throw AnalysisError("no extrema: trace is flat within noise");

  // Lobes: runs of the smoothed trace on one side of the midline, with a
  // hysteresis band so noise near the midline does not split a lobe.
  const double midline = 0.5 * (lo + hi);
  const double band = 0.25 * (hi - lo);
  struct Lobe {
    bool high;
    std::size_t begin;    // first point beyond the band
    std::size_t last_on;  // last point beyond the band on this side
  };
  std::vector<Lobe> lobes;
  for (std::size_t i = half; i + half < n; ++i) {
    const int side = smooth[i] > midline + band ? 1 : smooth[i] < midline - band ? -1 : 0;
    if (side == 0) continue;
    if (lobes.empty() || (side > 0) != lobes.back().high) {
      lobes.push_back({side > 0, i, i});
    } else {
      lobes.back().last_on = i;
    }
  }

  // Only lobes bracketed on both sides by the band count: a lobe cut off by
  // the record edge may have its turning point outside the record. Each lobe
  // contributes the vertex of a quadratic fitted to the raw points around its
  // smoothed extremum.
  std::vector<double> minima;
  std::vector<double> maxima;
  for (const Lobe& lobe : lobes) {
    if (lobe.begin == half || lobe.last_on + half + 1 == n) continue;
    std::size_t k = lobe.begin;
    for (std::size_t i = lobe.begin; i <= lobe.last_on; ++i) {
      if (lobe.high ? smooth[i] > smooth[k] : smooth[i] < smooth[k]) k = i;
    }
    const std::size_t hw = std::max(half, (lobe.last_on + 1 - lobe.begin) / 6);
    if (k < hw || k + hw >= n) continue;

    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d aty = Eigen::Vector3d::Zero();
    for (std::size_t i = k - hw; i <= k + hw; ++i) {
      const double t = static_cast<double>(i) - static_cast<double>(k);
      const Eigen::Vector3d row(1.0, t, t * t);
      ata += row * row.transpose();
      aty += row * y[i];
    }
    const Eigen::Vector3d c = ata.ldlt().solve(aty);
    double value = smooth[k];
    const bool curved = lobe.high ? c[2] < 0.0 : c[2] > 0.0;
    if (curved) {
      const double tv = -c[1] / (2.0 * c[2]);
      if (std::abs(tv) <= static_cast<double>(hw)) value = c[0] + c[1] * tv + c[2] * tv * tv;
    }
    (lobe.high ? maxima : minima).push_back(value);
  }
  if (minima.empty() || maxima.empty()) throw AnalysisError("no extrema: trace has no full oscillation");

  auto stderr_of = [&](const std::vector<double>& v) {
    return v.size() >= 2 ? sample_std(v) / std::sqrt(static_cast<double>(v.size())) : smooth_noise;
  };

  ExtremaResult r;
  r.var_sq_db = mean_of(minima);
  r.var_sq_db_err = stderr_of(minima);
  r.var_asq_db = mean_of(maxima);
  r.var_asq_db_err = stderr_of(maxima);
  r.n_minima = minima.size();
  r.n_maxima = maxima.size();
  r.shot_noise_level_db = shot;
  return r;
}

PurityEstimate purity_with_uncertainty(double var_sq_db, double var_sq_db_err, double var_asq_db,
                                       double var_asq_db_err) {
  if (!std::isfinite(var_sq_db) || !std::isfinite(var_asq_db) || !std::isfinite(var_sq_db_err) ||
      !std::isfinite(var_asq_db_err))
    throw std::invalid_argument("purity inputs must be finite");
  PurityEstimate p;
  p.purity = std::pow(10.0, -(var_sq_db + var_asq_db) / 20.0);
  p.uncertainty = p.purity * std::log(10.0) / 20.0 *
                  std::sqrt(var_sq_db_err * var_sq_db_err + var_asq_db_err * var_asq_db_err);
  return p;
}

}  // namespace opo
