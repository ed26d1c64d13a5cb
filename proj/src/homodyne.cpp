#include "opo/homodyne.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace opo {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Unbiased sample variance (mean subtracted) of `n` draws from N(0, variance).
double sample_variance(double variance, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = normal(rng);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  return m2 / static_cast<double>(n - 1);
}

}  // namespace

void TraceConfig::validate() const {
  if (n_points < 2) throw std::invalid_argument("trace needs at least 2 points");
  if (samples_per_point < 2) throw std::invalid_argument("trace needs at least 2 samples per point");
  if (phase_profile.size() != n_points)
    throw std::invalid_argument("phase profile length must equal n_points");
  for (double p : phase_profile)
    if (!std::isfinite(p)) throw std::invalid_argument("phase profile must be finite");
  if (!std::isfinite(squeezing_angle)) throw std::invalid_argument("squeezing angle must be finite");
  if (!(dark_noise_variance >= 0.0) || !std::isfinite(dark_noise_variance))
    throw std::invalid_argument("dark noise variance must be finite and >= 0");
}

std::vector<double> linear_phase_sweep(std::size_t n_points, double start, double stop) {
  std::vector<double> phases(n_points);
  if (n_points == 1) {
    phases[0] = start;
    return phases;
  }
  const double step = (stop - start) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) phases[i] = start + step * static_cast<double>(i);
  return phases;
}

TraceConfig make_trace_config(std::size_t n_points, std::size_t samples_per_point,
                              double phase_start, double phase_stop, std::uint64_t seed,
                              double squeezing_angle) {
  TraceConfig c;
  c.n_points = n_points;
  c.samples_per_point = samples_per_point;
  c.phase_profile = linear_phase_sweep(n_points, phase_start, phase_stop);
  c.rng_seed = seed;
  c.squeezing_angle = squeezing_angle;
  return c;
}

double variance_at_phase(const QuadratureVariances& v, double theta, double squeezing_angle) {
  const double d = theta - squeezing_angle;
  const double c = std::cos(d);
  const double s = std::sin(d);
  return v.var_sq * c * c + v.var_asq * s * s;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

NoiseTrace simulate_trace(const QuadratureVariances& v, const TraceConfig& config) {
  config.validate();
  if (!(v.var_sq > 0.0) || !(v.var_asq > 0.0) || !std::isfinite(v.var_asq))
    throw std::invalid_argument("trace variances must be finite and > 0");

  NoiseTrace trace;
  trace.config = config;
  trace.kind = TraceKind::signal;
  trace.points.resize(config.n_points);
  for (std::size_t i = 0; i < config.n_points; ++i) {
    const double theta = config.phase_profile[i];
    const double var = variance_at_phase(v, theta, config.squeezing_angle) +
                       config.dark_noise_variance;
    const double estimate =
        sample_variance(var, config.samples_per_point, point_seed(config.rng_seed, i));
    trace.points[i] = {i, theta, to_db(estimate)};
  }
  return trace;
}

NoiseTrace simulate_calibration(const TraceConfig& config) {
  NoiseTrace trace = simulate_trace(QuadratureVariances{1.0, 1.0, false}, config);
  trace.kind = TraceKind::calibration;
  return trace;
}

std::vector<AttenuationPoint> simulate_attenuation_series(const QuadratureVariances& v,
                                                          const std::vector<double>& transmissions) {
  std::vector<AttenuationPoint> out;
  out.reserve(transmissions.size());
  for (double t : transmissions) {
    out.push_back({t, to_db(attenuate_variance(v.var_sq, t)),
                   to_db(attenuate_variance(v.var_asq, t))});
  }
  return out;
}

}  // namespace opo
