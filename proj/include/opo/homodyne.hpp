#pragma once

// Synthetic balanced-homodyne records: phase-swept noise traces as an
// electronic spectrum analyzer would display them, shot-noise calibration
// traces, and neutral-density attenuation series.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "opo/core.hpp"

namespace opo {

struct TraceConfig {
  std::size_t n_points = 0;
  // Effective number of independent quadrature samples behind each displayed
  // point. Stands in for the analyzer's RBW / VBW / sweep-time settings.
  std::size_t samples_per_point = 0;
  std::vector<double> phase_profile;  // LO phase per point, rad
  std::uint64_t rng_seed = 0;
  double squeezing_angle = 0.0;      // rad
  double dark_noise_variance = 0.0;  // additive, shot-noise units

  /// Throws std::invalid_argument unless n_points >= 2, samples_per_point >= 2,
  /// the phase profile has n_points finite entries and dark noise is >= 0.
  void validate() const;
};

/// Evenly spaced LO phases from start to stop inclusive.
std::vector<double> linear_phase_sweep(std::size_t n_points, double start, double stop);

TraceConfig make_trace_config(std::size_t n_points, std::size_t samples_per_point,
                              double phase_start, double phase_stop, std::uint64_t seed,
                              double squeezing_angle = 0.0);

enum class TraceKind { calibration, signal };

struct TracePoint {
  std::size_t index = 0;
  double phase = 0.0;        // rad
  double variance_db = 0.0;  // relative to shot noise
};

struct NoiseTrace {
  std::vector<TracePoint> points;
  TraceConfig config;
  TraceKind kind = TraceKind::signal;
};

struct AttenuationPoint {
  double transmission = 0.0;
  double var_sq_db = 0.0;
  double var_asq_db = 0.0;
};

/// V(theta) = var_sq cos^2(theta - theta0) + var_asq sin^2(theta - theta0).
double variance_at_phase(const QuadratureVariances& v, double theta, double squeezing_angle);

/// Seed of the generator used for point `index`; a pure function of
/// (seed, index) so points can be produced in any order.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

NoiseTrace simulate_trace(const QuadratureVariances& v, const TraceConfig& config);
NoiseTrace simulate_calibration(const TraceConfig& config);

std::vector<AttenuationPoint> simulate_attenuation_series(const QuadratureVariances& v,
                                                          const std::vector<double>& transmissions);

}  // namespace opo
