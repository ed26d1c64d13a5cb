#pragma once

// Run configuration: a JSON document with nested sections. Rates and
// frequencies in files are ordinary frequencies with the unit in the key
// name (`gamma1_hz` is gamma1 / 2pi); they are converted to rad/s on load.
//
//   {
//     "seed": 42,
//     "system": {
//       "signal": {"gamma1_hz": ..., "gamma2_hz": ..., "gamma_int_hz": ...},
//       "pump":   {"gamma1_hz": ..., "gamma2_hz": ..., "gamma_int_hz": ...},
//       "g_hz": 2100, "pump_wavelength_m": 532e-9, "coupling_efficiency": 0.75
//     },
//     "detection": {"eta": 0.86, "visibility": 0.92},
//     "operating_point": {"incident_pump_power_w": 3e-4, "sideband_frequency_hz": 5e5},
//     "spectrum": {...}, "trace": {...}, "attenuation": {...},
//     "threshold_sweep": {...}, "squeezing_sweep": {...},
//     "constraints": {...}, "fit": {...}
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opo/core.hpp"
#include "opo/design.hpp"
#include "opo/estimation.hpp"
#include "opo/homodyne.hpp"

namespace opo::config {

struct SpectrumSection {
  double freq_start_hz = 1e5;
  double freq_stop_hz = 1e7;
  std::size_t n_points = 100;
  bool log_spacing = true;
};

struct TraceSection {
  std::size_t n_points = 400;
  std::size_t samples_per_point = 10000;
  double phase_start_rad = 0.0;
  double phase_stop_rad = 4.0 * kPi;
  double squeezing_angle_rad = 0.3;
  double dark_noise_variance = 0.0;
  // When both are set the trace uses these variances instead of the model.
  std::optional<double> var_sq_db;
  std::optional<double> var_asq_db;
};

struct AttenuationSection {
  std::vector<double> transmissions;
};

/// Synthetic signal-vs-pump data (incoupled power) from the above-threshold model.
struct ThresholdSweepSection {
  double power_max_w = 0.0;
  std::size_t n_points = 50;
  double relative_noise = 0.0;  // multiplicative Gaussian, 1 sigma
};

/// Synthetic squeezing-vs-P/P_th data from the model at the configured sideband.
struct SqueezingSweepSection {
  double pump_ratio_min = 0.05;
  double pump_ratio_max = 0.95;
  std::size_t n_points = 20;
  double noise_db = 0.0;  // additive Gaussian, 1 sigma
  Quadrature quadrature = Quadrature::squeezed;
};

struct DesignSection {
  DesignConstraints constraints;
  std::size_t grid_points = 32;
};

struct FitSection {
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> calibration;
  bool fit_efficiency = true;
  bool fit_coupling_ratio = false;
  bool fit_linewidth = false;
  Quadrature quadrature = Quadrature::squeezed;
  std::optional<double> sideband_frequency_hz;
  std::size_t window = 5;
  std::optional<std::size_t> max_iterations;  // solver cap per stage
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::optional<SystemParams> system;
  DetectionChain detection;
  std::optional<OperatingPoint> operating_point;
  std::optional<SpectrumSection> spectrum;
  std::optional<TraceSection> trace;
  std::optional<AttenuationSection> attenuation;
  std::optional<ThresholdSweepSection> threshold_sweep;
  std::optional<SqueezingSweepSection> squeezing_sweep;
  std::optional<DesignSection> design;
  std::optional<FitSection> fit;
};

/// Throws SchemaError on malformed JSON, unknown keys, wrong types, or values
/// violating model invariants. Relative paths resolve against `base_dir`.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace opo::config
