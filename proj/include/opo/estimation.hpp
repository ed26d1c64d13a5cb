#pragma once

// Inverse procedures: threshold and coupling-constant extraction, fits of
// squeezing versus pump power, and extrema analysis of phase-swept traces.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opo/core.hpp"
#include "opo/homodyne.hpp"
#include "opo/least_squares.hpp"

namespace opo {

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> uncertainty;  // 1-sigma on y
};

/// Points sorted by x. Construction throws SchemaError on non-finite values,
/// repeated x, or non-positive uncertainties.
class DataSeries {
public:
  DataSeries() = default;
  explicit DataSeries(std::vector<DataPoint> points);

  const std::vector<DataPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  /// True when every point carries an uncertainty.
  bool weighted() const;

private:
  std::vector<DataPoint> points_;
};

struct FitResult {
  std::map<std::string, double> parameters;
  // Present only when converged.
  std::map<std::string, double> standard_errors;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  // Indices (into the sorted series) of points evaluated past threshold.
  std::vector<std::size_t> extrapolated_points;
};

struct ThresholdFitOptions {
  LeastSquaresOptions solver;
  // Softplus sharpness schedule (in units of sqrt(P/P_th) - 1) used before the
  // final pass on the exact kinked model.
  std::vector<double> sharpness_schedule{20.0, 200.0, 2e3, 2e4, 2e5};
};

/// Fits y = A max(0, sqrt(P/P_th) - 1) to (P, y) data, returning parameters
/// "P_th" and "A". Throws AnalysisError("threshold not bracketed") when fewer
/// than two points carry signal.
FitResult fit_threshold_curve(const DataSeries& data, const ThresholdFitOptions& options = {});

struct ThresholdMeasurement {
  ModeParams signal;
  ModeParams pump;
  double pump_angular_frequency;  // rad/s
  double threshold_power;         // W, incoupled
};

/// Coupling constant from measured thresholds. Parameter "g" is the mean over
/// measurements (rad/s); its standard_errors entry is the sample standard
/// deviation (0 for a single measurement).
FitResult extract_coupling_constant(const std::vector<ThresholdMeasurement>& measurements);
double coupling_constant_from_threshold(const ThresholdMeasurement& m);

enum class Quadrature { squeezed, anti_squeezed };

struct SqueezingFitConfig {
  DetectionChain detection;     // initial / fixed eta and visibility
  ModeParams signal{0.0, 1.0, 0.0};  // initial / fixed gamma2 / Gamma and Gamma
  double sideband_frequency = 0.0;   // Hz
  Quadrature quadrature = Quadrature::squeezed;
  bool fit_efficiency = true;        // "efficiency": eta V^2
  bool fit_coupling_ratio = false;   // "coupling_ratio": gamma2 / Gamma
  bool fit_linewidth = false;        // "Gamma": rad/s
  LeastSquaresOptions solver;
};

/// Fits variance (dB) against x = P/P_th, where cooperativity equals P/P_th.
/// Also reports "optimal_pump_ratio" = 1 + (2 pi f / Gamma)^2 for the fitted
/// Gamma. Throws AnalysisError for unidentifiable configurations: nothing
/// free, efficiency and coupling ratio both free (they enter only as a
/// product), or fewer points than free parameters + 1.
FitResult fit_squeezing_vs_pump(const DataSeries& data, const SqueezingFitConfig& config);

struct ExtremaOptions {
  std::size_t window = 5;  // odd; a point is an extremum if strict min/max of its window
  // Peak-to-peak of the smoothed trace must exceed this many smoothed-noise
  // standard deviations for the trace to count as oscillating.
  double flatness_sigmas = 10.0;
};

struct ExtremaResult {
  double var_sq_db = 0.0;
  double var_sq_db_err = 0.0;
  double var_asq_db = 0.0;
  double var_asq_db_err = 0.0;
  std::size_t n_minima = 0;
  std::size_t n_maxima = 0;
  double shot_noise_level_db = 0.0;  // calibration mean that was subtracted
};

/// Normalizes the trace to the calibration mean, smooths it with a quadratic
/// Savitzky-Golay filter of the window width, and averages the local minima
/// below and the local maxima above the trace midline. Uncertainties are
/// standard errors of those means. Throws AnalysisError("no extrema") for a
/// trace that is flat within noise.
ExtremaResult extract_extrema(const NoiseTrace& trace, const NoiseTrace& calibration,
                              const ExtremaOptions& options = {});

struct PurityEstimate {
  double purity = 1.0;
  double uncertainty = 0.0;
};

/// purity = 10^(-(sq + asq)/20), first-order propagated uncertainty.
PurityEstimate purity_with_uncertainty(double var_sq_db, double var_sq_db_err, double var_asq_db,
                                       double var_asq_db_err);

}  // namespace opo
