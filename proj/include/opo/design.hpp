#pragma once

// Coupling-rate design: choose port rates and operating cooperativity that
// minimize the squeezed variance, with pump clamping modeled as a cap on the
// reachable cooperativity.

#include <cstddef>
#include <limits>
#include <vector>

#include "opo/core.hpp"

namespace opo {

struct RateRange {
  double min = 0.0;  // rad/s
  double max = 0.0;  // rad/s

  bool contains(double x) const { return x >= min && x <= max; }
};

struct DesignConstraints {
  double gamma_int = 0.0;  // rad/s
  RateRange gamma1_range;
  RateRange gamma2_range;
  // Highest reachable cooperativity. A competing channel that clamps the pump
  // first shows up here as a cap.
  double max_cooperativity = std::numeric_limits<double>::infinity();
  double sideband_frequency = 0.0;  // Hz
  DetectionChain detection;
  bool equal_coupling = false;  // force gamma1 == gamma2

  /// std::invalid_argument for malformed values, InfeasibleError when the
  /// admissible (gamma1, gamma2) set is empty.
  void validate() const;
};

struct DesignPoint {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double cooperativity = 0.0;
  double predicted_var_sq = 1.0;  // linear
  double predicted_var_sq_db = 0.0;  // -inf when the variance is exactly 0
  double predicted_purity = 1.0;
  // gamma2 sits on the upper end of its range.
  bool at_range_edge = false;
  // At the range edge and the variance keeps falling towards 0 as gamma2
  // grows: the range, not the physics, sets the optimum.
  bool unbounded = false;
};

struct FrontierPoint {
  double gamma2 = 0.0;  // rad/s
  double predicted_var_sq_db = 0.0;
};

struct DesignSearchOptions {
  std::size_t grid_points = 32;  // per axis
  int refine_sweeps = 4;
  double refine_tolerance = 1e-12;  // relative bracket width for golden section
};

/// Cooperativity min(optimal_cooperativity, max_cooperativity) and the model
/// prediction there.
DesignPoint best_squeezing_at_fixed_rates(double gamma1, double gamma2,
                                          const DesignConstraints& constraints);

/// Grid plus golden-section refinement over (gamma1, gamma2). Ties go to the
/// smaller gamma1, then the larger gamma2.
DesignPoint optimize_outcoupling(const DesignConstraints& constraints,
                                 const DesignSearchOptions& options = {});

/// Best predicted variance for each gamma2 on the search grid.
std::vector<FrontierPoint> outcoupling_frontier(const DesignConstraints& constraints,
                                                const DesignSearchOptions& options = {});

/// Strongly overcoupled asymptote (gamma1 + gamma_int) / gamma2 of the
/// squeezed variance at threshold with ideal detection and f << Gamma.
double overcoupled_limit_variance(double gamma1, double gamma_int, double gamma2);

/// Search grid for one rate axis: log-spaced for ranges away from zero, zero
/// plus log-spaced points otherwise, a single point for a degenerate range.
std::vector<double> rate_axis(const RateRange& range, std::size_t n);

}  // namespace opo
