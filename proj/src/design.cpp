#include "opo/design.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "opo/errors.hpp"

namespace opo {
namespace {

constexpr double kInvGolden = 0.6180339887498949;

bool admissible(double gamma1, double gamma2, const DesignConstraints& c) {
  return gamma1 + gamma2 + c.gamma_int > 0.0;
}

double objective(double gamma1, double gamma2, const DesignConstraints& c) {
  const ModeParams signal(gamma1, gamma2, c.gamma_int);
  const double coop = std::min(optimal_cooperativity(signal, c.sideband_frequency),
                               c.max_cooperativity);
  return squeezed_variance_at(signal, c.detection, coop, c.sideband_frequency);
}

// Lexicographic (variance, gamma1, -gamma2) with a small tie band on the
// variance.
bool better(double v_a, double g1_a, double g2_a, double v_b, double g1_b, double g2_b) {
  const double band = 1e-14 * std::max(1.0, std::abs(v_b));
  if (v_a < v_b - band) return true;
  if (v_a > v_b + band) return false;
  if (g1_a != g1_b) return g1_a < g1_b;
  return g2_a > g2_b;
}

struct Candidate {
  double gamma1;
  double gamma2;
  double value;
};

// Golden-section minimization of f on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kInvGolden * (b - a);
  double d = a + kInvGolden * (b - a);
  double fc = f(c), fd = f(d);
  const double scale = std::max(std::abs(lo), std::abs(hi));
  for (int i = 0; i < 200 && (b - a) > tol * std::max(scale, 1e-300); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::pair<double, double> neighbor_bracket(const std::vector<double>& axis, double x) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin());
  const double lo = i > 0 ? axis[i - 1] : axis.front();
  const double hi = i + 1 < axis.size() ? axis[i + 1] : axis.back();
  return {lo, hi};
}

}  // namespace

void DesignConstraints::validate() const {
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!finite_nonneg(gamma_int)) throw std::invalid_argument("gamma_int must be finite and >= 0");
  for (const RateRange* r : {&gamma1_range, &gamma2_range}) {
    if (!finite_nonneg(r->min) || !finite_nonneg(r->max))
      throw std::invalid_argument("rate ranges must be finite and >= 0");
  }
  if (!(max_cooperativity > 0.0)) throw std::invalid_argument("max_cooperativity must be > 0");
  if (!finite_nonneg(sideband_frequency))
    throw std::invalid_argument("sideband frequency must be finite and >= 0");
  if (gamma1_range.min > gamma1_range.max || gamma2_range.min > gamma2_range.max)
    throw InfeasibleError("empty feasible set: a rate range has min > max");
  if (equal_coupling &&
      std::max(gamma1_range.min, gamma2_range.min) > std::min(gamma1_range.max, gamma2_range.max))
    throw InfeasibleError("empty feasible set: equal coupling with disjoint rate ranges");
  if (gamma_int == 0.0 && gamma1_range.max == 0.0 && gamma2_range.max == 0.0)
    throw InfeasibleError("empty feasible set: every admissible mode has zero linewidth");
}

std::vector<double> rate_axis(const RateRange& range, std::size_t n) {
  if (range.min == range.max || n < 2) return {range.min};
  std::vector<double> axis;
  axis.reserve(n);
  double lo = range.min;
  std::size_t n_log = n;
  if (lo == 0.0) {
    axis.push_back(0.0);
    lo = range.max * 1e-4;
    --n_log;
  }
  const double log_lo = std::log(lo);
  const double log_hi = std::log(range.max);
  for (std::size_t i = 0; i < n_log; ++i) {
    const double t = n_log == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n_log - 1);
    axis.push_back(std::exp(log_lo + t * (log_hi - log_lo)));
  }
  if (range.min > 0.0) axis.front() = range.min;
  axis.back() = range.max;
  return axis;
}

DesignPoint best_squeezing_at_fixed_rates(double gamma1, double gamma2,
                                          const DesignConstraints& constraints) {
  constraints.validate();
  if (!constraints.gamma1_range.contains(gamma1) || !constraints.gamma2_range.contains(gamma2))
    throw std::invalid_argument("coupling rates lie outside the constraint ranges");

  const ModeParams signal(gamma1, gamma2, constraints.gamma_int);
  const double f = constraints.sideband_frequency;
  DesignPoint p;
  p.gamma1 = gamma1;
  p.gamma2 = gamma2;
  p.cooperativity = std::min(optimal_cooperativity(signal, f), constraints.max_cooperativity);
  p.predicted_var_sq = squeezed_variance_at(signal, constraints.detection, p.cooperativity, f);
  p.predicted_var_sq_db = p.predicted_var_sq > 0.0 ? to_db(p.predicted_var_sq)
                                                   : -std::numeric_limits<double>::infinity();
  p.predicted_purity = model_purity(signal, constraints.detection, p.cooperativity, f);

  const auto& r2 = constraints.gamma2_range;
  p.at_range_edge = r2.max > r2.min && gamma2 == r2.max;
  // As gamma2 -> inf the cooperativity target tends to min(1, cap) and the
  // variance to 1 - efficiency * 4 s / (1 + s)^2 with s = sqrt(min(1, cap)).
  const bool limit_is_zero =
      constraints.detection.efficiency() == 1.0 && constraints.max_cooperativity >= 1.0;
  p.unbounded = p.predicted_var_sq == 0.0 || (p.at_range_edge && limit_is_zero);
  return p;
}

DesignPoint optimize_outcoupling(const DesignConstraints& constraints,
                                 const DesignSearchOptions& options) {
  constraints.validate();
  const std::size_t n = std::max<std::size_t>(options.grid_points, 2);

  std::optional<Candidate> best;
  auto consider = [&](double g1, double g2) {
    if (!admissible(g1, g2, constraints)) return;
    const double v = objective(g1, g2, constraints);
    if (!best || better(v, g1, g2, best->value, best->gamma1, best->gamma2)) best = Candidate{g1, g2, v};
  };

  if (constraints.equal_coupling) {
    const RateRange shared{std::max(constraints.gamma1_range.min, constraints.gamma2_range.min),
                           std::min(constraints.gamma1_range.max, constraints.gamma2_range.max)};
    const auto axis = rate_axis(shared, n);
    for (double g : axis) consider(g, g);
    if (!best) throw InfeasibleError("empty feasible set");
    if (axis.size() > 1) {
      const auto [lo, hi] = neighbor_bracket(axis, best->gamma1);
      auto f = [&](double g) {
        return admissible(g, g, constraints) ? objective(g, g, constraints)
                                             : std::numeric_limits<double>::infinity();
      };
      const double g = golden_section(f, lo, hi, options.refine_tolerance);
      consider(g, g);
    }
  } else {
    const auto axis1 = rate_axis(constraints.gamma1_range, n);
    const auto axis2 = rate_axis(constraints.gamma2_range, n);
    for (double g1 : axis1)
      for (double g2 : axis2) consider(g1, g2);
    if (!best) throw InfeasibleError("empty feasible set");

    for (int sweep = 0; sweep < options.refine_sweeps; ++sweep) {
      const Candidate before = *best;
      if (axis1.size() > 1) {
        const double g2 = best->gamma2;
        const auto [lo, hi] = neighbor_bracket(axis1, best->gamma1);
        auto f = [&](double g1) {
          return admissible(g1, g2, constraints) ? objective(g1, g2, constraints)
                                                 : std::numeric_limits<double>::infinity();
        };
        consider(golden_section(f, lo, hi, options.refine_tolerance), g2);
      }
      if (axis2.size() > 1) {
        const double g1 = best->gamma1;
        const auto [lo, hi] = neighbor_bracket(axis2, best->gamma2);
        auto f = [&](double g2) {
          return admissible(g1, g2, constraints) ? objective(g1, g2, constraints)
                                                 : std::numeric_limits<double>::infinity();
        };
        consider(g1, golden_section(f, lo, hi, options.refine_tolerance));
      }
      if (best->gamma1 == before.gamma1 && best->gamma2 == before.gamma2) break;
    }
  }
  return best_squeezing_at_fixed_rates(best->gamma1, best->gamma2, constraints);
}

std::vector<FrontierPoint> outcoupling_frontier(const DesignConstraints& constraints,
                                                const DesignSearchOptions& options) {
  constraints.validate();
  const std::size_t n = std::max<std::size_t>(options.grid_points, 2);
  std::vector<FrontierPoint> frontier;
  if (constraints.equal_coupling) {
    const RateRange shared{std::max(constraints.gamma1_range.min, constraints.gamma2_range.min),
                           std::min(constraints.gamma1_range.max, constraints.gamma2_range.max)};
    for (double g : rate_axis(shared, n)) {
      if (!admissible(g, g, constraints)) continue;
      frontier.push_back({g, best_squeezing_at_fixed_rates(g, g, constraints).predicted_var_sq_db});
    }
    return frontier;
  }
  const auto axis1 = rate_axis(constraints.gamma1_range, n);
  for (double g2 : rate_axis(constraints.gamma2_range, n)) {
    std::optional<double> best_g1;
    double best_v = 0.0;
    for (double g1 : axis1) {
      if (!admissible(g1, g2, constraints)) continue;
      const double v = objective(g1, g2, constraints);
      if (!best_g1 || better(v, g1, g2, best_v, *best_g1, g2)) {
        best_g1 = g1;
        best_v = v;
      }
    }
    if (best_g1)
      frontier.push_back({g2, best_v > 0.0 ? to_db(best_v) : -std::numeric_limits<double>::infinity()});
  }
  return frontier;
}

double overcoupled_limit_variance(double gamma1, double gamma_int, double gamma2) {
  if (!(gamma2 > 0.0)) throw std::invalid_argument("gamma2 must be > 0");
  if (!(gamma1 >= 0.0) || !(gamma_int >= 0.0))
    throw std::invalid_argument("gamma1 and gamma_int must be >= 0");
  return (gamma1 + gamma_int) / gamma2;
}

}  // namespace opo
