#pragma once

// Damped (Levenberg-Marquardt) nonlinear least squares for the small dense
// problems the estimators pose: a handful of parameters, up to a few thousand
// residuals.

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace opo {

struct LeastSquaresOptions {
  int max_iterations = 200;
  double parameter_tolerance = 1e-10;  // on |step| / (|params| + tol)
  double initial_damping = 1e-3;
};

/// Residual callback. When `jacobian` is non-null it must be filled with
/// d residual_i / d param_j; otherwise only residuals are needed.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                       Eigen::MatrixXd* jacobian)>;

/// Residual-only callback; the Jacobian is taken by central differences.
using ResidualOnlyFn =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct LeastSquaresSummary {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;  // at params
  double cost = 0.0;         // sum of squared residuals
  bool converged = false;
  int iterations = 0;
};

/// Accepted steps never increase the cost.
LeastSquaresSummary minimize_least_squares(const ResidualFn& fn, Eigen::VectorXd initial,
                                           const LeastSquaresOptions& options = {});

ResidualFn with_numeric_jacobian(ResidualOnlyFn fn);

/// Parameter standard errors sqrt(diag(s^2 (J^T J)^-1)) with s^2 = cost/(n-p),
/// or with s^2 = 1 when residuals are already normalized by known
/// uncertainties. Empty when J^T J is singular or n <= p.
std::optional<Eigen::VectorXd> standard_errors(const LeastSquaresSummary& summary,
                                               bool residuals_normalized);

enum class SandwichKind { hc0, hc1, hc3 };

/// Heteroscedasticity-consistent standard errors,
/// (J^T J)^-1 J^T diag(r_i^2 c_i) J (J^T J)^-1, with c_i = 1 (hc0),
/// n / (n - p) (hc1) or 1 / (1 - h_ii)^2 (hc3, h the hat matrix).
/// Rows with an all-zero Jacobian carry no information and are excluded from n.
std::optional<Eigen::VectorXd> sandwich_standard_errors(const LeastSquaresSummary& summary,
                                                        SandwichKind kind = SandwichKind::hc1);

}  // namespace opo
