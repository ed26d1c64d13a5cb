#include "opo/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace opo {

LeastSquaresSummary minimize_least_squares(const ResidualFn& fn, Eigen::VectorXd initial,
                                           const LeastSquaresOptions& options) {
  LeastSquaresSummary out;
  out.params = std::move(initial);
  const Eigen::Index n_params = out.params.size();

  fn(out.params, out.residuals, &out.jacobian);
  out.cost = out.residuals.squaredNorm();

  double damping = options.initial_damping;
  Eigen::VectorXd trial_residuals;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const Eigen::MatrixXd normal = out.jacobian.transpose() * out.jacobian;
    const Eigen::VectorXd gradient = out.jacobian.transpose() * out.residuals;
    if (out.cost == 0.0 || gradient.lpNorm<Eigen::Infinity>() == 0.0) {
      out.converged = true;
      return out;
    }

    Eigen::VectorXd scale = normal.diagonal();
    const double floor = std::max(scale.maxCoeff(), 1.0) * 1e-12;
    for (Eigen::Index j = 0; j < n_params; ++j) scale[j] = std::max(scale[j], floor);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += damping * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      const double step_norm = step.norm();
      const double tol = options.parameter_tolerance * (out.params.norm() + options.parameter_tolerance);

      const Eigen::VectorXd trial = out.params + step;
      fn(trial, trial_residuals, nullptr);
      const double trial_cost = trial_residuals.allFinite() ? trial_residuals.squaredNorm()
                                                            : std::numeric_limits<double>::infinity();
      if (trial_cost <= out.cost) {
        out.params = trial;
        out.cost = trial_cost;
        fn(out.params, out.residuals, &out.jacobian);
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
        if (step_norm <= tol) {
          out.converged = true;
          return out;
        }
      } else {
        // A rejected step that is already below tolerance means no
        // representable improvement is left around the current point.
        if (step_norm <= tol || damping > 1e20) {
          out.converged = step_norm <= tol;
          return out;
        }
        damping *= 10.0;
      }
    }
  }
  return out;
}

ResidualFn with_numeric_jacobian(ResidualOnlyFn fn) {
  return [fn = std::move(fn)](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    fn(p, r);
    if (jac == nullptr) return;
    jac->resize(r.size(), p.size());
    Eigen::VectorXd shifted = p;
    Eigen::VectorXd plus;
    Eigen::VectorXd minus;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double h = 1e-6 * std::max(std::abs(p[j]), 1e-3);
      shifted[j] = p[j] + h;
      fn(shifted, plus);
      shifted[j] = p[j] - h;
      fn(shifted, minus);
      shifted[j] = p[j];
      jac->col(j) = (plus - minus) / (2.0 * h);
    }
  };
}

std::optional<Eigen::VectorXd> standard_errors(const LeastSquaresSummary& summary,
                                               bool residuals_normalized) {
  const Eigen::Index n = summary.residuals.size();
  const Eigen::Index p = summary.params.size();
  if (n <= p) return std::nullopt;
  const Eigen::MatrixXd normal = summary.jacobian.transpose() * summary.jacobian;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (!lu.isInvertible()) return std::nullopt;
  const double s2 = residuals_normalized ? 1.0 : summary.cost / static_cast<double>(n - p);
  Eigen::VectorXd se = (s2 * lu.inverse()).diagonal().cwiseMax(0.0).cwiseSqrt();
  return se;
}

std::optional<Eigen::VectorXd> sandwich_standard_errors(const LeastSquaresSummary& summary,
                                                        SandwichKind kind) {
  const Eigen::MatrixXd& jac = summary.jacobian;
  const Eigen::Index p = summary.params.size();
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < jac.rows(); ++i) n += jac.row(i).squaredNorm() > 0.0;
  if (n <= p) return std::nullopt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jac.transpose() * jac);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::MatrixXd bread = lu.inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < jac.rows(); ++i) {
    const Eigen::VectorXd row = jac.row(i).transpose();
    double r2 = summary.residuals[i] * summary.residuals[i];
    if (kind == SandwichKind::hc3) {
      const double h = row.dot(bread * row);
      if (!(h < 1.0)) return std::nullopt;
      r2 /= (1.0 - h) * (1.0 - h);
    }
    meat += r2 * row * row.transpose();
  }
  Eigen::MatrixXd cov = bread * meat * bread;
  if (kind == SandwichKind::hc1) cov *= static_cast<double>(n) / static_cast<double>(n - p);
  return Eigen::VectorXd(cov.diagonal().cwiseMax(0.0).cwiseSqrt());
}

}  // namespace opo
