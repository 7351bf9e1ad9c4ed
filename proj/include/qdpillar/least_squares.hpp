#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qdpillar {

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct ParameterBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static ParameterBounds unbounded(Eigen::Index n);
  bool contains(const Eigen::VectorXd& x) const;
};

struct LeastSquaresOptions {
  double tol = 1e-10;               // scaled (cosine) gradient threshold
  int max_iter = 200;
  double fd_relative_step = 1e-6;   // forward-difference step per parameter
  double initial_damping = 1e-6;    // relative to diag(J^T J)
  bool scale_covariance = true;     // multiply by residual variance s^2
  // Per-parameter magnitude used for finite-difference steps when a value is
  // near zero; empty means |init|, or 1 when that is zero too.
  Eigen::VectorXd typical_scale{};
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // 0.5 |r|^2 after each accepted step

  Eigen::Index index_of(std::string_view name) const;
  double value(std::string_view name) const { return params(index_of(name)); }
  double stderr_of(std::string_view name) const;
  Eigen::VectorXd stderrs() const;
};

/// Bounded Levenberg-Marquardt with Marquardt diagonal scaling and a
/// forward-difference Jacobian. Steps leaving the box are projected back.
/// Stops when the scaled gradient max_j |(J^T r)_j| / (|J_j| |r|) < tol,
/// when r vanishes, or when neither cost nor parameters can still change
/// at double precision. Reaching max_iter returns the best point with
/// converged = false. Covariance is the pseudo-inverse of J^T J at the
/// solution (taken after column equilibration so parameters of very
/// different magnitude survive), optionally scaled by |r|^2 / (n - p).
FitResult least_squares(const ResidualFunction& residuals, const Eigen::VectorXd& init,
                        const ParameterBounds& bounds, const LeastSquaresOptions& options = {},
                        std::vector<std::string> names = {});

}  // namespace qdpillar
