#include "qdpillar/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qdpillar/error.hpp"

namespace qdpillar {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const ParameterBounds& b) {
  return x.cwiseMax(b.lower).cwiseMin(b.upper);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a);

// Pseudo-inverse of J^T J computed on unit-norm columns, then scaled back.
Eigen::MatrixXd normal_pseudo_inverse(const Eigen::MatrixXd& jac) {
  Eigen::VectorXd norms = jac.colwise().norm().transpose();
  Eigen::VectorXd inv_norms = Eigen::VectorXd::Zero(norms.size());
  for (Eigen::Index j = 0; j < norms.size(); ++j)
    if (norms(j) > 0.0) inv_norms(j) = 1.0 / norms(j);
  const Eigen::MatrixXd scaled = jac * inv_norms.asDiagonal();
  const Eigen::MatrixXd core = pseudo_inverse(scaled.transpose() * scaled);
  return inv_norms.asDiagonal() * core * inv_norms.asDiagonal();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(values.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) > cutoff && values(i) > 0.0) inv(i) = 1.0 / values(i);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd out = v * inv.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

ParameterBounds ParameterBounds::unbounded(Eigen::Index n) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(n, -inf), Eigen::VectorXd::Constant(n, inf)};
}

bool ParameterBounds::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && x.size() == upper.size() &&
         (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::Index FitResult::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  raise(ErrorKind::InvalidParameter, "fit result has no parameter '" + std::string(name) + "'");
}

double FitResult::stderr_of(std::string_view name) const {
  const auto i = index_of(name);
  return std::sqrt(std::max(covariance(i, i), 0.0));
}

Eigen::VectorXd FitResult::stderrs() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

FitResult least_squares(const ResidualFunction& residuals, const Eigen::VectorXd& init,
                        const ParameterBounds& bounds, const LeastSquaresOptions& options,
                        std::vector<std::string> names) {
  const Eigen::Index p = init.size();
  if (p == 0) raise(ErrorKind::InvalidParameter, "least_squares: no parameters");
  if (bounds.lower.size() != p || bounds.upper.size() != p)
    raise(ErrorKind::InvalidParameter, "least_squares: bounds size mismatch");
  if (!bounds.contains(init)) raise(ErrorKind::Precondition, "least_squares: init outside bounds");
  if (names.empty())
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("p" + std::to_string(j));
  if (static_cast<Eigen::Index>(names.size()) != p)
    raise(ErrorKind::InvalidParameter, "least_squares: names size mismatch");

  Eigen::VectorXd x = init;
  Eigen::VectorXd r = residuals(x);
  if (!all_finite(r)) raise(ErrorKind::NonFiniteResidual, "least_squares: residual not finite at init");
  const Eigen::Index n = r.size();
  if (n == 0) raise(ErrorKind::InvalidParameter, "least_squares: empty residual vector");

  auto jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& r_at) {
    Eigen::MatrixXd jac(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      double scale = std::abs(at(j));
      if (options.typical_scale.size() == p) scale = std::max(scale, std::abs(options.typical_scale(j)));
      else scale = std::max(scale, std::abs(init(j)));
      if (scale == 0.0) scale = 1.0;
      double h = options.fd_relative_step * scale;
      Eigen::VectorXd shifted = at;
      if (at(j) + h > bounds.upper(j)) h = -h;
      shifted(j) = at(j) + h;
      h = shifted(j) - at(j);
      Eigen::VectorXd r_shift = residuals(shifted);
      if (!all_finite(r_shift))
        raise(ErrorKind::NonFiniteResidual, "least_squares: residual not finite in Jacobian");
      jac.col(j) = (r_shift - r_at) / h;
    }
    return jac;
  };

  FitResult result;
  result.names = std::move(names);
  double cost = 0.5 * r.squaredNorm();
  result.cost_history.push_back(cost);
  double damping = options.initial_damping;
  Eigen::MatrixXd jac = jacobian(x, r);
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iter; ++iter) {
    Eigen::VectorXd grad = jac.transpose() * r;
    // Components pinned at a bound with the descent direction pointing out
    // do not count toward stationarity.
    for (Eigen::Index j = 0; j < p; ++j) {
      if ((x(j) <= bounds.lower(j) && grad(j) > 0.0) || (x(j) >= bounds.upper(j) && grad(j) < 0.0))
        grad(j) = 0.0;
    }
    const double r_norm = r.norm();
    if (r_norm == 0.0) {
      converged = true;
      break;
    }
    double scaled_grad = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double col = jac.col(j).norm();
      if (col > 0.0) scaled_grad = std::max(scaled_grad, std::abs(grad(j)) / (col * r_norm));
    }
    if (scaled_grad < options.tol) {
      converged = true;
      break;
    }

    // Solve in column-equilibrated variables; raw parameter scales can differ
    // by twenty orders of magnitude.
    Eigen::VectorXd col_norms = jac.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(col_norms(j) > 0.0)) col_norms(j) = 1.0;
    const Eigen::MatrixXd scaled_jac = jac * col_norms.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd normal = scaled_jac.transpose() * scaled_jac;
    const Eigen::VectorXd scaled_grad_vec = scaled_jac.transpose() * r;

    bool accepted = false;
    Eigen::VectorXd x_new;
    Eigen::VectorXd r_new;
    double cost_new = cost;
    for (int attempt = 0; attempt < 40 && damping < 1e20; ++attempt) {
      Eigen::MatrixXd system = normal;
      system.diagonal().array() += damping;
      const Eigen::VectorXd step =
          system.ldlt().solve(-scaled_grad_vec).cwiseQuotient(col_norms);
      x_new = clamp_to(x + step, bounds);
      r_new = residuals(x_new);
      if (all_finite(r_new)) {
        cost_new = 0.5 * r_new.squaredNorm();
        if (cost_new < cost) {
          accepted = true;
          break;
        }
      }
      damping *= 10.0;
    }
    if (!accepted) {
      // No descent left at double precision.
      converged = true;
      break;
    }

    double step_size = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double ref = std::max(std::abs(x(j)), options.typical_scale.size() == p
                                                      ? std::abs(options.typical_scale(j))
                                                      : std::abs(init(j)));
      const double dx = std::abs(x_new(j) - x(j));
      step_size = std::max(step_size, ref > 0.0 ? dx / ref : dx);
    }
    const double reduction = cost - cost_new;
    x = x_new;
    r = r_new;
    cost = cost_new;
    result.cost_history.push_back(cost);
    damping = std::max(damping / 10.0, 1e-15);
    jac = jacobian(x, r);
    if (step_size <= 1e-12 || reduction <= 1e-14 * cost) {
      converged = true;
      ++iter;
      break;
    }
  }

  result.params = x;
  result.residual_norm = r.norm();
  result.iterations = iter;
  result.converged = converged;
  Eigen::MatrixXd cov = normal_pseudo_inverse(jac);
  if (options.scale_covariance && n > p) cov *= r.squaredNorm() / static_cast<double>(n - p);
  result.covariance = cov;
  return result;
}

}  // namespace qdpillar
