#include "gmech/newton.hpp"

#include <cmath>

namespace gmech {

namespace {

MatrixXd fd_jacobian(const ResidualFn& residual, const VectorXd& z,
                     const VectorXd& r0, double step) {
  const int n = static_cast<int>(z.size());
  MatrixXd J(r0.size(), n);
  VectorXd zp = z;
  for (int j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(z(j)));
    zp(j) = z(j) + h;
    J.col(j) = (residual(zp) - r0) / h;
    zp(j) = z(j);
  }
  return J;
}

}  // namespace

VectorXd newton_solve(const ResidualFn& residual, const VectorXd& z0,
                      const SolverConfig& cfg, const JacobianFn& analytic_jacobian) {
  if (cfg.tolerance <= 0.0) throw ConfigError("solver tolerance must be positive");
  if (cfg.max_iterations < 1) throw ConfigError("solver needs at least one iteration");
  if (cfg.jacobian == JacobianMode::Analytic && !analytic_jacobian)
    throw ConfigError("analytic Jacobian mode selected but no callback given");

  const int n = static_cast<int>(z0.size());
  VectorXd z = z0;
  VectorXd r = residual(z);
  if (r.size() != n) throw DimensionMismatch("newton_solve needs a square system");

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const MatrixXd J = cfg.jacobian == JacobianMode::Analytic
                           ? analytic_jacobian(z)
                           : fd_jacobian(residual, z, r, cfg.fd_step);
    Eigen::FullPivLU<MatrixXd> lu(J);
    const int rank = static_cast<int>(lu.rank());
    if (rank < n) throw SingularJacobian(rank, n);
    if (r.lpNorm<Eigen::Infinity>() <= cfg.tolerance) return z;

    const VectorXd dz = lu.solve(-r);
    const double merit = 0.5 * r.squaredNorm();
    // Backtracking on the Gauss-Newton merit; the directional derivative of
    // (1/2)|r|^2 along the Newton step is -|r|^2.
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      const VectorXd r_try = residual(z + alpha * dz);
      if (0.5 * r_try.squaredNorm() <=
          merit - cfg.sufficient_decrease * alpha * 2.0 * merit) {
        z += alpha * dz;
        r = r_try;
        accepted = true;
        break;
      }
      alpha *= cfg.contraction;
    }
    if (!accepted) throw NoConvergence(r.lpNorm<Eigen::Infinity>(), iter + 1);
  }
  if (r.lpNorm<Eigen::Infinity>() <= cfg.tolerance) return z;
  throw NoConvergence(r.lpNorm<Eigen::Infinity>(), cfg.max_iterations);
}

}  // namespace gmech
