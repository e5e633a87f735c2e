#pragma once

// Damped Newton iteration on square nonlinear systems. Every solver in this
// library (stepping, boundary-value, optimal-control) funnels through
// newton_solve so that tolerances, damping, and failure reporting behave
// identically everywhere.

#include <functional>

#include <Eigen/Dense>

#include "gmech/errors.hpp"

namespace gmech {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class JacobianMode { FiniteDifference, Analytic };

struct SolverConfig {
  double tolerance = 1e-10;          // max-norm of the residual at acceptance
  int max_iterations = 100;
  double contraction = 0.5;          // backtracking step shrink factor
  double sufficient_decrease = 1e-4; // Armijo constant on (1/2)|r|^2
  double fd_step = 1e-6;             // forward-difference step for the Jacobian
  JacobianMode jacobian = JacobianMode::FiniteDifference;
};

using ResidualFn = std::function<VectorXd(const VectorXd&)>;
using JacobianFn = std::function<MatrixXd(const VectorXd&)>;

// Solves residual(z) = 0 starting from z0. The Jacobian is assembled by
// forward differences unless cfg.jacobian is Analytic, in which case
// analytic_jacobian must be callable. The Jacobian is factored with full
// pivoting and checked for rank before convergence is declared, so a
// degenerate system at the initial point surfaces as SingularJacobian
// rather than silently "converging" on a flat residual.
//
// Throws: ConfigError (bad tolerances), SingularJacobian, NoConvergence.
VectorXd newton_solve(const ResidualFn& residual, const VectorXd& z0,
                      const SolverConfig& cfg = {},
                      const JacobianFn& analytic_jacobian = {});

}  // namespace gmech
