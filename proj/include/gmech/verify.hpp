#pragma once

// Numerical checks of the structural facts behind the discrete mechanics:
// the covector-matching form of the second-order dynamics and its agreement
// with the variational window residual, symplecticity of the first-order
// momentum stepping map, conservation along symmetry directions, and the
// convergence order of the Euler-Poincare scheme against an ODE reference.

#include <vector>

#include "gmech/discrete1.hpp"
#include "gmech/second_order.hpp"

namespace gmech {

// The covector data attached to one composable pair (gk, gk1), split with the
// help of the preceding arrow. Components are pairings against the
// left-translated fiber basis at the stated arrow:
//   mu       at gk:  the incoming part, pairs as -D2 Ld(prev, gk)
//   mu_free  at gk:  the eliminated free part, D1 Ld(gk,gk1) + D2 Ld(prev,gk)
//   mu_bar   at gk1: D2 Ld(gk, gk1)
// By construction mu + mu_free pairs as D1 Ld(gk, gk1), and mu_bar of one
// pair cancels mu of the next; what remains of the matching conditions is
// exactly the window residual (see implicit_dynamics_residual).
struct MomentumTriple {
  Momentum mu;
  Momentum mu_free;
  Momentum mu_bar;
};

// Builds the triple for (gk, gk1) with predecessor prev. The bases of mu and
// mu_free sit at target(gk), the base of mu_bar at target(gk1). Evaluates the
// Lagrangian on pairs whose joint has been moved off the composable set, so
// value must read its two slots independently (all shipped Lagrangians do).
MomentumTriple momentum_triple(const DiscreteLagrangian2& L2, const GroupoidElement& prev,
                               const GroupoidElement& gk, const GroupoidElement& gk1);

// The second-order dynamics as a covector-matching defect: pairs the
// mismatch between the outgoing covector of (g2,g3) and the incoming one of
// (g3,g4) against the two canonical section families (left-translated basis
// at g2, right-translated basis at g3), eliminating the free part through the
// preceding pair (g1,g2). Each slot derivative is taken independently, so the
// assembly shares no code path with so_residual; the two agree identically on
// every window, which is the equivalence this module exists to check.
VectorXd implicit_dynamics_residual(const DiscreteLagrangian2& L2, const Window4& w);

// Frobenius defect |J^T O J - O| of the finite-difference Jacobian J of the
// momentum stepping map (q,p) -> hamiltonian_step at (q,p), with O the
// canonical symplectic matrix on R^{2m}. The Lagrangian must live on a pair
// backend over R^m and be regular near the point. fd is the central
// difference step for J; the stepping solves use cfg.
double symplecticity_defect(const DiscreteLagrangian1& Ld, const VectorXd& q,
                            const VectorXd& p, double fd,
                            const SolverConfig& cfg = {});

// A symmetry direction: an algebra section X over the base (components
// against the fiber basis), an optional flow giving the section's lift to
// arrows as a curve s -> flow(g, s) through g (defaults to the multiplicative
// lift that moves source and target along X), and an optional gauge term f
// (empty means strictly invariant, f = 0).
struct NoetherData {
  std::function<VectorXd(const BasePoint&)> section;
  std::function<GroupoidElement(const GroupoidElement&, double)> flow;
  std::function<double(const GroupoidElement&)> gauge;
};

// Conserved-quantity drift along an on-shell trajectory: evaluates the
// outgoing-covector pairing
//   F(k) = <mu_free at gk, X(target gk)> + d/ds Ld(gk, flow(gk1, s)) + f(gk1)
// for every pair with a predecessor and returns max |F(k+1) - F(k)|. Throws
// NotOnShell if any window residual exceeds on_shell_tol: drift is only
// meaningful below solver error.
double noether_defect(const DiscreteLagrangian2& L2, const NoetherData& nd,
                      const Trajectory& t, double on_shell_tol = 1e-8);

// One grid line of the Euler-Poincare convergence study: the step size, the
// trajectory error against the reference at matched times, and the order
// observed from the previous line (0 for the first line and wherever the
// errors are too small to divide).
struct EpOrderRow {
  double hbar;
  double error;
  double order;
};

// Steps the discrete Euler-Poincare flow for the free rigid body at each
// given step size over the horizon and compares against a high-accuracy
// Runge-Kutta reference for the continuous Euler equations
// I etadot = (I eta) x ... in the library's sign convention etadot =
// I^{-1}(eta x (I eta)). The step list must be positive and strictly
// decreasing. inertia holds the principal moments.
std::vector<EpOrderRow> ep_order_check(const ReducedLagrangian& l, const Vec3& inertia,
                                       const std::vector<double>& hbars, const Vec3& eta0,
                                       double horizon = 1.0, const SolverConfig& cfg = {});

}  // namespace gmech
