#pragma once

// First-order discrete mechanics on a groupoid: the discrete Euler-Lagrange
// residual built from the invariant directional derivatives, both Legendre
// transforms, the Lagrangian stepping map, the momentum-space (Hamiltonian)
// stepping map, and the discrete Euler-Poincare equations on SO(3) with the
// Cayley retraction.

#include <functional>

#include "gmech/groupoid.hpp"
#include "gmech/newton.hpp"

namespace gmech {

// A discrete Lagrangian is a scalar function on the arrows of a groupoid.
// The analytic callbacks, when set, must return the full component vectors
//   left(g)[c]  = dirderiv_left (value, g, e_c)
//   right(h)[c] = dirderiv_right(value, h, e_c)
// against the standard fiber basis; they replace the finite-difference
// evaluation everywhere below.
struct DiscreteLagrangian1 {
  Backend backend;
  ScalarFn value;
  std::function<VectorXd(const GroupoidElement&)> analytic_left;
  std::function<VectorXd(const GroupoidElement&)> analytic_right;
};

// A fiber of momenta attached to a base point, stored as components against
// the dual of the standard fiber basis.
struct Momentum {
  VectorXd components;
  BasePoint base;
};

// Component c is dirderiv_left(Ld, g, e_c) - dirderiv_right(Ld, h, e_c).
// On the pair groupoid this is the classical D2 Ld(g) + D1 Ld(h); a zero
// residual says (g, h) is a step of the discrete flow.
VectorXd del_residual(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                      const GroupoidElement& h);

// Backward Legendre transform: momentum at the source of h, the classical
// -D1 Ld. Components are dirderiv_right(Ld, h, e_c), whose definition
// already carries the sign that makes legendre_plus at one step equal
// legendre_minus at the next along solutions.
Momentum legendre_minus(const DiscreteLagrangian1& Ld, const GroupoidElement& h);

// Forward Legendre transform: momentum at the target of g, the classical
// D2 Ld, with components dirderiv_left(Ld, g, e_c).
Momentum legendre_plus(const DiscreteLagrangian1& Ld, const GroupoidElement& g);

// Solves del_residual(Ld, g, h) = 0 for h by damped Newton in the fiber
// chart around the guess, h(z) = guess * fiber_curve(target(guess), z, 1).
// The source of the guess fixes the source of the result.
GroupoidElement step(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                     const GroupoidElement& guess, const SolverConfig& cfg = {});

struct HamiltonianStepResult {
  Momentum momentum;           // legendre_plus at the solved arrow
  GroupoidElement arrow;       // the arrow h with legendre_minus(h) = input
};

// One step of the momentum-space flow: solves legendre_minus(Ld, h) = mu for
// h in the chart around the guess (whose source must sit at mu.base), then
// pushes forward with legendre_plus. Composing the two transforms this way
// matches stepping the Lagrangian flow and reading momenta off its ends.
HamiltonianStepResult hamiltonian_step(const DiscreteLagrangian1& Ld,
                                       const Momentum& mu,
                                       const GroupoidElement& guess,
                                       const SolverConfig& cfg = {});

// Reduced Lagrangian on so(3) ~ R^3 for the Euler-Poincare equations. An
// empty grad falls back to central finite differences of value.
struct ReducedLagrangian {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> grad;
};

// Residual of the discrete Euler-Poincare equations with the Cayley
// retraction at body velocities eta_k, eta_k1 and step hbar:
//   dcay_inv(hbar eta_k)^T grad l(eta_k) - dcay_inv(-hbar eta_k1)^T grad l(eta_k1).
Vec3 ep_residual(const ReducedLagrangian& l, const Vec3& eta_k,
                 const Vec3& eta_k1, double hbar);

// Advances the Euler-Poincare flow one step: Newton on
// ep_residual(l, eta_k, . , hbar) starting from eta_k.
Vec3 ep_step(const ReducedLagrangian& l, const Vec3& eta_k, double hbar,
             const SolverConfig& cfg = {});

}  // namespace gmech
