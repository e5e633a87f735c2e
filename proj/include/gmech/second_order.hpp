#pragma once

// Second-order discrete mechanics: residuals of the second-order discrete
// Euler-Lagrange equations (unconstrained and constrained), the action sum,
// single-step continuation, and a boundary-value solver.
//
// A trajectory is a chain of composable arrows g_1..g_M. Its variations act
// at junctions: moving the junction between g_j and g_{j+1} by a fiber
// element h sends g_j -> g_j h and g_{j+1} -> h^{-1} g_{j+1}, which keeps the
// chain composable and the endpoints fixed. On the pair backend a junction is
// literally the shared node, so this reduces to moving interior points.

#include <functional>
#include <optional>
#include <vector>

#include "gmech/groupoid.hpp"
#include "gmech/newton.hpp"

namespace gmech {

// Scalar Lagrangian on composable pairs of arrows. The optional callbacks
// give the four ways a shared junction enters a pair, as component vectors
// against the standard fiber basis e_c at the junction:
//   d1_left (g,h)[c] =  d/dt value(g u(t), h)        u from target(g)
//   d2_left (g,h)[c] =  d/dt value(g, h u(t))        u from target(h)
//   d1_right(g,h)[c] = -d/dt value(u(t)^-1 g, h)     u from source(g)
//   d2_right(g,h)[c] = -d/dt value(g, u(t)^-1 h)     u from source(h)
// When all four are set they replace the finite-difference evaluation.
struct DiscreteLagrangian2 {
  Backend backend;
  std::function<double(const GroupoidElement&, const GroupoidElement&)> value;
  std::function<VectorXd(const GroupoidElement&, const GroupoidElement&)> d1_left;
  std::function<VectorXd(const GroupoidElement&, const GroupoidElement&)> d2_left;
  std::function<VectorXd(const GroupoidElement&, const GroupoidElement&)> d1_right;
  std::function<VectorXd(const GroupoidElement&, const GroupoidElement&)> d2_right;

  bool has_analytic() const {
    return d1_left && d2_left && d1_right && d2_right;
  }
};

// Four consecutive arrows; the variation the residual measures acts at the
// junction between g2 and g3.
struct Window4 {
  Window4(GroupoidElement a, GroupoidElement b, GroupoidElement c, GroupoidElement d);
  GroupoidElement g1, g2, g3, g4;
};

// Lagrangian given directly as a function of three consecutive points of
// R^m, with optional analytic partial gradients.
struct TripleLagrangian {
  std::function<double(const VectorXd&, const VectorXd&, const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)> d1;
  std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)> d2;
  std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)> d3;
};

// Scalar constraints on composable pairs.
struct ConstraintSet {
  std::vector<std::function<double(const GroupoidElement&, const GroupoidElement&)>> phi;
};

// One multiplier vector (size = number of constraints) per consecutive
// arrow pair of a trajectory, in pair order.
struct Multipliers {
  std::vector<VectorXd> lambda;
};

struct Trajectory {
  explicit Trajectory(std::vector<GroupoidElement> arrows_,
                      std::optional<Multipliers> multipliers_ = {});
  std::vector<GroupoidElement> arrows;
  std::optional<Multipliers> multipliers;
};

// Builds the arrow chain through the given nodes of a pair backend.
Trajectory pair_trajectory(const Backend& backend, const std::vector<VectorXd>& nodes);

// Reads the node sequence back off a pair-backend trajectory (M arrows give
// M+1 nodes). Throws DimensionMismatch on other backends.
std::vector<VectorXd> pair_nodes(const Trajectory& t);

// Moves the junction between arrows[j] and arrows[j+1] by the fiber
// coordinates z (see the header comment).
Trajectory junction_move(const Trajectory& t, int j, const VectorXd& z);

// Sum of value over consecutive arrow pairs: a chain of M arrows has M-1
// addends.
double action_sum(const DiscreteLagrangian2& L2, const Trajectory& t);

// Component c is the derivative at t=0 of
//   L(g1, g2 h) + L(g2 h, h^-1 g3) + L(h^-1 g3, g4),   h = h_c(t)
// along the junction variation h_c(t) = fiber_curve(target(g2), e_c, t).
// All components vanish exactly when the window satisfies the second-order
// discrete Euler-Lagrange equations.
VectorXd so_residual(const DiscreteLagrangian2& L2, const Window4& w);

// The same residual on R^m written through three-point coordinates:
//   D3 L(q1,q2,q3) + D2 L(q2,q3,q4) + D1 L(q3,q4,q5),
// partials from the callbacks when present, otherwise central differences.
VectorXd so_residual_pair(const TripleLagrangian& L, const VectorXd& q1,
                          const VectorXd& q2, const VectorXd& q3,
                          const VectorXd& q4, const VectorXd& q5);

// The same residual on the rotation group, assembled from the four slot
// derivatives paired with left/right translated basis directions:
//   <D1 L(gk,gk1) + D2 L(gkm1,gk), gk e_c> - <D2 L(gk,gk1) + D1 L(gk1,gk2), e_c gk1>.
Vec3 so_residual_group(const DiscreteLagrangian2& L2, const RotationMatrix& gkm1,
                       const RotationMatrix& gk, const RotationMatrix& gk1,
                       const RotationMatrix& gk2);

struct ConstrainedResidual {
  VectorXd stationarity;       // junction variation of L + lambda.Phi
  VectorXd constraint_values;  // Phi stacked per pair: (g1,g2), (g2,g3), (g3,g4)
};

// Residual of the multiplier-augmented Lagrangian on one window. l1, l2, l3
// are the multipliers attached to the window's three pairs in order.
ConstrainedResidual constrained_residual(const DiscreteLagrangian2& L2,
                                         const ConstraintSet& C, const Window4& w,
                                         const VectorXd& l1, const VectorXd& l2,
                                         const VectorXd& l3);

// Solves so_residual(L2, (g1,g2,g3,.)) = 0 for the fourth arrow by damped
// Newton in the fiber chart around the guess (whose source fixes the source
// of the result).
GroupoidElement solve_step(const DiscreteLagrangian2& L2, const GroupoidElement& g1,
                           const GroupoidElement& g2, const GroupoidElement& g3,
                           const GroupoidElement& guess, const SolverConfig& cfg = {});

// Boundary-value problem: the first and last arrows of the guess are held
// fixed, every junction strictly between them is free except the outermost
// two (which would move the fixed arrows). With M arrows the free junctions
// are j = 1..M-3 (0-based) and the stationarity conditions are the window
// residuals there; constraints add one multiplier vector and one equation
// set per arrow pair. The guess must have at least 4 arrows (5 nodes).
struct BvpProblem {
  DiscreteLagrangian2 lagrangian;
  std::optional<ConstraintSet> constraints;
  Trajectory guess;
  SolverConfig config;
};

// Global damped Newton over stacked junction coordinates and multipliers,
// re-centering the charts at the current iterate after every accepted step.
// Unconstrained problems report a rank-deficient system as SingularJacobian;
// constrained ones fall back to a regularized step so that infeasible
// constraint sets surface as NoConvergence instead.
Trajectory solve_bvp(const BvpProblem& p);

}  // namespace gmech
