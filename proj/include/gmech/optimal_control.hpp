#pragma once

// Discrete optimal control as a second-order variational problem: a control
// is the defect of the first-order discrete equations, the running cost of
// those controls becomes a Lagrangian on composable pairs, and unactuated
// directions turn into constraints. Two worked systems ship with the
// construction: attitude trajectories of a rigid body on SO(3) and a heavy
// top steered by two internal rotors.

#include <utility>
#include <vector>

#include "gmech/discrete1.hpp"
#include "gmech/second_order.hpp"

namespace gmech {

// The force that makes (g_k, g_{k+1}) a step of the controlled flow: the
// first-order equation defect read as a momentum at the junction point.
struct ControlForce {
  Momentum force;
};

// Running cost of applying force u while traversing g. The force is based
// at the target of g.
struct CostFunction {
  std::function<double(const GroupoidElement&, const Momentum&)> value;
};

// Component c is dirderiv_left(Ld, g, e_c) - dirderiv_right(Ld, h, e_c),
// based at target(g). Zero exactly when the pair satisfies the free
// discrete equations.
ControlForce control_from_step(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                               const GroupoidElement& h);

// Second-order Lagrangian of the optimal control problem:
//   L(g, h) = C(g, control_from_step(Ld, g, h)).
// Minimizing its action with the first and last arrows fixed minimizes the
// total cost over controlled trajectories meeting the boundary data.
DiscreteLagrangian2 oc_lagrangian(const DiscreteLagrangian1& Ld, const CostFunction& C);

// A controlled first-order system with the force restricted to a subset of
// the fiber components. Actuated and unactuated index sets must partition
// {0..rank-1}.
struct ControlledSystem {
  DiscreteLagrangian1 lagrangian;
  CostFunction cost;           // evaluated on the actuated force components
  std::vector<int> actuated;
  std::vector<int> unactuated;
};

// Optimal control of an underactuated system as a constrained second-order
// problem: the cost of the actuated defect components becomes the
// Lagrangian, and each unactuated defect component becomes one constraint
// (no force may act there). All indices actuated gives an empty constraint
// set, which is the plain oc_lagrangian problem. Throws InvalidSplit when
// the index sets overlap, repeat, or miss a component. The heavy top below
// is the hand-instantiated case of this split: rotor torques actuated,
// body momentum equations as constraints.
std::pair<DiscreteLagrangian2, ConstraintSet> underactuated_to_constrained(
    const ControlledSystem& sys);

// ---------------------------------------------------------------------------
// Rigid body on SO(3)

// Principal moments of inertia and the time step. The derived constants
//   P1 = I1/(I2-I3), P2 = I2/(I3-I1), P3 = I3/(I1-I2)
// require the moments to be pairwise distinct.
struct RigidBodyParams {
  RigidBodyParams(double i1, double i2, double i3, double step);
  double I1, I2, I3;
  double hbar;
  Vec3 P() const;
  static RigidBodyParams defaults(double step) { return {1.0, 2.0, 3.0, step}; }
};

// Control energy of the body: writing the controlled Euler equations as
// u_i = Omegadot_i - P_i * (product of the other two Omega components),
// this is half the squared control,
//   1/2 [ (Od1 - P1 O2 O3)^2 + (Od2 - P2 O1 O3)^2 + (Od3 - P3 O1 O2)^2 ].
double rigidbody_ltilde(const Vec3& omega, const Vec3& omegadot, const RigidBodyParams& p);

// Discrete second-order Lagrangian on pairs of group increments
// w_k = R_k^-1 R_{k+1} = cay(hbar xi_k):
//   hbar * ltilde( (xi_k + xi_{k+1})/2, (xi_{k+1} - xi_k)/hbar ).
// Throws NearSingular when an increment is outside the Cayley chart.
double rigidbody_Ld2(const RotationMatrix& w_k, const RotationMatrix& w_k1,
                     const RigidBodyParams& p);

// The same Lagrangian packaged on the group backend for the BVP solver.
DiscreteLagrangian2 rigidbody_lagrangian2(const RigidBodyParams& p);

// Attitude and body velocity at both ends of the maneuver.
struct RigidBodyBoundary {
  RotationMatrix R0 = RotationMatrix::identity();
  Vec3 omega0 = Vec3::Zero();
  RotationMatrix RT = RotationMatrix::identity();
  Vec3 omegaT = Vec3::Zero();
};

// Minimum-control-energy attitude maneuver with num_nodes attitudes
// (num_nodes >= 5). The boundary velocities fix the first and last group
// increments via w = cay(hbar omega); interior attitudes start from a Cayley
// interpolation of the relative rotation. Returns the chain of increments;
// attitudes follow from R_{k+1} = R_k w_k with R_1 = boundary R0.
Trajectory rigidbody_oc_solve(const RigidBodyBoundary& b, int num_nodes,
                              const RigidBodyParams& p, const SolverConfig& cfg = {});

// ---------------------------------------------------------------------------
// Heavy top with two rotors

// Locked inertia Ibar_i (body plus rotors), rotor inertias J1, J2 about the
// first two axes, weight moment Mgh, and the time step. gamma_i = Ibar_i +
// J_i are the coupled moments appearing in the equations.
struct HeavyTopParams {
  HeavyTopParams(double ibar1, double ibar2, double ibar3, double j1, double j2,
                 double mgh, double step);
  double Ibar1, Ibar2, Ibar3;
  double J1, J2;
  double Mgh;
  double hbar;
  double gamma1() const { return Ibar1 + J1; }
  double gamma2() const { return Ibar2 + J2; }
  // Kinetic-energy matrix of z = (Omega, thetadot): diagonal (gamma1,
  // gamma2, Ibar3) block coupled to the rotor block by J1, J2.
  Eigen::Matrix<double, 5, 5> mass_matrix() const;
  static HeavyTopParams defaults(double step) {
    return {1.0, 1.2, 0.8, 0.1, 0.1, 1.0, step};
  }
};

// Reduced Lagrangian 1/2 z^T M z - Mgh Gamma_3 with z = (Omega, thetadot)
// and Gamma the gravity direction seen from the body frame.
double heavytop_reduced_l(const Vec3& gamma, const Vec3& omega,
                          const Eigen::Vector2d& thetadot, const HeavyTopParams& p);

// One evaluation of the discrete heavy-top data on the node stencil
// (xi_k, xi_{k+1}; theta_k, theta_{k+1}, theta_{k+2}; Gamma_k):
//   Ld  = rotor control energy, (J_i^2/2)(xi difference + theta second
//         difference)^2 summed over the two rotors,
//   phi = the three body momentum equations that no control may enter,
//         discretized with midpoint products and the same differences.
struct HeavyTopDiscrete {
  double Ld;
  Vec3 phi;
};
HeavyTopDiscrete heavytop_discrete(const Vec3& xi_k, const Vec3& xi_k1,
                                   const Eigen::Vector2d& theta_k,
                                   const Eigen::Vector2d& theta_k1,
                                   const Eigen::Vector2d& theta_k2,
                                   const Vec3& gamma_k, const HeavyTopParams& p);

// Advection of the gravity direction along one step:
//   Gamma_{k+1} = cay(hbar xi_k)^-1 Gamma_k,
// a first-order discretization of Gammadot = Gamma x Omega. This is exactly
// the target map of a heavy-top arrow, so a composable chain advects Gamma
// by construction.
Vec3 heavytop_gamma_step(const Vec3& gamma_k, const Vec3& xi_k, double hbar);

// The heavy top lives on the action groupoid over R^3 x T^2: a base point
// is (Gamma, theta) with Gamma the gravity direction seen from the body and
// theta the two rotor angles, and an arrow carries the attitude increment
// w_k = cay(hbar xi_k) together with the rotor advance theta_{k+1} - theta_k.
Backend heavytop_backend();

// Body velocity of one arrow, xi_k = cay^-1(w_k) / hbar.
Vec3 heavytop_xi(const GroupoidElement& g, double hbar);

// Arrow from (gamma, theta) with body velocity xi and rotor advance dtheta.
GroupoidElement heavytop_arrow(const Vec3& gamma, const Eigen::Vector2d& theta,
                               const Vec3& xi, const Eigen::Vector2d& dtheta,
                               double hbar);

// Gravity directions at every node of a heavy-top trajectory: the stored
// source of each arrow plus the target of the last one.
std::vector<Vec3> heavytop_gamma_sequence(const Trajectory& t);

// Largest distance between the stored gravity directions and an independent
// re-propagation from the first node by heavytop_gamma_step.
double heavytop_gamma_defect(const Trajectory& t, double hbar);

// The discrete Lagrangian / constraints packaged for the BVP solver. Both
// read everything they need from one consecutive pair of arrows: the two
// body velocities, the three rotor angles spanned by the pair, and the
// gravity direction at the pair's first node.
DiscreteLagrangian2 heavytop_lagrangian2(const HeavyTopParams& p);
ConstraintSet heavytop_constraints(const HeavyTopParams& p);

// Boundary data: gravity direction and rotor angles at the first node, the
// first body velocity and rotor advance (together they pin the first arrow),
// and the same data for the last arrow. The gravity directions at the far
// end follow from propagating the initial guess and are held fixed by the
// solver, which only ever moves interior junctions.
struct HeavyTopBoundary {
  Vec3 gamma0 = Vec3(0, 0, 1);
  Eigen::Vector2d theta0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d theta1 = Eigen::Vector2d::Zero();
  Vec3 xi0 = Vec3::Zero();
  Eigen::Vector2d thetaN1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d thetaN = Eigen::Vector2d::Zero();
  Vec3 xiN1 = Vec3::Zero();
};

// Minimum rotor-energy maneuver over `steps` increments (steps >= 6, so
// steps+1 nodes). Builds a linear-in-(xi, theta) initial chain and solves
// the constrained BVP; the returned multipliers have one 3-vector per
// consecutive pair (steps - 1 of them).
Trajectory heavytop_oc_solve(const HeavyTopBoundary& b, int steps,
                             const HeavyTopParams& p, const SolverConfig& cfg = {});

}  // namespace gmech
