#include "gmech/optimal_control.hpp"

#include <algorithm>
#include <cmath>

#include "gmech/constants.hpp"

namespace gmech {

ControlForce control_from_step(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                               const GroupoidElement& h) {
  return {Momentum{del_residual(Ld, g, h), target(g)}};
}

DiscreteLagrangian2 oc_lagrangian(const DiscreteLagrangian1& Ld, const CostFunction& C) {
  DiscreteLagrangian2 L2;
  L2.backend = Ld.backend;
  L2.value = [Ld, C](const GroupoidElement& g, const GroupoidElement& h) {
    return C.value(g, control_from_step(Ld, g, h).force);
  };
  return L2;
}

std::pair<DiscreteLagrangian2, ConstraintSet> underactuated_to_constrained(
    const ControlledSystem& sys) {
  const int r = sys.lagrangian.backend.rank();
  std::vector<int> seen(r, 0);
  for (int a : sys.actuated) {
    if (a < 0 || a >= r) throw InvalidSplit("actuated index out of range");
    ++seen[a];
  }
  for (int A : sys.unactuated) {
    if (A < 0 || A >= r) throw InvalidSplit("unactuated index out of range");
    ++seen[A];
  }
  for (int c = 0; c < r; ++c) {
    if (seen[c] == 0) throw InvalidSplit("component " + std::to_string(c) + " is in neither set");
    if (seen[c] > 1) throw InvalidSplit("component " + std::to_string(c) + " appears twice");
  }

  DiscreteLagrangian2 L2;
  L2.backend = sys.lagrangian.backend;
  std::vector<int> unact = sys.unactuated;
  L2.value = [sys, unact](const GroupoidElement& g, const GroupoidElement& h) {
    Momentum u = control_from_step(sys.lagrangian, g, h).force;
    for (int A : unact) u.components(A) = 0.0;
    return sys.cost.value(g, u);
  };

  ConstraintSet C;
  for (int A : sys.unactuated)
    C.phi.push_back([Ld = sys.lagrangian, A](const GroupoidElement& g, const GroupoidElement& h) {
      return del_residual(Ld, g, h)(A);
    });
  return {L2, C};
}

// --------------------------------------------------------------------------
// Rigid body

RigidBodyParams::RigidBodyParams(double i1, double i2, double i3, double step)
    : I1(i1), I2(i2), I3(i3), hbar(step) {
  if (!(I1 > 0.0) || !(I2 > 0.0) || !(I3 > 0.0))
    throw ConfigError("rigid body moments of inertia must be positive");
  if (I1 == I2 || I2 == I3 || I1 == I3)
    throw ConfigError("rigid body moments of inertia must be pairwise distinct");
  if (!(hbar > 0.0)) throw ConfigError("time step must be positive");
}

Vec3 RigidBodyParams::P() const {
  return {I1 / (I2 - I3), I2 / (I3 - I1), I3 / (I1 - I2)};
}

double rigidbody_ltilde(const Vec3& omega, const Vec3& omegadot, const RigidBodyParams& p) {
  const Vec3 P = p.P();
  const double u1 = omegadot(0) - P(0) * omega(1) * omega(2);
  const double u2 = omegadot(1) - P(1) * omega(0) * omega(2);
  const double u3 = omegadot(2) - P(2) * omega(0) * omega(1);
  return 0.5 * (u1 * u1 + u2 * u2 + u3 * u3);
}

double rigidbody_Ld2(const RotationMatrix& w_k, const RotationMatrix& w_k1,
                     const RigidBodyParams& p) {
  const Vec3 a = cay_inv(w_k);
  const Vec3 b = cay_inv(w_k1);
  return p.hbar * rigidbody_ltilde((a + b) / (2.0 * p.hbar), (b - a) / (p.hbar * p.hbar), p);
}

DiscreteLagrangian2 rigidbody_lagrangian2(const RigidBodyParams& p) {
  DiscreteLagrangian2 L2;
  L2.backend = Backend::group();
  L2.value = [p](const GroupoidElement& g, const GroupoidElement& h) {
    return rigidbody_Ld2(g.rotation(), h.rotation(), p);
  };
  return L2;
}

Trajectory rigidbody_oc_solve(const RigidBodyBoundary& b, int num_nodes,
                              const RigidBodyParams& p, const SolverConfig& cfg) {
  if (num_nodes < 5)
    throw ConfigError("rigid body maneuver needs at least 5 attitude nodes");
  const int N = num_nodes;
  std::vector<RotationMatrix> R(N, RotationMatrix::identity());
  R[0] = b.R0;
  R[1] = b.R0 * cay(p.hbar * b.omega0);
  R[N - 2] = b.RT * cay(p.hbar * b.omegaT).inverse();
  R[N - 1] = b.RT;
  // interior guess: Cayley interpolation of the relative rotation between
  // the velocity-fixed nodes
  const Vec3 v = cay_inv(R[1].inverse() * R[N - 2]);
  for (int k = 2; k <= N - 3; ++k)
    R[k] = R[1] * cay(v * (static_cast<double>(k - 1) / (N - 3)));

  std::vector<GroupoidElement> arrows;
  arrows.reserve(N - 1);
  for (int k = 0; k + 1 < N; ++k)
    arrows.push_back(GroupoidElement::group(R[k].inverse() * R[k + 1]));

  return solve_bvp(BvpProblem{rigidbody_lagrangian2(p), {}, Trajectory(std::move(arrows)), cfg});
}

// --------------------------------------------------------------------------
// Heavy top

HeavyTopParams::HeavyTopParams(double ibar1, double ibar2, double ibar3, double j1,
                               double j2, double mgh, double step)
    : Ibar1(ibar1), Ibar2(ibar2), Ibar3(ibar3), J1(j1), J2(j2), Mgh(mgh), hbar(step) {
  if (!(Ibar1 > 0.0) || !(Ibar2 > 0.0) || !(Ibar3 > 0.0) || !(J1 > 0.0) || !(J2 > 0.0))
    throw ConfigError("heavy top inertias must be positive");
  if (!(hbar > 0.0)) throw ConfigError("time step must be positive");
}

Eigen::Matrix<double, 5, 5> HeavyTopParams::mass_matrix() const {
  Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
  M(0, 0) = gamma1();
  M(1, 1) = gamma2();
  M(2, 2) = Ibar3;
  M(3, 3) = J1;
  M(4, 4) = J2;
  M(0, 3) = M(3, 0) = J1;
  M(1, 4) = M(4, 1) = J2;
  return M;
}

double heavytop_reduced_l(const Vec3& gamma, const Vec3& omega,
                          const Eigen::Vector2d& thetadot, const HeavyTopParams& p) {
  Eigen::Matrix<double, 5, 1> z;
  z << omega, thetadot;
  return 0.5 * z.dot(p.mass_matrix() * z) - p.Mgh * gamma(2);
}

HeavyTopDiscrete heavytop_discrete(const Vec3& xi_k, const Vec3& xi_k1,
                                   const Eigen::Vector2d& theta_k,
                                   const Eigen::Vector2d& theta_k1,
                                   const Eigen::Vector2d& theta_k2,
                                   const Vec3& gamma_k, const HeavyTopParams& p) {
  const double h = p.hbar;
  const Vec3 dxi = (xi_k1 - xi_k) / h;              // velocity difference quotient
  const Vec3 mid = 0.5 * (xi_k + xi_k1);            // midpoint velocity
  const Eigen::Vector2d thdd = (theta_k2 - 2.0 * theta_k1 + theta_k) / (h * h);
  const Eigen::Vector2d thd = (theta_k2 - theta_k) / (2.0 * h);
  const double g1 = p.gamma1();
  const double g2 = p.gamma2();

  const double u1 = dxi(0) + thdd(0);
  const double u2 = dxi(1) + thdd(1);
  const double Ld = 0.5 * p.J1 * p.J1 * u1 * u1 + 0.5 * p.J2 * p.J2 * u2 * u2;

  // Body angular momentum at the stencil velocities, pi = dl/dOmega. The
  // unactuated balance law pidot = pi x Omega + Mgh Gamma x e3 becomes the
  // three constraint values with the difference quotients substituted.
  const Vec3 pi(g1 * mid(0) + p.J1 * thd(0), g2 * mid(1) + p.J2 * thd(1),
                p.Ibar3 * mid(2));
  const Vec3 pidot(g1 * dxi(0) + p.J1 * thdd(0), g2 * dxi(1) + p.J2 * thdd(1),
                   p.Ibar3 * dxi(2));
  const Vec3 phi = pidot - pi.cross(mid) - p.Mgh * gamma_k.cross(Vec3::UnitZ());
  return {Ld, phi};
}

Vec3 heavytop_gamma_step(const Vec3& gamma_k, const Vec3& xi_k, double hbar) {
  return cay(hbar * xi_k).matrix().transpose() * gamma_k;
}

Backend heavytop_backend() { return Backend::action(true, 2); }

namespace {

void require_heavytop_arrow(const GroupoidElement& g) {
  if (g.backend().kind() != Backend::Kind::Action || !g.backend().has_rotation() ||
      g.backend().torus_dim() != 2)
    throw DimensionMismatch("heavy top arrows live on the action groupoid over R^3 x T^2");
}

// The full stencil one composable pair carries: two body velocities, the
// three rotor angles the pair spans, and the gravity direction at its first
// node.
struct HeavyTopStencil {
  Vec3 xi_k, xi_k1, gamma_k;
  Eigen::Vector2d theta_k, theta_k1, theta_k2;
};

HeavyTopStencil heavytop_stencil(const GroupoidElement& g, const GroupoidElement& h,
                                 double hbar) {
  require_heavytop_arrow(g);
  require_heavytop_arrow(h);
  HeavyTopStencil d;
  const VectorXd& x = g.action_source().coords;
  d.gamma_k = x.head<3>();
  d.theta_k = x.tail<2>();
  d.theta_k1 = d.theta_k + Eigen::Vector2d(g.torus_shift());
  d.theta_k2 = d.theta_k1 + Eigen::Vector2d(h.torus_shift());
  d.xi_k = cay_inv(g.rotation()) / hbar;
  d.xi_k1 = cay_inv(h.rotation()) / hbar;
  return d;
}

}  // namespace

Vec3 heavytop_xi(const GroupoidElement& g, double hbar) {
  require_heavytop_arrow(g);
  return cay_inv(g.rotation()) / hbar;
}

GroupoidElement heavytop_arrow(const Vec3& gamma, const Eigen::Vector2d& theta,
                               const Vec3& xi, const Eigen::Vector2d& dtheta,
                               double hbar) {
  VectorXd x(5);
  x << gamma, theta;
  return GroupoidElement::action(BasePoint{heavytop_backend(), x}, cay(hbar * xi), dtheta);
}

std::vector<Vec3> heavytop_gamma_sequence(const Trajectory& t) {
  std::vector<Vec3> gammas;
  if (t.arrows.empty()) return gammas;
  gammas.reserve(t.arrows.size() + 1);
  for (const auto& g : t.arrows) {
    require_heavytop_arrow(g);
    gammas.push_back(g.action_source().coords.head<3>());
  }
  gammas.push_back(target(t.arrows.back()).coords.head<3>());
  return gammas;
}

double heavytop_gamma_defect(const Trajectory& t, double hbar) {
  const std::vector<Vec3> stored = heavytop_gamma_sequence(t);
  if (stored.empty()) return 0.0;
  double defect = 0.0;
  Vec3 prop = stored.front();
  for (size_t k = 0; k + 1 < stored.size(); ++k) {
    prop = heavytop_gamma_step(prop, heavytop_xi(t.arrows[k], hbar), hbar);
    defect = std::max(defect, (stored[k + 1] - prop).lpNorm<Eigen::Infinity>());
  }
  return defect;
}

DiscreteLagrangian2 heavytop_lagrangian2(const HeavyTopParams& p) {
  DiscreteLagrangian2 L2;
  L2.backend = heavytop_backend();
  L2.value = [p](const GroupoidElement& g, const GroupoidElement& h) {
    const HeavyTopStencil d = heavytop_stencil(g, h, p.hbar);
    return heavytop_discrete(d.xi_k, d.xi_k1, d.theta_k, d.theta_k1, d.theta_k2, d.gamma_k, p)
        .Ld;
  };
  return L2;
}

ConstraintSet heavytop_constraints(const HeavyTopParams& p) {
  ConstraintSet C;
  for (int A = 0; A < 3; ++A)
    C.phi.push_back([p, A](const GroupoidElement& g, const GroupoidElement& h) {
      const HeavyTopStencil d = heavytop_stencil(g, h, p.hbar);
      return heavytop_discrete(d.xi_k, d.xi_k1, d.theta_k, d.theta_k1, d.theta_k2, d.gamma_k, p)
          .phi(A);
    });
  return C;
}

Trajectory heavytop_oc_solve(const HeavyTopBoundary& b, int steps,
                             const HeavyTopParams& p, const SolverConfig& cfg) {
  if (steps < 6) throw ConfigError("heavy top maneuver needs at least 6 steps");
  if (std::abs(b.gamma0.norm() - 1.0) > 1e-9)
    throw ConfigError("gravity direction must be a unit vector");

  const int N = steps;  // arrows; nodes 0..N
  std::vector<Eigen::Vector2d> theta(N + 1);
  theta[0] = b.theta0;
  theta[1] = b.theta1;
  theta[N - 1] = b.thetaN1;
  theta[N] = b.thetaN;
  for (int k = 2; k <= N - 2; ++k) {
    // Quintic ease between the fixed boundary angles: both end arrows pin the
    // rotor rates, so a profile with vanishing rate and acceleration at the
    // ends keeps the guess's rotor torque spread over the interior instead of
    // spiking at the unmovable boundary pairs.
    const double t = static_cast<double>(k - 1) / (N - 2);
    const double e = t * t * t * (10.0 + t * (6.0 * t - 15.0));
    theta[k] = (1.0 - e) * b.theta1 + e * b.thetaN1;
  }

  std::vector<GroupoidElement> arrows;
  arrows.reserve(N);
  Vec3 gamma = b.gamma0;
  for (int k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) / (N - 1);
    const Vec3 xi = (1.0 - t) * b.xi0 + t * b.xiN1;
    arrows.push_back(heavytop_arrow(gamma, theta[k], xi, theta[k + 1] - theta[k], p.hbar));
    gamma = target(arrows.back()).coords.head<3>();
  }
  return solve_bvp(BvpProblem{heavytop_lagrangian2(p), heavytop_constraints(p),
                              Trajectory(std::move(arrows)), cfg});
}

}  // namespace gmech
