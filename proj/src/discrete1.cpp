#include "gmech/discrete1.hpp"

#include <cmath>

#include "gmech/constants.hpp"
#include "gmech/liealg.hpp"

namespace gmech {

namespace {

void check_backend(const DiscreteLagrangian1& Ld, const GroupoidElement& g) {
  if (!(g.backend() == Ld.backend))
    throw DimensionMismatch("element backend does not match the Lagrangian");
}

VectorXd left_components(const DiscreteLagrangian1& Ld, const GroupoidElement& g) {
  if (Ld.analytic_left) return Ld.analytic_left(g);
  const int r = Ld.backend.rank();
  VectorXd out(r);
  for (int c = 0; c < r; ++c)
    out(c) = dirderiv_left(Ld.value, g, VectorXd::Unit(r, c));
  return out;
}

VectorXd right_components(const DiscreteLagrangian1& Ld, const GroupoidElement& h) {
  if (Ld.analytic_right) return Ld.analytic_right(h);
  const int r = Ld.backend.rank();
  VectorXd out(r);
  for (int c = 0; c < r; ++c)
    out(c) = dirderiv_right(Ld.value, h, VectorXd::Unit(r, c));
  return out;
}

Vec3 reduced_grad(const ReducedLagrangian& l, const Vec3& eta) {
  if (l.grad) return l.grad(eta);
  Vec3 g;
  const double step = tols().fd_step;
  for (int i = 0; i < 3; ++i) {
    const double h = step * std::max(1.0, std::abs(eta(i)));
    Vec3 p = eta, m = eta;
    p(i) += h;
    m(i) -= h;
    g(i) = (l.value(p) - l.value(m)) / (2.0 * h);
  }
  return g;
}

}  // namespace

VectorXd del_residual(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                      const GroupoidElement& h) {
  check_backend(Ld, g);
  check_backend(Ld, h);
  const double defect = composability_defect(g, h);
  if (defect > tols().composability) throw NotComposable(defect);
  return left_components(Ld, g) - right_components(Ld, h);
}

Momentum legendre_minus(const DiscreteLagrangian1& Ld, const GroupoidElement& h) {
  check_backend(Ld, h);
  return {right_components(Ld, h), source(h)};
}

Momentum legendre_plus(const DiscreteLagrangian1& Ld, const GroupoidElement& g) {
  check_backend(Ld, g);
  return {left_components(Ld, g), target(g)};
}

GroupoidElement step(const DiscreteLagrangian1& Ld, const GroupoidElement& g,
                     const GroupoidElement& guess, const SolverConfig& cfg) {
  check_backend(Ld, g);
  check_backend(Ld, guess);
  const double defect = composability_defect(g, guess);
  if (defect > tols().composability) throw NotComposable(defect);

  const BasePoint anchor = target(guess);
  auto h_of = [&](const VectorXd& z) {
    return compose(guess, fiber_curve(anchor, z, 1.0));
  };
  auto residual = [&](const VectorXd& z) { return del_residual(Ld, g, h_of(z)); };
  const VectorXd z = newton_solve(residual, VectorXd::Zero(Ld.backend.rank()), cfg);
  return h_of(z);
}

HamiltonianStepResult hamiltonian_step(const DiscreteLagrangian1& Ld,
                                       const Momentum& mu,
                                       const GroupoidElement& guess,
                                       const SolverConfig& cfg) {
  check_backend(Ld, guess);
  if (!(mu.base.backend == Ld.backend))
    throw DimensionMismatch("momentum backend does not match the Lagrangian");
  if (mu.components.size() != Ld.backend.rank())
    throw DimensionMismatch("momentum has wrong number of components");
  const double defect = (source(guess).coords - mu.base.coords).norm();
  if (defect > tols().composability) throw NotComposable(defect);

  const BasePoint anchor = target(guess);
  auto h_of = [&](const VectorXd& z) {
    return compose(guess, fiber_curve(anchor, z, 1.0));
  };
  auto residual = [&](const VectorXd& z) {
    return VectorXd(legendre_minus(Ld, h_of(z)).components - mu.components);
  };
  const VectorXd z = newton_solve(residual, VectorXd::Zero(Ld.backend.rank()), cfg);
  const GroupoidElement h = h_of(z);
  return {legendre_plus(Ld, h), h};
}

Vec3 ep_residual(const ReducedLagrangian& l, const Vec3& eta_k,
                 const Vec3& eta_k1, double hbar) {
  if (hbar <= 0.0) throw ConfigError("Euler-Poincare step size must be positive");
  return dcay_inv(hbar * eta_k).transpose() * reduced_grad(l, eta_k) -
         dcay_inv(-hbar * eta_k1).transpose() * reduced_grad(l, eta_k1);
}

Vec3 ep_step(const ReducedLagrangian& l, const Vec3& eta_k, double hbar,
             const SolverConfig& cfg) {
  auto residual = [&](const VectorXd& z) {
    return VectorXd(ep_residual(l, eta_k, Vec3(z), hbar));
  };
  return Vec3(newton_solve(residual, eta_k, cfg));
}

}  // namespace gmech
