#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gmech/liealg.hpp"
#include "gmech/second_order.hpp"
#include "test_util.hpp"

using namespace gmech;

namespace {

VectorXd vec1(double x) {
  VectorXd v(1);
  v << x;
  return v;
}

std::vector<VectorXd> nodes1(std::initializer_list<double> xs) {
  std::vector<VectorXd> out;
  for (double x : xs) out.push_back(vec1(x));
  return out;
}

// Lifts a three-point Lagrangian on R^m to the pair backend, reading the
// triple (source(g), shared node, target(h)) off a composable pair.
DiscreteLagrangian2 lift_triple(int m,
                                std::function<double(const VectorXd&, const VectorXd&,
                                                     const VectorXd&)> f) {
  DiscreteLagrangian2 L;
  L.backend = Backend::pair(m);
  L.value = [f = std::move(f)](const GroupoidElement& g, const GroupoidElement& h) {
    return f(g.from(), g.to(), h.to());
  };
  return L;
}

double spline3(const VectorXd& a, const VectorXd& b, const VectorXd& c) {
  return 0.5 * (c - 2.0 * b + a).squaredNorm();
}

DiscreteLagrangian2 spline_lagrangian(int m) { return lift_triple(m, spline3); }

Window4 window_from_nodes(std::initializer_list<double> xs) {
  auto t = pair_trajectory(Backend::pair(1), nodes1(xs));
  return Window4(t.arrows[0], t.arrows[1], t.arrows[2], t.arrows[3]);
}

// Exact 1D minimizer step from three samples of a quadratic.
double parabola_step(const std::function<double(double)>& f, double x, double d) {
  const double fm = f(x - d), f0 = f(x), fp = f(x + d);
  const double denom = fp - 2.0 * f0 + fm;
  if (std::abs(denom) < 1e-300) return x;
  return x - d * (fp - fm) / (2.0 * denom);
}

}  // namespace

TEST_CASE("action_sum: frozen spline values and pair count") {
  auto L = spline_lagrangian(1);
  CHECK(action_sum(L, pair_trajectory(Backend::pair(1), nodes1({0, 1, 2, 3, 4}))) == 0.0);
  CHECK(action_sum(L, pair_trajectory(Backend::pair(1), nodes1({0, 1, 4, 9, 16}))) ==
        doctest::Approx(6.0));

  auto C = lift_triple(1, [](const VectorXd&, const VectorXd&, const VectorXd&) {
    return 2.5;
  });
  // 5 nodes -> 4 arrows -> 3 composable pairs
  CHECK(action_sum(C, pair_trajectory(Backend::pair(1), nodes1({0, 1, 2, 3, 4}))) ==
        doctest::Approx(3 * 2.5));

  auto broken = std::vector<GroupoidElement>{GroupoidElement::pair(vec1(0), vec1(1)),
                                             GroupoidElement::pair(vec1(2), vec1(3))};
  CHECK_THROWS_AS(Trajectory{broken}, NotComposable);
}

TEST_CASE("so_residual: frozen spline windows") {
  auto L = spline_lagrangian(1);
  CHECK(so_residual(L, window_from_nodes({0, 0, 1, 0, 0}))(0) ==
        doctest::Approx(6.0).epsilon(1e-9));
  CHECK(std::abs(so_residual(L, window_from_nodes({0, 1, 4, 9, 16}))(0)) <= 1e-8);

  auto C = lift_triple(1, [](const VectorXd&, const VectorXd&, const VectorXd&) {
    return -1.75;
  });
  CHECK(so_residual(C, window_from_nodes({0.3, -1, 2, 0.5, 4}))(0) == 0.0);
}

TEST_CASE("so_residual_pair: frozen values, linearity, separability") {
  TripleLagrangian S{spline3, {}, {}, {}};
  auto q = [](double x) { return vec1(x); };
  CHECK(so_residual_pair(S, q(0), q(0), q(1), q(0), q(0))(0) ==
        doctest::Approx(6.0).epsilon(1e-9));
  CHECK(std::abs(so_residual_pair(S, q(0), q(1), q(4), q(9), q(16))(0)) <= 1e-8);
  CHECK(std::abs(so_residual_pair(S, q(0), q(1), q(2), q(3), q(4))(0)) <= 1e-10);

  // two independent coordinates give the two 1D answers stacked
  Eigen::Vector2d a(0, 0), b(0, 1), c(1, 2), d(0, 3), e(0, 4);
  VectorXd r2 = so_residual_pair(S, a, b, c, d, e);
  CHECK(r2(0) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(std::abs(r2(1)) <= 1e-10);
}

TEST_CASE("so_residual_pair: analytic gradients replace the differences") {
  TripleLagrangian fd{spline3, {}, {}, {}};
  TripleLagrangian an{spline3,
                      [](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
                        return VectorXd(c - 2.0 * b + a);
                      },
                      [](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
                        return VectorXd(-2.0 * (c - 2.0 * b + a));
                      },
                      [](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
                        return VectorXd(c - 2.0 * b + a);
                      }};
  std::mt19937 rng(41);
  for (int i = 0; i < 10; ++i) {
    std::vector<VectorXd> q;
    for (int k = 0; k < 5; ++k) q.push_back(testutil::uniform_vec(rng, 2, -2, 2));
    const VectorXd lhs = so_residual_pair(fd, q[0], q[1], q[2], q[3], q[4]);
    const VectorXd rhs = so_residual_pair(an, q[0], q[1], q[2], q[3], q[4]);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("so_residual agrees with the three-point form on the pair backend") {
  std::mt19937 rng(42);
  for (int m : {1, 2, 3}) {
    auto f = [m](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
      double s = 0.5 * (c - 2.0 * b + a).squaredNorm();
      for (int i = 0; i < m; ++i) s += 0.3 * std::sin(a(i)) * c(i) + 0.1 * b(i) * b(i) * c(i);
      return s;
    };
    auto L = lift_triple(m, f);
    TripleLagrangian T{f, {}, {}, {}};
    for (int i = 0; i < 10; ++i) {
      std::vector<VectorXd> q;
      for (int k = 0; k < 5; ++k) q.push_back(testutil::uniform_vec(rng, m, -1.5, 1.5));
      auto t = pair_trajectory(Backend::pair(m), q);
      Window4 w(t.arrows[0], t.arrows[1], t.arrows[2], t.arrows[3]);
      const VectorXd lhs = so_residual(L, w);
      const VectorXd rhs = so_residual_pair(T, q[0], q[1], q[2], q[3], q[4]);
      CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }
}

TEST_CASE("so_residual_group: stationary cases and generic agreement") {
  DiscreteLagrangian2 L;
  L.backend = Backend::group();
  L.value = [](const GroupoidElement& g, const GroupoidElement& h) {
    const Mat3 rel = g.rotation().inverse().matrix() * h.rotation().matrix();
    return 0.5 * cay_inv(RotationMatrix(rel)).squaredNorm();
  };
  const RotationMatrix I = RotationMatrix::identity();
  CHECK(so_residual_group(L, I, I, I, I).norm() <= 1e-10);

  DiscreteLagrangian2 C;
  C.backend = Backend::group();
  C.value = [](const GroupoidElement&, const GroupoidElement&) { return 4.2; };
  std::mt19937 rng(43);
  auto R = [&rng] { return cay(testutil::ball_vec3(rng, 1.2)); };
  CHECK(so_residual_group(C, R(), R(), R(), R()).norm() == 0.0);

  for (int i = 0; i < 10; ++i) {
    RotationMatrix a = R(), b = R(), c = R(), d = R();
    Window4 w(GroupoidElement::group(a), GroupoidElement::group(b),
              GroupoidElement::group(c), GroupoidElement::group(d));
    const Vec3 lhs = so_residual_group(L, a, b, c, d);
    const VectorXd rhs = so_residual(L, w);
    CHECK((lhs - Vec3(rhs)).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("constrained_residual: degenerate and frozen cases") {
  auto L = spline_lagrangian(1);
  ConstraintSet C;
  C.phi.push_back([](const GroupoidElement& g, const GroupoidElement& h) {
    return h.to()(0) - g.from()(0) - 2.0;
  });
  Window4 w = window_from_nodes({0, 1, 2, 3, 4});

  // zero multipliers reduce to the plain residual
  auto zero = vec1(0.0);
  auto cr0 = constrained_residual(L, C, w, zero, zero, zero);
  CHECK(cr0.stationarity(0) == doctest::Approx(so_residual(L, w)(0)).epsilon(1e-12).scale(1));
  CHECK(cr0.constraint_values.norm() == 0.0);

  // along the linear sequence the spline part vanishes and only the
  // multiplier weights survive: d/dt [l1 Phi + l2 Phi + l3 Phi] = l1 - l3
  auto cr = constrained_residual(L, C, w, vec1(0.7), vec1(-2.0), vec1(0.3));
  CHECK(cr.stationarity(0) == doctest::Approx(0.7 - 0.3).epsilon(1e-9));
  CHECK(cr.constraint_values.norm() == 0.0);

  ConstraintSet Z;
  Z.phi.push_back([](const GroupoidElement&, const GroupoidElement&) { return 0.0; });
  auto crz = constrained_residual(L, Z, w, vec1(3.0), vec1(1.0), vec1(-5.0));
  CHECK(crz.constraint_values.norm() == 0.0);
  CHECK(crz.stationarity(0) == doctest::Approx(so_residual(L, w)(0)).epsilon(1e-12).scale(1));
}

TEST_CASE("solve_step: linear continuation and root-scan validation") {
  auto L = spline_lagrangian(1);
  auto t = pair_trajectory(Backend::pair(1), nodes1({-1, 0, 1, 2}));
  auto guess = GroupoidElement::pair(vec1(2.0), vec1(2.0));
  auto g4 = solve_step(L, t.arrows[0], t.arrows[1], t.arrows[2], guess);
  CHECK(g4.to()(0) == doctest::Approx(3.0).epsilon(1e-9));

  // generic windows: compare against a bisection scan of the 1D residual
  for (auto nodes : {std::vector<double>{1, 0, 1, 4}, std::vector<double>{0.3, -0.6, 1.1, 0.4}}) {
    auto tt = pair_trajectory(Backend::pair(1),
                              nodes1({nodes[0], nodes[1], nodes[2], nodes[3]}));
    auto phi = [&](double q5) {
      Window4 w(tt.arrows[0], tt.arrows[1], tt.arrows[2],
                GroupoidElement::pair(vec1(nodes[3]), vec1(q5)));
      return so_residual(L, w)(0);
    };
    double lo = -30, hi = 30;
    REQUIRE(phi(lo) * phi(hi) < 0);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(lo) * phi(mid) <= 0 ? hi : lo) = mid;
    }
    const double root = 0.5 * (lo + hi);
    auto out = solve_step(L, tt.arrows[0], tt.arrows[1], tt.arrows[2],
                          GroupoidElement::pair(vec1(nodes[3]), vec1(nodes[3])));
    CHECK(out.to()(0) == doctest::Approx(root).epsilon(1e-8).scale(1));
  }

  auto Z = lift_triple(1, [](const VectorXd&, const VectorXd&, const VectorXd&) {
    return 0.0;
  });
  CHECK_THROWS_AS(solve_step(Z, t.arrows[0], t.arrows[1], t.arrows[2], guess),
                  SingularJacobian);
}

TEST_CASE("solve_bvp: linear boundary data returns the linear interpolant") {
  auto L = spline_lagrangian(1);
  BvpProblem p{L, {}, pair_trajectory(Backend::pair(1), nodes1({0, 1, 2, 3, 4, 5, 6, 7, 8})),
               SolverConfig{}};
  auto out = solve_bvp(p);
  for (int k = 0; k < 8; ++k) {
    CHECK(out.arrows[k].from()(0) == doctest::Approx(k).epsilon(1e-10).scale(1));
    CHECK(out.arrows[k].to()(0) == doctest::Approx(k + 1).epsilon(1e-10).scale(1));
  }
  for (int j = 1; j <= 5; ++j) {
    Window4 w(out.arrows[j - 1], out.arrows[j], out.arrows[j + 1], out.arrows[j + 2]);
    CHECK(std::abs(so_residual(L, w)(0)) <= 1e-10);
  }
}

TEST_CASE("solve_bvp matches a brute-force minimizer of the action") {
  auto L = spline_lagrangian(1);
  // boundary q1=0, q2=0 and q8=0, q9=1; interior free
  std::vector<double> q{0, 0, 0, 0, 0, 0, 0, 0, 1};
  auto guess = pair_trajectory(Backend::pair(1), nodes1({0, 0, 0, 0, 0, 0, 0, 0, 1}));
  auto out = solve_bvp(BvpProblem{L, {}, guess, SolverConfig{}});

  // coordinate descent with exact parabolic line steps on the quadratic action
  auto action_of = [&](const std::vector<double>& nodes) {
    std::vector<VectorXd> v;
    for (double x : nodes) v.push_back(vec1(x));
    return action_sum(L, pair_trajectory(Backend::pair(1), v));
  };
  for (int sweep = 0; sweep < 400; ++sweep) {
    for (int k = 2; k <= 6; ++k) {
      auto f = [&](double x) {
        auto trial = q;
        trial[k] = x;
        return action_of(trial);
      };
      q[k] = parabola_step(f, q[k], 0.25);
    }
  }
  for (int k = 2; k <= 6; ++k)
    CHECK(out.arrows[k].from()(0) == doctest::Approx(q[k]).epsilon(1e-5).scale(1));

  // stationarity: junction perturbations change the action at second order
  const double S0 = action_sum(L, out);
  auto bumped = [&](double eps) {
    return std::abs(action_sum(L, junction_move(out, 3, vec1(eps))) - S0);
  };
  const double ratio = bumped(1e-3) / bumped(1e-4);
  CHECK(ratio >= 80.0);
  CHECK(ratio <= 120.0);
}

TEST_CASE("solve_bvp on the rotation group: junction moves restore uniform motion") {
  DiscreteLagrangian2 L;
  L.backend = Backend::group();
  L.value = [](const GroupoidElement& g, const GroupoidElement& h) {
    return 0.5 * (cay_inv(h.rotation()) - cay_inv(g.rotation())).squaredNorm();
  };
  const RotationMatrix W = cay(Vec3(0.2, -0.1, 0.15));
  std::vector<GroupoidElement> uniform(5, GroupoidElement::group(W));
  Trajectory guess = junction_move(
      junction_move(Trajectory(uniform), 1, Vec3(0.04, -0.02, 0.03)), 2,
      Vec3(-0.03, 0.05, 0.01));

  auto out = solve_bvp(BvpProblem{L, {}, guess, SolverConfig{}});
  for (const auto& a : out.arrows)
    CHECK(element_distance(a, GroupoidElement::group(W)) <= 1e-6);
  for (int j = 1; j <= 2; ++j) {
    Window4 w(out.arrows[j - 1], out.arrows[j], out.arrows[j + 1], out.arrows[j + 2]);
    CHECK(so_residual(L, w).norm() <= 1e-9);
  }
}

TEST_CASE("solve_bvp with an active affine constraint reaches the feasible chain") {
  auto L = spline_lagrangian(1);
  ConstraintSet C;
  C.phi.push_back([](const GroupoidElement& g, const GroupoidElement& h) {
    return h.to()(0) - g.from()(0) - 2.0;
  });
  // constraints q_{k+2} = q_k + 2 with these boundary nodes pin every node:
  // odd nodes 0,2,4,6,8 and even nodes 0.7,2.7,4.7,6.7
  auto guess = pair_trajectory(
      Backend::pair(1), nodes1({0, 0.7, 1.6, 3.1, 3.9, 5.2, 5.8, 6.7, 8}));
  auto out = solve_bvp(BvpProblem{L, C, guess, SolverConfig{}});
  const double expect[9] = {0, 0.7, 2, 2.7, 4, 4.7, 6, 6.7, 8};
  for (int k = 0; k < 8; ++k)
    CHECK(out.arrows[k].to()(0) == doctest::Approx(expect[k + 1]).epsilon(1e-6).scale(1));
  REQUIRE(out.multipliers.has_value());
  CHECK(out.multipliers->lambda.size() == 7);

  // the solved multipliers make the augmented windows stationary
  for (int j = 1; j <= 5; ++j) {
    Window4 w(out.arrows[j - 1], out.arrows[j], out.arrows[j + 1], out.arrows[j + 2]);
    auto cr = constrained_residual(L, C, w, out.multipliers->lambda[j - 1],
                                   out.multipliers->lambda[j], out.multipliers->lambda[j + 1]);
    CHECK(std::abs(cr.stationarity(0)) <= 1e-8);
    CHECK(cr.constraint_values.lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("solve_bvp: an infeasible constraint stalls instead of factoring") {
  auto L = spline_lagrangian(1);
  ConstraintSet C;
  C.phi.push_back([](const GroupoidElement&, const GroupoidElement&) { return 1.0; });
  auto guess = pair_trajectory(Backend::pair(1), nodes1({0, 1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK_THROWS_AS(solve_bvp(BvpProblem{L, C, guess, SolverConfig{}}), NoConvergence);
  try {
    solve_bvp(BvpProblem{L, C, guess, SolverConfig{}});
  } catch (const NoConvergence& e) {
    CHECK(e.residual == doctest::Approx(1.0));
  }
}

TEST_CASE("window residual is the gradient of the action sum") {
  auto f = [](const VectorXd& a, const VectorXd& b, const VectorXd& c) {
    return 0.5 * (c - 2.0 * b + a).squaredNorm() + 0.2 * std::sin(a(0)) * c(0) +
           0.05 * b(0) * b(0) * b(0);
  };
  auto L = lift_triple(1, f);
  std::mt19937 rng(44);
  std::vector<VectorXd> q;
  for (int k = 0; k < 7; ++k) q.push_back(testutil::uniform_vec(rng, 1, -1, 1));

  for (int node = 2; node <= 4; ++node) {
    auto action_at = [&](double x) {
      auto trial = q;
      trial[node] = vec1(x);
      return action_sum(L, pair_trajectory(Backend::pair(1), trial));
    };
    const double d = 1e-5;
    const double grad =
        (action_at(q[node](0) + d) - action_at(q[node](0) - d)) / (2.0 * d);
    auto t = pair_trajectory(Backend::pair(1), q);
    Window4 w(t.arrows[node - 2], t.arrows[node - 1], t.arrows[node], t.arrows[node + 1]);
    CHECK(so_residual(L, w)(0) == doctest::Approx(grad).epsilon(1e-6).scale(1));
  }
}
