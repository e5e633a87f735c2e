#include "gmech/second_order.hpp"

#include <cmath>
#include <utility>

#include "gmech/constants.hpp"
#include "gmech/liealg.hpp"

namespace gmech {

namespace {

void require_pair_composable(const GroupoidElement& a, const GroupoidElement& b) {
  const double defect = composability_defect(a, b);
  if (defect > tols().composability) throw NotComposable(defect);
}

double central(const std::function<double(double)>& f, double dt) {
  return (f(dt) - f(-dt)) / (2.0 * dt);
}

}  // namespace

Window4::Window4(GroupoidElement a, GroupoidElement b, GroupoidElement c, GroupoidElement d)
    : g1(std::move(a)), g2(std::move(b)), g3(std::move(c)), g4(std::move(d)) {
  require_pair_composable(g1, g2);
  require_pair_composable(g2, g3);
  require_pair_composable(g3, g4);
}

Trajectory::Trajectory(std::vector<GroupoidElement> arrows_,
                       std::optional<Multipliers> multipliers_)
    : arrows(std::move(arrows_)), multipliers(std::move(multipliers_)) {
  if (arrows.empty()) throw DimensionMismatch("trajectory needs at least one arrow");
  for (size_t k = 0; k + 1 < arrows.size(); ++k) {
    if (!(arrows[k].backend() == arrows[k + 1].backend()))
      throw DimensionMismatch("trajectory mixes backends");
    require_pair_composable(arrows[k], arrows[k + 1]);
  }
}

Trajectory pair_trajectory(const Backend& backend, const std::vector<VectorXd>& nodes) {
  if (backend.kind() != Backend::Kind::Pair)
    throw DimensionMismatch("pair_trajectory needs a pair backend");
  if (nodes.size() < 2) throw DimensionMismatch("need at least two nodes");
  for (const VectorXd& q : nodes)
    if (q.size() != backend.base_dim())
      throw DimensionMismatch("node dimension does not match the backend");
  std::vector<GroupoidElement> arrows;
  arrows.reserve(nodes.size() - 1);
  for (size_t k = 0; k + 1 < nodes.size(); ++k)
    arrows.push_back(GroupoidElement::pair(nodes[k], nodes[k + 1]));
  return Trajectory(std::move(arrows));
}

std::vector<VectorXd> pair_nodes(const Trajectory& t) {
  if (t.arrows.front().backend().kind() != Backend::Kind::Pair)
    throw DimensionMismatch("pair_nodes needs a pair backend");
  std::vector<VectorXd> nodes;
  nodes.reserve(t.arrows.size() + 1);
  nodes.push_back(t.arrows.front().from());
  for (const GroupoidElement& a : t.arrows) nodes.push_back(a.to());
  return nodes;
}

Trajectory junction_move(const Trajectory& t, int j, const VectorXd& z) {
  const int M = static_cast<int>(t.arrows.size());
  if (j < 0 || j + 1 >= M) throw DimensionMismatch("junction index out of range");
  const GroupoidElement h = fiber_curve(target(t.arrows[j]), z, 1.0);
  std::vector<GroupoidElement> arrows = t.arrows;
  arrows[j] = compose(arrows[j], h);
  arrows[j + 1] = compose(inverse(h), arrows[j + 1]);
  return Trajectory(std::move(arrows), t.multipliers);
}

double action_sum(const DiscreteLagrangian2& L2, const Trajectory& t) {
  double s = 0.0;
  for (size_t k = 0; k + 1 < t.arrows.size(); ++k) {
    require_pair_composable(t.arrows[k], t.arrows[k + 1]);
    s += L2.value(t.arrows[k], t.arrows[k + 1]);
  }
  return s;
}

VectorXd so_residual(const DiscreteLagrangian2& L2, const Window4& w) {
  const int r = L2.backend.rank();
  if (L2.has_analytic()) {
    return VectorXd(L2.d2_left(w.g1, w.g2) + L2.d1_left(w.g2, w.g3) -
                    L2.d2_right(w.g2, w.g3) - L2.d1_right(w.g3, w.g4));
  }
  const BasePoint junction = target(w.g2);
  const double dt = tols().fd_step;
  VectorXd out(r);
  for (int c = 0; c < r; ++c) {
    const VectorXd e = VectorXd::Unit(r, c);
    out(c) = central(
        [&](double s) {
          const GroupoidElement h = fiber_curve(junction, e, s);
          const GroupoidElement hi = inverse(h);
          const GroupoidElement a = compose(w.g2, h);
          const GroupoidElement b = compose(hi, w.g3);
          return L2.value(w.g1, a) + L2.value(a, b) + L2.value(b, w.g4);
        },
        dt);
  }
  return out;
}

VectorXd so_residual_pair(const TripleLagrangian& L, const VectorXd& q1,
                          const VectorXd& q2, const VectorXd& q3,
                          const VectorXd& q4, const VectorXd& q5) {
  const int m = static_cast<int>(q3.size());
  const double dt = tols().fd_step;
  auto partial = [&](int slot, const VectorXd& a, const VectorXd& b, const VectorXd& c) {
    const auto& cb = slot == 1 ? L.d1 : (slot == 2 ? L.d2 : L.d3);
    if (cb) return cb(a, b, c);
    VectorXd g(m);
    for (int i = 0; i < m; ++i) {
      const VectorXd e = VectorXd::Unit(m, i);
      g(i) = central(
          [&](double s) {
            return slot == 1   ? L.value(a + s * e, b, c)
                   : slot == 2 ? L.value(a, b + s * e, c)
                               : L.value(a, b, c + s * e);
          },
          dt);
    }
    return g;
  };
  return partial(3, q1, q2, q3) + partial(2, q2, q3, q4) + partial(1, q3, q4, q5);
}

Vec3 so_residual_group(const DiscreteLagrangian2& L2, const RotationMatrix& gkm1,
                       const RotationMatrix& gk, const RotationMatrix& gk1,
                       const RotationMatrix& gk2) {
  auto L = [&](const RotationMatrix& a, const RotationMatrix& b) {
    return L2.value(GroupoidElement::group(a), GroupoidElement::group(b));
  };
  const double dt = tols().fd_step;
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    Vec3 e = Vec3::Unit(c);
    // <D1 L(gk, gk1) + D2 L(gkm1, gk), gk e>
    const double left = central([&](double s) { return L(gk * cay(s * e), gk1); }, dt) +
                        central([&](double s) { return L(gkm1, gk * cay(s * e)); }, dt);
    // <D2 L(gk, gk1) + D1 L(gk1, gk2), e gk1>
    const double right = central([&](double s) { return L(gk, cay(s * e) * gk1); }, dt) +
                         central([&](double s) { return L(cay(s * e) * gk1, gk2); }, dt);
    out(c) = left - right;
  }
  return out;
}

ConstrainedResidual constrained_residual(const DiscreteLagrangian2& L2,
                                         const ConstraintSet& C, const Window4& w,
                                         const VectorXd& l1, const VectorXd& l2,
                                         const VectorXd& l3) {
  const int s = static_cast<int>(C.phi.size());
  if (s < 1) throw DimensionMismatch("constraint set is empty");
  if (l1.size() != s || l2.size() != s || l3.size() != s)
    throw DimensionMismatch("multiplier size does not match constraint count");

  auto weighted = [&](const VectorXd& l, const GroupoidElement& a, const GroupoidElement& b) {
    double v = 0.0;
    for (int A = 0; A < s; ++A) v += l(A) * C.phi[A](a, b);
    return v;
  };

  const int r = L2.backend.rank();
  const BasePoint junction = target(w.g2);
  const double dt = tols().fd_step;
  VectorXd stationarity(r);
  for (int c = 0; c < r; ++c) {
    const VectorXd e = VectorXd::Unit(r, c);
    stationarity(c) = central(
        [&](double t) {
          const GroupoidElement h = fiber_curve(junction, e, t);
          const GroupoidElement hi = inverse(h);
          const GroupoidElement a = compose(w.g2, h);
          const GroupoidElement b = compose(hi, w.g3);
          return L2.value(w.g1, a) + weighted(l1, w.g1, a) +  //
                 L2.value(a, b) + weighted(l2, a, b) +        //
                 L2.value(b, w.g4) + weighted(l3, b, w.g4);
        },
        dt);
  }

  VectorXd values(3 * s);
  for (int A = 0; A < s; ++A) {
    values(A) = C.phi[A](w.g1, w.g2);
    values(s + A) = C.phi[A](w.g2, w.g3);
    values(2 * s + A) = C.phi[A](w.g3, w.g4);
  }
  return {stationarity, values};
}

GroupoidElement solve_step(const DiscreteLagrangian2& L2, const GroupoidElement& g1,
                           const GroupoidElement& g2, const GroupoidElement& g3,
                           const GroupoidElement& guess, const SolverConfig& cfg) {
  require_pair_composable(g1, g2);
  require_pair_composable(g2, g3);
  require_pair_composable(g3, guess);
  const BasePoint anchor = target(guess);
  auto g4_of = [&](const VectorXd& z) {
    return compose(guess, fiber_curve(anchor, z, 1.0));
  };
  auto residual = [&](const VectorXd& z) {
    return so_residual(L2, Window4(g1, g2, g3, g4_of(z)));
  };
  const VectorXd z = newton_solve(residual, VectorXd::Zero(L2.backend.rank()), cfg);
  return g4_of(z);
}

namespace {

struct BvpWorkspace {
  const BvpProblem& p;
  int M;            // arrows
  int r;            // fiber rank
  int s;            // constraints per pair (0 if none)
  int nz;           // junction unknowns
  int n;            // total unknowns

  std::vector<GroupoidElement> arrows;
  std::vector<VectorXd> lambda;  // per pair, only when constrained

  explicit BvpWorkspace(const BvpProblem& prob)
      : p(prob),
        M(static_cast<int>(prob.guess.arrows.size())),
        r(prob.lagrangian.backend.rank()),
        s(prob.constraints ? static_cast<int>(prob.constraints->phi.size()) : 0),
        arrows(prob.guess.arrows) {
    if (M < 4) throw ConfigError("boundary-value problem needs at least 4 arrows (5 nodes)");
    if (prob.constraints && s < 1) throw DimensionMismatch("constraint set is empty");
    nz = (M - 3) * r;
    n = nz + (M - 1) * s;
    if (p.constraints) {
      lambda.assign(M - 1, VectorXd::Zero(s));
      if (p.guess.multipliers) {
        const auto& lm = p.guess.multipliers->lambda;
        if (static_cast<int>(lm.size()) != M - 1)
          throw DimensionMismatch("guess multipliers must have one entry per arrow pair");
        for (int k = 0; k < M - 1; ++k) {
          if (lm[k].size() != s)
            throw DimensionMismatch("guess multiplier size does not match constraint count");
          lambda[k] = lm[k];
        }
      }
    }
  }

  // Applies junction moves v[0..nz) and multiplier offsets v[nz..n) to the
  // current center. Free junctions are j = 1..M-3.
  std::vector<GroupoidElement> moved(const VectorXd& v) const {
    std::vector<GroupoidElement> h;
    h.reserve(M - 3);
    for (int j = 1; j <= M - 3; ++j)
      h.push_back(fiber_curve(target(arrows[j]), v.segment((j - 1) * r, r), 1.0));
    auto h_at = [&](int j) -> const GroupoidElement* {
      return (j >= 1 && j <= M - 3) ? &h[j - 1] : nullptr;
    };
    std::vector<GroupoidElement> out;
    out.reserve(M);
    for (int k = 0; k < M; ++k) {
      GroupoidElement a = arrows[k];
      if (const GroupoidElement* hl = h_at(k - 1)) a = compose(inverse(*hl), a);
      if (const GroupoidElement* hr = h_at(k)) a = compose(a, *hr);
      out.push_back(std::move(a));
    }
    return out;
  }

  VectorXd residual(const VectorXd& v) const {
    const std::vector<GroupoidElement> A = moved(v);
    std::vector<VectorXd> lam = lambda;
    for (int k = 0; k < static_cast<int>(lam.size()); ++k)
      lam[k] += v.segment(nz + k * s, s);

    VectorXd out(n);
    for (int j = 1; j <= M - 3; ++j) {
      Window4 w(A[j - 1], A[j], A[j + 1], A[j + 2]);
      const VectorXd block =
          p.constraints
              ? constrained_residual(p.lagrangian, *p.constraints, w, lam[j - 1],
                                     lam[j], lam[j + 1])
                    .stationarity
              : so_residual(p.lagrangian, w);
      out.segment((j - 1) * r, r) = block;
    }
    for (int k = 0; k + 1 < M; ++k)
      for (int A_ = 0; A_ < s; ++A_)
        out(nz + k * s + A_) = p.constraints->phi[A_](A[k], A[k + 1]);
    return out;
  }

  void accept(const VectorXd& v) {
    arrows = moved(v);
    for (int k = 0; k < static_cast<int>(lambda.size()); ++k)
      lambda[k] += v.segment(nz + k * s, s);
  }
};

}  // namespace

Trajectory solve_bvp(const BvpProblem& p) {
  const SolverConfig& cfg = p.config;
  if (cfg.tolerance <= 0.0) throw ConfigError("solver tolerance must be positive");
  if (cfg.max_iterations < 1) throw ConfigError("solver needs at least one iteration");

  BvpWorkspace ws(p);
  const int n = ws.n;
  const VectorXd zero = VectorXd::Zero(n);

  auto finish = [&]() {
    std::optional<Multipliers> mult;
    if (p.constraints) mult = Multipliers{ws.lambda};
    return Trajectory(ws.arrows, std::move(mult));
  };

  // Constrained problems start with a feasibility phase: Gauss-Newton on the
  // constraint values over junction moves alone, multipliers untouched.
  // Interpolated guesses tend to sit at symmetric states where the coupled
  // system is nearly singular (discrete conservation laws), while the
  // constraint manifold itself is well conditioned away from them; reaching
  // it first gives the Newton iteration an honest starting state. A stall
  // here simply hands the current point to the coupled phase.
  if (p.constraints && ws.nz > 0) {
    const int nc = n - ws.nz;
    auto cval = [&](const VectorXd& vj) {
      VectorXd full = zero;
      full.head(ws.nz) = vj;
      const std::vector<GroupoidElement> A = ws.moved(full);
      VectorXd out(nc);
      for (int k = 0; k + 1 < ws.M; ++k)
        for (int a = 0; a < ws.s; ++a)
          out(k * ws.s + a) = p.constraints->phi[a](A[k], A[k + 1]);
      return out;
    };
    const VectorXd zj = VectorXd::Zero(ws.nz);
    VectorXd c0 = cval(zj);
    for (int it = 0;
         it < cfg.max_iterations && c0.lpNorm<Eigen::Infinity>() > 0.1 * cfg.tolerance;
         ++it) {
      MatrixXd Jc(nc, ws.nz);
      for (int j = 0; j < ws.nz; ++j) {
        VectorXd v = zj;
        v(j) = cfg.fd_step;
        Jc.col(j) = (cval(v) - c0) / cfg.fd_step;
      }
      Eigen::JacobiSVD<MatrixXd> svd(Jc, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-10);
      const VectorXd d = svd.solve(-c0);
      const double merit = 0.5 * c0.squaredNorm();
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 20; ++ls) {
        const VectorXd c_try = cval(alpha * d);
        if (0.5 * c_try.squaredNorm() <=
            merit * (1.0 - 2.0 * cfg.sufficient_decrease * alpha)) {
          VectorXd full = zero;
          full.head(ws.nz) = alpha * d;
          ws.accept(full);
          c0 = c_try;
          moved = true;
          break;
        }
        alpha *= cfg.contraction;
      }
      if (!moved) break;
    }

    // Multipliers enter the stationarity rows linearly, so unit offsets give
    // exact columns. Unless the caller supplied a guess, take least-squares
    // values at the starting trajectory, but only along directions where the
    // constraint gradients are strong: weak directions (near-conserved
    // quantities) would soak up enormous multipliers fitting a point that is
    // feasible but nowhere near optimal, and that inflated curvature then
    // wrecks the coupled iteration. Weak components stay zero and get picked
    // up by the Newton phase as the trajectory itself becomes consistent.
    if (!p.guess.multipliers) {
      const int nl = n - ws.nz;
      const VectorXd r_base = ws.residual(zero);
      MatrixXd B(ws.nz, nl);
      for (int j = 0; j < nl; ++j) {
        VectorXd v = zero;
        v(ws.nz + j) = 1.0;
        B.col(j) = ws.residual(v).head(ws.nz) - r_base.head(ws.nz);
      }
      Eigen::JacobiSVD<MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-2);
      VectorXd full = zero;
      full.tail(nl) = svd.solve(-r_base.head(ws.nz));
      ws.accept(full);
    }
  }

  VectorXd r0 = ws.residual(zero);
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    if (r0.lpNorm<Eigen::Infinity>() <= cfg.tolerance) return finish();

    // Central differences: residual entries carry 1/h^2 stencil coefficients,
    // so the one-sided truncation error alone would flatten convergence well
    // above the tolerance once steps start probing the weak subspace.
    MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      VectorXd vp = zero, vm = zero;
      vp(j) = cfg.fd_step;
      vm(j) = -cfg.fd_step;
      J.col(j) = (ws.residual(vp) - ws.residual(vm)) / (2.0 * cfg.fd_step);
    }

    Eigen::FullPivLU<MatrixXd> lu(J);
    const int rank = static_cast<int>(lu.rank());
    if (rank < n && !p.constraints) throw SingularJacobian(rank, n);

    const double merit = 0.5 * r0.squaredNorm();
    auto sufficient = [&](double m_try, double alpha) {
      return m_try <= merit * (1.0 - 2.0 * cfg.sufficient_decrease * alpha);
    };

    // Second-order correction: a trial step that fixes stationarity still
    // picks up constraint violation quadratic in the step size because the
    // constraint manifold is curved, and the line search would then trade
    // that violation back at a crawl. Re-evaluating the constraints at the
    // trial point and restoring with the current constraint Jacobian keeps
    // trial points glued to the manifold.
    const int ncon = n - ws.nz;
    std::optional<Eigen::JacobiSVD<MatrixXd>> soc;
    if (p.constraints && ws.nz > 0 && ncon > 0) {
      soc.emplace(J.bottomRows(ncon).leftCols(ws.nz),
                  Eigen::ComputeThinU | Eigen::ComputeThinV);
      soc->setThreshold(1e-10);
    }
    auto corrected = [&](VectorXd v_try, VectorXd r_try) {
      if (soc) {
        VectorXd v2 = v_try;
        v2.head(ws.nz) += soc->solve(-r_try.tail(ncon));
        VectorXd r2 = ws.residual(v2);
        if (r2.squaredNorm() < r_try.squaredNorm()) {
          v_try = std::move(v2);
          r_try = std::move(r2);
        }
      }
      return std::make_pair(std::move(v_try), std::move(r_try));
    };

    // Fast path: the full Newton step.
    bool accepted = false;
    if (rank == n) {
      const VectorXd dv = lu.solve(-r0);
      auto [v_use, r_try] = corrected(dv, ws.residual(dv));
      if (sufficient(0.5 * r_try.squaredNorm(), 1.0)) {
        ws.accept(v_use);
        r0 = r_try;
        accepted = true;
      }
    }

    // Otherwise the system may be nearly singular: constraint sets can
    // contain discrete conservation laws, leaving some combinations all but
    // invisible to junction moves, and the exact Newton direction blows up
    // along the weak subspace while backtracking it would creep. Compare
    // truncated-SVD directions across cutoffs and take the step with the
    // best accepted decrease.
    if (!accepted) {
      VectorXd best_v, best_r;
      double best_merit = merit;
      auto consider = [&](const VectorXd& d) {
        double alpha = 1.0;
        for (int ls = 0; ls < 20; ++ls) {
          auto [v_use, r_try] = corrected(alpha * d, ws.residual(alpha * d));
          const double m_try = 0.5 * r_try.squaredNorm();
          if (sufficient(m_try, alpha)) {
            if (m_try < best_merit) {
              best_merit = m_try;
              best_v = std::move(v_use);
              best_r = std::move(r_try);
            }
            return;
          }
          alpha *= cfg.contraction;
        }
      };
      Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
      for (double cut = 1e-14; cut <= 1e-2; cut *= 100.0) {
        svd.setThreshold(cut);
        consider(svd.solve(-r0));
      }
      if (best_v.size() > 0) {
        ws.accept(best_v);
        r0 = best_r;
        accepted = true;
      }
    }
    if (!accepted)
      throw NoConvergence(r0.lpNorm<Eigen::Infinity>(), iter + 1);
  }
  if (r0.lpNorm<Eigen::Infinity>() <= cfg.tolerance) return finish();
  throw NoConvergence(r0.lpNorm<Eigen::Infinity>(), cfg.max_iterations);
}

}  // namespace gmech
