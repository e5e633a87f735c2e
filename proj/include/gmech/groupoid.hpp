#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gmech/liealg.hpp"

namespace gmech {

using Eigen::VectorXd;

/// Identifies which of the three shipped groupoid structures is in play and
/// carries the dimensions needed to interpret payloads.
///
///   Pair:   Q x Q over Q = R^m; an arrow (q0, q1) runs from q0 to q1.
///   Group:  SO(3) over a single point; every pair of arrows composes.
///   Action: Q x H for a right action of H on Q, with H a rotation factor
///           and/or a torus factor. The rotation acts on the first three
///           base coordinates by v -> w^T v; torus angles translate. Angles
///           are tracked on the universal cover (plain reals, no wrapping).
class Backend {
 public:
  enum class Kind { Pair, Group, Action };

  static Backend pair(int base_dim);
  static Backend group();
  static Backend action(bool rotation_factor, int torus_dim);

  Kind kind() const { return kind_; }
  /// Number of coordinates of a base point.
  int base_dim() const { return base_dim_; }
  /// Fiber dimension of the associated algebroid (= chart dimension).
  int rank() const { return rank_; }
  bool has_rotation() const { return has_rotation_; }
  int torus_dim() const { return torus_dim_; }

  bool operator==(const Backend& o) const = default;

 private:
  Kind kind_ = Kind::Pair;
  int base_dim_ = 0;
  int rank_ = 0;
  bool has_rotation_ = false;
  int torus_dim_ = 0;
};

/// Point of the base manifold. Pair: q in R^m. Group: empty vector. Action:
/// [acted vector (3, when the rotation factor is present); torus angles].
struct BasePoint {
  Backend backend;
  VectorXd coords;
};

/// A single arrow. Construction validates payload shapes; the rotation parts
/// go through RotationMatrix and are therefore orthonormal by construction.
class GroupoidElement {
 public:
  static GroupoidElement pair(const VectorXd& from, const VectorXd& to);
  static GroupoidElement group(const RotationMatrix& r);
  /// Arrow (x, h) of the action groupoid: source x, group increment h given
  /// as rotation factor (pass identity when absent) and torus shift.
  static GroupoidElement action(const BasePoint& source, const RotationMatrix& w,
                                const VectorXd& shift);

  const Backend& backend() const { return backend_; }

  // Pair payload.
  const VectorXd& from() const;
  const VectorXd& to() const;
  // Rotation factor (Group backend, or Action with a rotation factor).
  const RotationMatrix& rotation() const;
  // Action payload.
  const BasePoint& action_source() const;
  const VectorXd& torus_shift() const;

 private:
  GroupoidElement() = default;
  Backend backend_;
  VectorXd from_, to_;          // Pair
  RotationMatrix rot_ = RotationMatrix::identity();
  BasePoint src_;               // Action
  VectorXd shift_;              // Action
};

BasePoint source(const GroupoidElement& g);
BasePoint target(const GroupoidElement& g);

/// Unit arrow at a base point.
GroupoidElement identity_arrow(const BasePoint& x);

GroupoidElement inverse(const GroupoidElement& g);

/// Distance between target(g) and source(h); zero means exactly composable.
double composability_defect(const GroupoidElement& g, const GroupoidElement& h);

/// Partial multiplication. Throws NotComposable when the matching defect
/// exceeds the composability tolerance.
GroupoidElement compose(const GroupoidElement& g, const GroupoidElement& h);

/// Curve t -> element of the source fiber over x with initial velocity given
/// by the algebra components xi (the retraction chart of the backend):
/// Pair (x, x + t xi); Group cay(t xi); Action (x, cay(t xi_rot), t xi_tor).
GroupoidElement fiber_curve(const BasePoint& x, const VectorXd& xi, double t);

using ScalarFn = std::function<double(const GroupoidElement&)>;

/// Derivative of f along the left-invariant extension of xi at g, i.e.
/// d/dt f(g * fiber_curve(target(g), xi, t)) at t = 0, by central difference.
double dirderiv_left(const ScalarFn& f, const GroupoidElement& g, const VectorXd& xi);

/// Derivative of f along the right-invariant extension of xi at g, i.e.
/// -d/dt f(fiber_curve(source(g), xi, t)^-1 * g) at t = 0.
double dirderiv_right(const ScalarFn& f, const GroupoidElement& g, const VectorXd& xi);

/// Payload distance between two arrows of the same backend (test / reporting
/// helper; not a geodesic distance).
double element_distance(const GroupoidElement& a, const GroupoidElement& b);

}  // namespace gmech
