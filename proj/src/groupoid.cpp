#include "gmech/groupoid.hpp"

#include <cmath>

namespace gmech {

Backend Backend::pair(int base_dim) {
  if (base_dim <= 0) throw DimensionMismatch("pair backend needs a positive base dimension");
  Backend b;
  b.kind_ = Kind::Pair;
  b.base_dim_ = base_dim;
  b.rank_ = base_dim;
  return b;
}

Backend Backend::group() {
  Backend b;
  b.kind_ = Kind::Group;
  b.base_dim_ = 0;
  b.rank_ = 3;
  b.has_rotation_ = true;
  return b;
}

Backend Backend::action(bool rotation_factor, int torus_dim) {
  if (torus_dim < 0) throw DimensionMismatch("negative torus dimension");
  if (!rotation_factor && torus_dim == 0)
    throw DimensionMismatch("action backend needs at least one group factor");
  Backend b;
  b.kind_ = Kind::Action;
  b.has_rotation_ = rotation_factor;
  b.torus_dim_ = torus_dim;
  b.base_dim_ = (rotation_factor ? 3 : 0) + torus_dim;
  b.rank_ = b.base_dim_;
  return b;
}

GroupoidElement GroupoidElement::pair(const VectorXd& from, const VectorXd& to) {
  if (from.size() != to.size() || from.size() == 0)
    throw DimensionMismatch("pair arrow endpoints must share a positive dimension");
  GroupoidElement g;
  g.backend_ = Backend::pair((int)from.size());
  g.from_ = from;
  g.to_ = to;
  return g;
}

GroupoidElement GroupoidElement::group(const RotationMatrix& r) {
  GroupoidElement g;
  g.backend_ = Backend::group();
  g.rot_ = r;
  return g;
}

GroupoidElement GroupoidElement::action(const BasePoint& source, const RotationMatrix& w,
                                        const VectorXd& shift) {
  if (source.backend.kind() != Backend::Kind::Action)
    throw DimensionMismatch("source point does not belong to an action backend");
  if (source.coords.size() != source.backend.base_dim())
    throw DimensionMismatch("source point size does not match its backend");
  if (shift.size() != source.backend.torus_dim())
    throw DimensionMismatch("torus shift size does not match the backend");
  GroupoidElement g;
  g.backend_ = source.backend;
  g.src_ = source;
  g.rot_ = w;
  g.shift_ = shift;
  return g;
}

const VectorXd& GroupoidElement::from() const {
  if (backend_.kind() != Backend::Kind::Pair) throw DimensionMismatch("not a pair arrow");
  return from_;
}

const VectorXd& GroupoidElement::to() const {
  if (backend_.kind() != Backend::Kind::Pair) throw DimensionMismatch("not a pair arrow");
  return to_;
}

const RotationMatrix& GroupoidElement::rotation() const { return rot_; }

const BasePoint& GroupoidElement::action_source() const {
  if (backend_.kind() != Backend::Kind::Action) throw DimensionMismatch("not an action arrow");
  return src_;
}

const VectorXd& GroupoidElement::torus_shift() const {
  if (backend_.kind() != Backend::Kind::Action) throw DimensionMismatch("not an action arrow");
  return shift_;
}

namespace {

/// Right action of a group increment on an action-backend base point.
VectorXd acted(const Backend& b, const VectorXd& coords, const RotationMatrix& w,
               const VectorXd& shift) {
  VectorXd out = coords;
  if (b.has_rotation()) out.head<3>() = w.matrix().transpose() * coords.head<3>();
  if (b.torus_dim() > 0) out.tail(b.torus_dim()) += shift;
  return out;
}

}  // namespace

BasePoint source(const GroupoidElement& g) {
  switch (g.backend().kind()) {
    case Backend::Kind::Pair:
      return {g.backend(), g.from()};
    case Backend::Kind::Group:
      return {g.backend(), VectorXd(0)};
    case Backend::Kind::Action:
      return g.action_source();
  }
  throw Error("unreachable");
}

BasePoint target(const GroupoidElement& g) {
  switch (g.backend().kind()) {
    case Backend::Kind::Pair:
      return {g.backend(), g.to()};
    case Backend::Kind::Group:
      return {g.backend(), VectorXd(0)};
    case Backend::Kind::Action:
      return {g.backend(),
              acted(g.backend(), g.action_source().coords, g.rotation(), g.torus_shift())};
  }
  throw Error("unreachable");
}

GroupoidElement identity_arrow(const BasePoint& x) {
  switch (x.backend.kind()) {
    case Backend::Kind::Pair:
      return GroupoidElement::pair(x.coords, x.coords);
    case Backend::Kind::Group:
      return GroupoidElement::group(RotationMatrix::identity());
    case Backend::Kind::Action:
      return GroupoidElement::action(x, RotationMatrix::identity(),
                                     VectorXd::Zero(x.backend.torus_dim()));
  }
  throw Error("unreachable");
}

GroupoidElement inverse(const GroupoidElement& g) {
  switch (g.backend().kind()) {
    case Backend::Kind::Pair:
      return GroupoidElement::pair(g.to(), g.from());
    case Backend::Kind::Group:
      return GroupoidElement::group(g.rotation().inverse());
    case Backend::Kind::Action:
      return GroupoidElement::action(target(g), g.rotation().inverse(), -g.torus_shift());
  }
  throw Error("unreachable");
}

double composability_defect(const GroupoidElement& g, const GroupoidElement& h) {
  if (!(g.backend() == h.backend())) throw DimensionMismatch("arrows from different backends");
  if (g.backend().kind() == Backend::Kind::Group) return 0.0;
  return (target(g).coords - source(h).coords).norm();
}

GroupoidElement compose(const GroupoidElement& g, const GroupoidElement& h) {
  const double defect = composability_defect(g, h);
  if (defect > tols().composability) throw NotComposable(defect);
  switch (g.backend().kind()) {
    case Backend::Kind::Pair:
      return GroupoidElement::pair(g.from(), h.to());
    case Backend::Kind::Group:
      return GroupoidElement::group(g.rotation() * h.rotation());
    case Backend::Kind::Action:
      return GroupoidElement::action(source(g), g.rotation() * h.rotation(),
                                     g.torus_shift() + h.torus_shift());
  }
  throw Error("unreachable");
}

GroupoidElement fiber_curve(const BasePoint& x, const VectorXd& xi, double t) {
  if (xi.size() != x.backend.rank())
    throw DimensionMismatch("algebra components do not match the backend rank");
  switch (x.backend.kind()) {
    case Backend::Kind::Pair:
      return GroupoidElement::pair(x.coords, x.coords + t * xi);
    case Backend::Kind::Group:
      return GroupoidElement::group(cay(t * Vec3(xi)));
    case Backend::Kind::Action: {
      const RotationMatrix w =
          x.backend.has_rotation() ? cay(t * Vec3(xi.head<3>())) : RotationMatrix::identity();
      return GroupoidElement::action(x, w, t * xi.tail(x.backend.torus_dim()));
    }
  }
  throw Error("unreachable");
}

namespace {

double fd_time_step(const VectorXd& xi) {
  return tols().fd_step / std::max(1.0, xi.norm());
}

}  // namespace

double dirderiv_left(const ScalarFn& f, const GroupoidElement& g, const VectorXd& xi) {
  const BasePoint x = target(g);
  const double t = fd_time_step(xi);
  const double fp = f(compose(g, fiber_curve(x, xi, t)));
  const double fm = f(compose(g, fiber_curve(x, xi, -t)));
  return (fp - fm) / (2.0 * t);
}

double dirderiv_right(const ScalarFn& f, const GroupoidElement& g, const VectorXd& xi) {
  const BasePoint x = source(g);
  const double t = fd_time_step(xi);
  const double fp = f(compose(inverse(fiber_curve(x, xi, t)), g));
  const double fm = f(compose(inverse(fiber_curve(x, xi, -t)), g));
  return -(fp - fm) / (2.0 * t);
}

double element_distance(const GroupoidElement& a, const GroupoidElement& b) {
  if (!(a.backend() == b.backend())) throw DimensionMismatch("arrows from different backends");
  switch (a.backend().kind()) {
    case Backend::Kind::Pair:
      return std::max((a.from() - b.from()).norm(), (a.to() - b.to()).norm());
    case Backend::Kind::Group:
      return (a.rotation().matrix() - b.rotation().matrix()).norm();
    case Backend::Kind::Action:
      return std::max({(a.action_source().coords - b.action_source().coords).norm(),
                       (a.rotation().matrix() - b.rotation().matrix()).norm(),
                       (a.torus_shift() - b.torus_shift()).norm()});
  }
  throw Error("unreachable");
}

}  // namespace gmech
