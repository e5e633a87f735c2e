#include "gmech/liealg.hpp"

#include <cmath>

namespace gmech {

Mat3 hat(const Vec3& w) {
  Mat3 m;
  // clang-format off
  m <<     0.0, -w.z(),  w.y(),
         w.z(),    0.0, -w.x(),
        -w.y(),  w.x(),    0.0;
  // clang-format on
  return m;
}

Vec3 vee(const Mat3& m) {
  const double defect = 0.5 * (m + m.transpose()).norm();
  if (defect > tols().skew_defect) throw NotSkew(defect);
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = std::abs(m.determinant() - 1.0);
  const double defect = std::max(orth, det);
  if (defect > tols().rotation_defect) throw NotRotation(defect);
}

RotationMatrix RotationMatrix::inverse() const {
  return RotationMatrix(m_.transpose(), Trusted{});
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& rhs) const {
  // Products of validated rotations drift by at most a few ulps per factor,
  // far inside the tolerance, so the result is trusted without a re-check.
  return RotationMatrix(m_ * rhs.m_, Trusted{});
}

RotationMatrix RotationMatrix::identity() {
  return RotationMatrix(Mat3::Identity(), Trusted{});
}

RotationMatrix project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return RotationMatrix(r);
}

RotationMatrix cay(const Vec3& w) {
  const Mat3 wh = hat(w);
  const Mat3 r =
      Mat3::Identity() + 4.0 / (4.0 + w.squaredNorm()) * (wh + 0.5 * wh * wh);
  return RotationMatrix(r);
}

Vec3 cay_inv(const RotationMatrix& r) {
  const Mat3 shifted = r.matrix() + Mat3::Identity();
  Eigen::FullPivLU<Mat3> lu(shifted);
  if (!lu.isInvertible()) throw NearSingular(std::numeric_limits<double>::infinity());
  const Mat3 inv = lu.inverse();
  if (inv.norm() > tols().near_singular_inverse_norm) throw NearSingular(inv.norm());
  const Mat3 a = 2.0 * (r.matrix() - Mat3::Identity()) * inv;
  // a is skew up to roundoff; keep only the skew part rather than trip vee().
  return Vec3(0.5 * (a(2, 1) - a(1, 2)), 0.5 * (a(0, 2) - a(2, 0)),
              0.5 * (a(1, 0) - a(0, 1)));
}

Mat3 dcay(const Vec3& w) {
  return 2.0 / (4.0 + w.squaredNorm()) * (2.0 * Mat3::Identity() + hat(w));
}

Mat3 dcay_inv(const Vec3& w) {
  return Mat3::Identity() - 0.5 * hat(w) + 0.25 * w * w.transpose();
}

namespace {

Eigen::MatrixXd anchor_at(const StructureData& sd, const Eigen::VectorXd& q) {
  return sd.anchor_fn ? sd.anchor_fn(q) : sd.anchor;
}

}  // namespace

StructureDefects check_structure(const StructureData& sd) {
  const int r = sd.rank;
  const int m = sd.base_dim;
  if (r < 0 || m < 0) throw DimensionMismatch("negative rank or base dimension");
  if ((int)sd.bracket.size() != r)
    throw DimensionMismatch("expected one structure-constant slab per basis element");
  for (const auto& c : sd.bracket)
    if (c.rows() != r || c.cols() != r)
      throw DimensionMismatch("structure-constant slab is not rank x rank");

  Eigen::VectorXd q = sd.base_point;
  if (sd.anchor_fn && q.size() != m)
    throw DimensionMismatch("base point size does not match base dimension");
  if (!sd.anchor_fn && (sd.anchor.rows() != m || sd.anchor.cols() != r))
    throw DimensionMismatch("anchor is not base-dim x rank");
  if (!sd.anchor_fn) q = Eigen::VectorXd::Zero(m);

  const Eigen::MatrixXd rho = anchor_at(sd, q);
  if (rho.rows() != m || rho.cols() != r)
    throw DimensionMismatch("anchor evaluation is not base-dim x rank");

  // d rho^i_a / d q^j by central differences; identically zero for the
  // constant-anchor case.
  const double h = tols().fd_step;
  std::vector<Eigen::MatrixXd> drho(m, Eigen::MatrixXd::Zero(m, r));
  if (sd.anchor_fn) {
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd qp = q, qm = q;
      qp(j) += h;
      qm(j) -= h;
      drho[j] = (sd.anchor_fn(qp) - sd.anchor_fn(qm)) / (2.0 * h);
    }
  }

  StructureDefects out;
  // Compatibility of anchor and bracket.
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int i = 0; i < m; ++i) {
        double lhs = 0.0;
        for (int j = 0; j < m; ++j)
          lhs += rho(j, a) * drho[j](i, b) - rho(j, b) * drho[j](i, a);
        double rhs = 0.0;
        for (int g = 0; g < r; ++g) rhs += rho(i, g) * sd.bracket[g](a, b);
        out.anchor_defect = std::max(out.anchor_defect, std::abs(lhs - rhs));
      }

  // Jacobi-type identity for the constants (their derivative term vanishes
  // because the constants are held constant in this representation).
  for (int n = 0; n < r; ++n)
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int g = 0; g < r; ++g) {
          double sum = 0.0;
          const int idx[3][3] = {{a, b, g}, {b, g, a}, {g, a, b}};
          for (const auto& p : idx)
            for (int mu = 0; mu < r; ++mu)
              sum += sd.bracket[n](p[0], mu) * sd.bracket[mu](p[1], p[2]);
          out.jacobi_defect = std::max(out.jacobi_defect, std::abs(sum));
        }
  return out;
}

StructureData so3_structure() {
  StructureData sd;
  sd.rank = 3;
  sd.base_dim = 0;
  sd.anchor = Eigen::MatrixXd::Zero(0, 3);
  sd.bracket.assign(3, Eigen::MatrixXd::Zero(3, 3));
  // [[e_a, e_b]] = eps_{abg} e_g
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int perm[3] = {a, b, g};
        double eps = 0.0;
        if (perm[0] != perm[1] && perm[1] != perm[2] && perm[0] != perm[2])
          eps = ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
        sd.bracket[g](a, b) = eps;
      }
  return sd;
}

StructureData abelian_structure(int n) {
  StructureData sd;
  sd.rank = n;
  sd.base_dim = n;
  sd.anchor = Eigen::MatrixXd::Identity(n, n);
  sd.bracket.assign(n, Eigen::MatrixXd::Zero(n, n));
  return sd;
}

}  // namespace gmech
