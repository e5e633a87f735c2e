#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gmech/constants.hpp"
#include "gmech/errors.hpp"

namespace gmech {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// hat(w) is the unique skew matrix with hat(w) * v == w x v.
Mat3 hat(const Vec3& w);

/// Inverse of hat(). Throws NotSkew when ||sym(m)||_F exceeds the skewness
/// tolerance; the skew part is taken exactly, so vee(hat(w)) == w bitwise.
Vec3 vee(const Mat3& m);

/// Rotation matrix that is validated once on construction and then trusted.
/// There is no silent re-orthonormalization anywhere in the library; callers
/// that hold a drifted matrix must go through project_to_so3() explicitly.
class RotationMatrix {
 public:
  /// Throws NotRotation unless ||m^T m - I||_F and |det m - 1| are both
  /// within the rotation tolerance.
  explicit RotationMatrix(const Mat3& m);

  const Mat3& matrix() const { return m_; }

  RotationMatrix inverse() const;
  RotationMatrix operator*(const RotationMatrix& rhs) const;

  static RotationMatrix identity();

 private:
  struct Trusted {};
  RotationMatrix(const Mat3& m, Trusted) : m_(m) {}
  Mat3 m_;
};

/// Nearest rotation in the Frobenius sense (polar projection through an SVD,
/// with the determinant sign fixed up).
RotationMatrix project_to_so3(const Mat3& m);

/// Cayley retraction so(3) -> SO(3):
///   cay(w) = I + 4 / (4 + |w|^2) * (hat(w) + hat(w)^2 / 2),
/// a rational chart that covers all rotations except the angle-pi set.
RotationMatrix cay(const Vec3& w);

/// Closed-form inverse of cay(): hat(w) = 2 (R - I)(R + I)^-1, then vee of
/// the skew part. Throws NearSingular when ||(R + I)^-1||_F is beyond the
/// configured bound (rotation angle near pi).
Vec3 cay_inv(const RotationMatrix& r);

/// Right-trivialized tangent of cay():
///   d/dt cay(w + t y) |_0 = hat(dcay(w) y) * cay(w).
Mat3 dcay(const Vec3& w);

/// Inverse of dcay(): dcay_inv(w) = I - hat(w)/2 + w w^T / 4.
Mat3 dcay_inv(const Vec3& w);

/// Structure data of a Lie algebroid in a chosen basis {e_alpha}: anchor
/// components rho^i_alpha and structure constants C^gamma_{alpha beta} from
/// [[e_alpha, e_beta]] = C^gamma_{alpha beta} e_gamma. The anchor may be a
/// constant matrix or (optionally) base-point dependent.
struct StructureData {
  int rank = 0;      ///< fiber dimension r
  int base_dim = 0;  ///< base dimension m (0 for a Lie algebra)
  /// Constant anchor components, base_dim x rank. Ignored when anchor_fn set.
  Eigen::MatrixXd anchor;
  /// bracket[gamma] is an r x r matrix holding C^gamma_{alpha beta}.
  std::vector<Eigen::MatrixXd> bracket;
  /// Optional base-dependent anchor and the point to evaluate the structure
  /// equations at; derivative terms are then taken by central differences.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> anchor_fn;
  Eigen::VectorXd base_point;
};

/// Largest violations of the two compatibility equations:
///   anchor_defect: rho^j_a d_j rho^i_b - rho^j_b d_j rho^i_a - rho^i_g C^g_{ab}
///   jacobi_defect: sum over cyclic (a,b,g) of [rho^i_a d_i C^n_{bg} + C^n_{am} C^m_{bg}]
struct StructureDefects {
  double anchor_defect = 0.0;
  double jacobi_defect = 0.0;
};

/// Evaluates both defects. Antisymmetry of the constants is deliberately not
/// enforced (feeding perturbed data through the check is the point); shapes
/// are, with DimensionMismatch raised on any disagreement.
StructureDefects check_structure(const StructureData& sd);

/// Structure data of so(3) in the hat basis: zero anchor, C^g_{ab} = eps_abg.
StructureData so3_structure();

/// Structure data of the abelian algebroid R^n over R^n with identity anchor.
StructureData abelian_structure(int n);

}  // namespace gmech
