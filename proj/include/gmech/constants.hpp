#pragma once

namespace gmech {

/// All numerical tolerances and finite-difference step sizes in one place, so
/// a change here propagates consistently through validation, differentiation
/// and the solvers. Values are chosen for double precision.
struct Tolerances {
  /// Orthonormality / determinant defect allowed in RotationMatrix.
  double rotation_defect = 1e-9;
  /// Symmetric part allowed in a matrix passed to vee().
  double skew_defect = 1e-9;
  /// Matching defect allowed when composing groupoid elements.
  double composability = 1e-9;
  /// Base step for central finite differences of directional derivatives
  /// (scaled by max(1, characteristic size) at the call site).
  double fd_step = 1e-5;
  /// Forward-difference step used when assembling Newton Jacobians.
  double jacobian_fd_step = 1e-6;
  /// Frobenius norm of (R + I)^-1 beyond which cay_inv refuses to evaluate.
  double near_singular_inverse_norm = 1e8;
  /// Residual above which a trajectory no longer counts as on shell.
  double on_shell_residual = 1e-8;
};

/// Shared default instance.
inline const Tolerances& tols() {
  static const Tolerances t{};
  return t;
}

}  // namespace gmech
