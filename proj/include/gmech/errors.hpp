#pragma once

#include <stdexcept>
#include <string>

namespace gmech {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix handed to vee() has a symmetric part above the skewness tolerance.
struct NotSkew : Error {
  double defect;
  explicit NotSkew(double d)
      : Error("matrix is not skew-symmetric (defect " + std::to_string(d) + ")"), defect(d) {}
};

/// A matrix failed the rotation-matrix orthonormality or determinant check.
struct NotRotation : Error {
  double defect;
  explicit NotRotation(double d)
      : Error("matrix is not a rotation (defect " + std::to_string(d) + ")"), defect(d) {}
};

/// An inverse Cayley (or similar rational inverse) was requested too close to
/// its singular set; carries the conditioning estimate that tripped the check.
struct NearSingular : Error {
  double inverse_norm;
  explicit NearSingular(double n)
      : Error("near the Cayley singularity (inverse norm " + std::to_string(n) + ")"),
        inverse_norm(n) {}
};

/// Array shapes handed to a structure-data or solver routine do not agree.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// Two groupoid elements were multiplied whose matching defect exceeds the
/// composability tolerance.
struct NotComposable : Error {
  double defect;
  explicit NotComposable(double d)
      : Error("elements are not composable (defect " + std::to_string(d) + ")"), defect(d) {}
};

/// A Newton system produced a rank-deficient Jacobian.
struct SingularJacobian : Error {
  int rank;      ///< numerical rank found
  int dimension; ///< full system dimension
  SingularJacobian(int r, int n)
      : Error("singular Jacobian (rank " + std::to_string(r) + " of " + std::to_string(n) + ")"),
        rank(r), dimension(n) {}
};

/// An iteration hit its step limit; carries the last residual norm.
struct NoConvergence : Error {
  double residual;
  int iterations;
  NoConvergence(double r, int it)
      : Error("no convergence after " + std::to_string(it) + " iterations (residual " +
              std::to_string(r) + ")"),
        residual(r), iterations(it) {}
};

/// An actuated/unactuated index split does not partition the algebra indices.
struct InvalidSplit : Error {
  using Error::Error;
};

/// A conservation check was asked for on a trajectory that does not satisfy
/// the discrete equations to the on-shell tolerance.
struct NotOnShell : Error {
  double residual;
  explicit NotOnShell(double r)
      : Error("trajectory is not on shell (residual " + std::to_string(r) + ")"), residual(r) {}
};

/// Malformed CLI configuration (unknown key, wrong type, missing field, ...).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gmech
