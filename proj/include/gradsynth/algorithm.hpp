#pragma once

#include "gradsynth/funclass.hpp"

#include <optional>
#include <string>

namespace gradsynth {

/// Parameters of the iteration x+ = A x + B grad f(C x) with n states and
/// d-dimensional decision variable, together with the class it targets.
struct AlgorithmParams {
  Matrix A;
  Matrix B;
  Matrix C;
  SectorBounds bounds;

  AlgorithmParams(Matrix a, Matrix b, Matrix c, SectorBounds s);

  int n() const { return static_cast<int>(A.rows()); }
  int d() const { return static_cast<int>(C.rows()); }

  /// A + B M C: the iteration matrix after moving the critical point to zero.
  Matrix shifted() const;

  /// || C (A~ - I)^{-1} B M - I_d ||_max, or +inf if A~ - I is singular.
  double constraint_residual() const;

  /// Fixed point x* = (A~ - I)^{-1} B M z* for a critical point z*.
  Vector lift_fixed_point(const Vector& z_star) const;
};

}  // namespace gradsynth
