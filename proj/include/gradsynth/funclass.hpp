#pragma once

// The function class S(M, L): sector bounds, in-class test objectives and
// randomized membership spot checks.

#include "gradsynth/symmat.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace gradsynth {

/// Symmetric pair M <= L describing S(M, L), with cached derived data
/// (L~ = L - M, its pseudo-inverse and kernel projector).
class SectorBounds {
 public:
  /// Throws std::invalid_argument if M <= L fails in the Loewner order.
  SectorBounds(SymMatrix m, SymMatrix l);

  static SectorBounds scalar(double m, double l, int dim = 1);
  /// Structured pair with m I <= M <=_c L <= l I built from a rotation S:
  /// M = diag(l - m + m^2/l, m), L = S^T diag(l, 2m - m^2/l) S.
  static SectorBounds structured(double m, double l);

  int dim() const { return m_.dim(); }
  const SymMatrix& lower() const { return m_; }
  const SymMatrix& upper() const { return l_; }
  const SymMatrix& gap() const { return gap_; }           // L - M
  const SymMatrix& gap_pinv() const { return gap_pinv_; } // (L - M)^dagger
  const SymMatrix& gap_kernel() const { return kernel_; } // projector onto ker(L - M)
  bool gap_singular() const { return gap_singular_; }
  bool well_posed() const { return well_posed_; }
  const std::string& diagnostic() const { return diagnostic_; }

  /// Sector bounds scaled by s > 0: S(sM, sL).
  SectorBounds scaled(double s) const;

  /// True if M = m I and L = l I (to relative tolerance tol).
  bool is_scalar(double* m = nullptr, double* l = nullptr, double tol = 1e-12) const;

 private:
  SymMatrix m_;
  SymMatrix l_;
  SymMatrix gap_;
  SymMatrix gap_pinv_;
  SymMatrix kernel_;
  bool gap_singular_ = false;
  bool well_posed_ = false;
  std::string diagnostic_;
};

enum class ObjectiveKind { quadratic, logcosh_quadratic, lagrangian, shifted };

std::string to_string(ObjectiveKind kind);

/// Differentiable test function with exact gradient.
struct Objective {
  int dim = 0;
  ObjectiveKind kind = ObjectiveKind::quadratic;
  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&)> grad;
  std::optional<Vector> critical_point;
  /// Constant Hessian for quadratic objectives (used for KKT solves).
  std::optional<Matrix> hessian;
};

struct SpotCheckReport {
  bool pass = false;
  double worst_violation = 0.0;  // <= tol when passing; negative means slack
  int pairs = 0;
  double tol = 0.0;
};

/// Samples pairs uniformly in a ball and checks, for g = f - z^T M z / 2,
/// 0 <= (dg1 - dg2)^T (z1 - z2) <= |z1 - z2|^2_{L - M} and, when L - M is
/// singular, Pi_ker (dg1 - dg2) = 0.
SpotCheckReport sector_spot_check(const Objective& f, const SectorBounds& s, int n_pairs = 1000,
                                  double radius = 10.0, std::uint64_t seed = 1,
                                  double tol = -1.0);

/// f(z) = (z - shift)^T Q (z - shift) / 2 with Q = M + theta (L - M).
Objective make_quadratic(const SectorBounds& s, double theta, const Vector& shift);

/// f(z) = z^T M z / 2 + sum_i sigma_i / c_i^2 logcosh(c_i v_i^T z) with
/// (sigma_i, v_i) the eigenpairs of L - M and widths c_i in [0.5, 2] drawn
/// from `seed`. The Hessian stays between M and L everywhere; z* = 0.
Objective make_logcosh(const SectorBounds& s, std::uint64_t seed);

/// Bounds of the Lagrangian f(x) + nu^T (A_eq x - b_eq):
/// M_L = [M A_eq^T; A_eq 0], L_L = [L A_eq^T; A_eq 0].
/// Throws std::invalid_argument for rank-deficient A_eq, singular or
/// indefinite M, singular L.
SectorBounds lagrangian_bounds(const SectorBounds& s, const Matrix& a_eq);

/// Lagrangian objective and its bounds. With zero constraint rows the inputs
/// are returned unchanged. Critical points are computed from the KKT system
/// when f is quadratic.
std::pair<Objective, SectorBounds> make_lagrangian(const Objective& f, const SectorBounds& s,
                                                   const Matrix& a_eq, const Vector& b_eq);

/// g(z) = f(z + z*) - z^T M z / 2 - f(z*), which lies in S(0, L - M) with
/// grad g(0) = 0. Requires f.critical_point.
Objective shift_to_origin(const Objective& f, const SectorBounds& s);

/// Numerically stable log(cosh(x)).
double logcosh(double x);

}  // namespace gradsynth
