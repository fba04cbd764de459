#include "gradsynth/algorithm.hpp"

#include <cmath>
#include <limits>

namespace gradsynth {

AlgorithmParams::AlgorithmParams(Matrix a, Matrix b, Matrix c, SectorBounds s)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), bounds(std::move(s)) {
  const auto n = A.rows();
  const auto d = bounds.dim();
  if (A.cols() != n || B.rows() != n || B.cols() != d || C.rows() != d || C.cols() != n) {
    throw DimensionError("AlgorithmParams: inconsistent shapes (A " + std::to_string(A.rows()) +
                         "x" + std::to_string(A.cols()) + ", B " + std::to_string(B.rows()) +
                         "x" + std::to_string(B.cols()) + ", C " + std::to_string(C.rows()) +
                         "x" + std::to_string(C.cols()) + ", d " + std::to_string(d) + ")");
  }
}

Matrix AlgorithmParams::shifted() const { return A + B * bounds.lower().matrix() * C; }

double AlgorithmParams::constraint_residual() const {
  const Matrix shifted_minus_id = shifted() - Matrix::Identity(n(), n());
  Eigen::FullPivLU<Matrix> lu(shifted_minus_id);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  const Matrix gain = C * lu.solve(Matrix(B * bounds.lower().matrix()));
  const double res = (gain - Matrix::Identity(d(), d())).cwiseAbs().maxCoeff();
  return std::isfinite(res) ? res : std::numeric_limits<double>::infinity();
}

Vector AlgorithmParams::lift_fixed_point(const Vector& z_star) const {
  const Matrix shifted_minus_id = shifted() - Matrix::Identity(n(), n());
  return shifted_minus_id.fullPivLu().solve(Vector(B * (bounds.lower().matrix() * z_star)));
}

}  // namespace gradsynth
