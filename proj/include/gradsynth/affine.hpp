#pragma once

// Matrix-valued affine expressions in a vector of scalar decision variables:
// E(y) = E0 + sum_i y_i E_i. Used to write the analysis and synthesis
// inequalities in block form instead of hand-indexing coefficients.

#include "gradsynth/symmat.hpp"

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace gradsynth {

class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(int rows, int cols);
  explicit AffineExpr(const Matrix& constant);

  static AffineExpr zero(int rows, int cols) { return AffineExpr(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Matrix& constant() const { return constant_; }
  const std::map<int, Matrix>& terms() const { return terms_; }

  /// Adds coef * y_var to the expression.
  void add_term(int var, const Matrix& coef);

  Matrix evaluate(const Vector& y) const;
  /// Non-constant part evaluated at y.
  Matrix evaluate_linear(const Vector& y) const;

  AffineExpr transpose() const;
  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr operator-() const;
  AffineExpr& operator+=(const AffineExpr& o);

  friend AffineExpr operator*(double s, const AffineExpr& e);
  friend AffineExpr operator*(const Matrix& a, const AffineExpr& e);
  friend AffineExpr operator*(const AffineExpr& e, const Matrix& b);

  /// Assembles a block matrix; every row of blocks must have consistent
  /// heights and every column consistent widths.
  static AffineExpr blocks(const std::vector<std::vector<AffineExpr>>& grid);

  bool is_symmetric(double tol = 0.0) const;
  /// Replaces every coefficient by its symmetric part (exact for symmetric input).
  void symmetrize();

 private:
  int rows_ = 0;
  int cols_ = 0;
  Matrix constant_;
  std::map<int, Matrix> terms_;
};

/// Hands out consecutive variable indices with human-readable names.
class VariableRegistry {
 public:
  int add(const std::string& name);
  /// Symmetric dim x dim matrix variable; upper triangle in row-major order.
  AffineExpr symmetric(const std::string& name, int dim);
  /// General rows x cols matrix variable in row-major order.
  AffineExpr general(const std::string& name, int rows, int cols);
  AffineExpr scalar(const std::string& name, int* index = nullptr);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace gradsynth
