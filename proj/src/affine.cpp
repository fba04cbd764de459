#include "gradsynth/affine.hpp"

#include <stdexcept>

namespace gradsynth {

AffineExpr::AffineExpr(int rows, int cols)
    : rows_(rows), cols_(cols), constant_(Matrix::Zero(rows, cols)) {}

AffineExpr::AffineExpr(const Matrix& constant)
    : rows_(static_cast<int>(constant.rows())),
      cols_(static_cast<int>(constant.cols())),
      constant_(constant) {}

void AffineExpr::add_term(int var, const Matrix& coef) {
  if (coef.rows() != rows_ || coef.cols() != cols_) {
    throw DimensionError("AffineExpr::add_term: coefficient shape mismatch");
  }
  auto it = terms_.find(var);
  if (it == terms_.end()) {
    terms_.emplace(var, coef);
  } else {
    it->second += coef;
  }
}

Matrix AffineExpr::evaluate(const Vector& y) const { return constant_ + evaluate_linear(y); }

Matrix AffineExpr::evaluate_linear(const Vector& y) const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& [var, coef] : terms_) {
    if (var >= y.size()) throw DimensionError("AffineExpr::evaluate: variable out of range");
    out += y(var) * coef;
  }
  return out;
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr out(Matrix(constant_.transpose()));
  for (const auto& [var, coef] : terms_) out.terms_.emplace(var, coef.transpose());
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("AffineExpr: shape mismatch in +");
  constant_ += o.constant_;
  for (const auto& [var, coef] : o.terms_) add_term(var, coef);
  return *this;
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  AffineExpr out = *this;
  out += o;
  return out;
}

AffineExpr AffineExpr::operator-() const { return -1.0 * *this; }

AffineExpr AffineExpr::operator-(const AffineExpr& o) const { return *this + (-o); }

AffineExpr operator*(double s, const AffineExpr& e) {
  AffineExpr out(Matrix(s * e.constant_));
  for (const auto& [var, coef] : e.terms_) out.terms_.emplace(var, s * coef);
  return out;
}

AffineExpr operator*(const Matrix& a, const AffineExpr& e) {
  if (a.cols() != e.rows_) throw DimensionError("AffineExpr: shape mismatch in left product");
  AffineExpr out(Matrix(a * e.constant_));
  for (const auto& [var, coef] : e.terms_) out.terms_.emplace(var, a * coef);
  return out;
}

AffineExpr operator*(const AffineExpr& e, const Matrix& b) {
  if (e.cols_ != b.rows()) throw DimensionError("AffineExpr: shape mismatch in right product");
  AffineExpr out(Matrix(e.constant_ * b));
  for (const auto& [var, coef] : e.terms_) out.terms_.emplace(var, coef * b);
  return out;
}

AffineExpr AffineExpr::blocks(const std::vector<std::vector<AffineExpr>>& grid) {
  if (grid.empty() || grid.front().empty()) throw DimensionError("AffineExpr::blocks: empty grid");
  const std::size_t ncols = grid.front().size();
  std::vector<int> heights;
  std::vector<int> widths;
  for (const auto& row : grid) {
    if (row.size() != ncols) throw DimensionError("AffineExpr::blocks: ragged grid");
    heights.push_back(row.front().rows());
  }
  for (const auto& cell : grid.front()) widths.push_back(cell.cols());
  int total_rows = 0;
  int total_cols = 0;
  for (int h : heights) total_rows += h;
  for (int w : widths) total_cols += w;
  AffineExpr out(total_rows, total_cols);
  int r0 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    int c0 = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      const AffineExpr& cell = grid[i][j];
      if (cell.rows() != heights[i] || cell.cols() != widths[j]) {
        throw DimensionError("AffineExpr::blocks: inconsistent block shape at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
      }
      out.constant_.block(r0, c0, heights[i], widths[j]) = cell.constant_;
      for (const auto& [var, coef] : cell.terms_) {
        auto it = out.terms_.find(var);
        if (it == out.terms_.end()) {
          it = out.terms_.emplace(var, Matrix::Zero(total_rows, total_cols)).first;
        }
        it->second.block(r0, c0, heights[i], widths[j]) += coef;
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

bool AffineExpr::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  auto sym = [tol](const Matrix& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
  };
  if (rows_ == 0) return true;
  if (!sym(constant_)) return false;
  for (const auto& [var, coef] : terms_) {
    if (!sym(coef)) return false;
  }
  return true;
}

void AffineExpr::symmetrize() {
  constant_ = 0.5 * (constant_ + constant_.transpose());
  for (auto& [var, coef] : terms_) coef = 0.5 * (coef + coef.transpose());
}

int VariableRegistry::add(const std::string& name) {
  names_.push_back(name);
  return static_cast<int>(names_.size()) - 1;
}

AffineExpr VariableRegistry::symmetric(const std::string& name, int dim) {
  AffineExpr out(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const int v = add(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
      Matrix e = Matrix::Zero(dim, dim);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      out.add_term(v, e);
    }
  }
  return out;
}

AffineExpr VariableRegistry::general(const std::string& name, int rows, int cols) {
  AffineExpr out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int v = add(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
      Matrix e = Matrix::Zero(rows, cols);
      e(i, j) = 1.0;
      out.add_term(v, e);
    }
  }
  return out;
}

AffineExpr VariableRegistry::scalar(const std::string& name, int* index) {
  const int v = add(name);
  if (index) *index = v;
  AffineExpr out(1, 1);
  out.add_term(v, Matrix::Ones(1, 1));
  return out;
}

}  // namespace gradsynth
