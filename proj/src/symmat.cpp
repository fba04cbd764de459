#include "gradsynth/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gradsynth {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: matrix is not square");
  }
  if (m.rows() < 1) {
    throw DimensionError("SymMatrix: dimension must be at least 1");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::zero(int dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::scaled_identity(int dim, double value) {
  return SymMatrix(value * Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

double SymMatrix::norm() const { return spectral(*this).max_abs(); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionError("SymMatrix: dimension mismatch in +");
  return SymMatrix(m_ + o.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionError("SymMatrix: dimension mismatch in -");
  return SymMatrix(m_ - o.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(s * m_); }

double SpectralData::max_abs() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

int SpectralData::rank() const {
  return static_cast<int>((eigenvalues.array().abs() > rank_tol).count());
}

double default_rank_tol(int dim) { return dim * 1e-12; }

SpectralData spectral(const SymMatrix& s, double rel_rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  SpectralData out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  if (rel_rank_tol < 0) rel_rank_tol = default_rank_tol(s.dim());
  out.rank_tol = rel_rank_tol * out.max_abs();
  return out;
}

SymMatrix pseudo_inverse(const SymMatrix& s, double rel_rank_tol) {
  const SpectralData sd = spectral(s, rel_rank_tol);
  Vector inv = Vector::Zero(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    const double ev = sd.eigenvalues(i);
    if (std::abs(ev) > sd.rank_tol && ev != 0.0) inv(i) = 1.0 / ev;
  }
  return SymMatrix(sd.eigenvectors * inv.asDiagonal() * sd.eigenvectors.transpose());
}

namespace {

SymMatrix projector(const SymMatrix& s, double rel_rank_tol, bool kernel) {
  const SpectralData sd = spectral(s, rel_rank_tol);
  Vector sel = Vector::Zero(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    const bool in_kernel = std::abs(sd.eigenvalues(i)) <= sd.rank_tol;
    sel(i) = (in_kernel == kernel) ? 1.0 : 0.0;
  }
  return SymMatrix(sd.eigenvectors * sel.asDiagonal() * sd.eigenvectors.transpose());
}

}  // namespace

SymMatrix kernel_projector(const SymMatrix& s, double rel_rank_tol) {
  return projector(s, rel_rank_tol, true);
}

SymMatrix image_projector(const SymMatrix& s, double rel_rank_tol) {
  return projector(s, rel_rank_tol, false);
}

SymMatrix psd_sqrt(const SymMatrix& s) {
  const SpectralData sd = spectral(s);
  const Vector root = sd.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(sd.eigenvectors * root.asDiagonal() * sd.eigenvectors.transpose());
}

double min_eigenvalue(const SymMatrix& s) { return spectral(s).eigenvalues(0); }

double max_eigenvalue(const SymMatrix& s) {
  const SpectralData sd = spectral(s);
  return sd.eigenvalues(sd.eigenvalues.size() - 1);
}

Inertia inertia(const SymMatrix& s, double rel_zero_tol) {
  const SpectralData sd = spectral(s);
  const double cut = rel_zero_tol * sd.max_abs();
  Inertia in;
  for (int i = 0; i < s.dim(); ++i) {
    const double ev = sd.eigenvalues(i);
    if (std::abs(ev) <= cut || ev == 0.0) {
      ++in.zero;
    } else if (ev > 0) {
      ++in.positive;
    } else {
      ++in.negative;
    }
  }
  return in;
}

static void check_same_dim(const SymMatrix& m, const SymMatrix& l, const char* what) {
  if (m.dim() != l.dim()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(m.dim()) +
                         " vs " + std::to_string(l.dim()) + ")");
  }
}

bool loewner_leq(const SymMatrix& m, const SymMatrix& l, double tol) {
  check_same_dim(m, l, "loewner_leq");
  return min_eigenvalue(l - m) >= -tol;
}

bool congruence_leq(const SymMatrix& m, const SymMatrix& l, double tol, std::string* diagnostic) {
  check_same_dim(m, l, "congruence_leq");
  std::ostringstream why;
  bool ok = true;
  const double gap = min_eigenvalue(l - m);
  if (gap < -tol) {
    why << "L - M is not PSD (lambda_min = " << gap << "); ";
    ok = false;
  }
  const Inertia im = inertia(m, kNonsingularRelTol);
  const Inertia il = inertia(l, kNonsingularRelTol);
  if (im.zero > 0) {
    why << "M is numerically singular; ";
    ok = false;
  }
  if (il.zero > 0) {
    why << "L is numerically singular; ";
    ok = false;
  }
  if (im.positive != il.positive || im.negative != il.negative) {
    why << "inertia differs (M: +" << im.positive << "/-" << im.negative << ", L: +" << il.positive
        << "/-" << il.negative << "); ";
    ok = false;
  }
  if (diagnostic) *diagnostic = why.str();
  return ok;
}

double spectral_radius(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius_pencil(const SymMatrix& m, const SymMatrix& l) {
  check_same_dim(m, l, "spectral_radius_pencil");
  const SymMatrix sum = l + m;
  if (inertia(sum, kNonsingularRelTol).zero > 0) {
    throw std::domain_error("spectral_radius_pencil: L + M is singular");
  }
  const SymMatrix diff = l - m;
  const Eigen::PartialPivLU<Matrix> lu(sum.matrix());
  if (min_eigenvalue(diff) >= -1e-14 * std::max(1.0, diff.norm())) {
    const Matrix root = psd_sqrt(diff).matrix();
    const SymMatrix sim(root * lu.solve(root));
    return spectral(sim).max_abs();
  }
  return spectral_radius(lu.solve(diff.matrix()));
}

namespace well_posed {

bool by_inertia(const SymMatrix& m, const SymMatrix& l) {
  const Inertia im = inertia(m, kNonsingularRelTol);
  const Inertia il = inertia(l, kNonsingularRelTol);
  return im.zero == 0 && il.zero == 0 && im == il;
}

bool by_pencil(const SymMatrix& m, const SymMatrix& l) {
  if (inertia(l + m, kNonsingularRelTol).zero > 0) return false;
  return spectral_radius_pencil(m, l) < 1.0 - kNonsingularRelTol;
}

bool by_ratio(const SymMatrix& m, const SymMatrix& l) {
  const SpectralData sm = spectral(m);
  if (sm.eigenvalues.cwiseAbs().minCoeff() <= kNonsingularRelTol * sm.max_abs()) return false;
  const Matrix ratio = Eigen::PartialPivLU<Matrix>(m.matrix()).solve(l.matrix());
  Eigen::EigenSolver<Matrix> es(ratio, false);
  const auto ev = es.eigenvalues();
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > 1e-9 * scale) return false;
    if (ev(i).real() <= kNonsingularRelTol * scale) return false;
  }
  return true;
}

}  // namespace well_posed

}  // namespace gradsynth
