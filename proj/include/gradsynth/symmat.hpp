#pragma once

// Dense symmetric linear algebra used throughout the synthesis pipeline:
// spectral decompositions, Moore-Penrose pseudo-inverses, kernel projectors
// and the Loewner / Loewner-congruence orderings on sector bounds.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gradsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Symmetric dense matrix. The stored entries are exactly symmetric: the
/// input is replaced by (S + S^T) / 2 on construction.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);
  static SymMatrix identity(int dim);
  static SymMatrix zero(int dim);
  static SymMatrix scaled_identity(int dim, double value);
  static SymMatrix diagonal(const Vector& diag);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Spectral norm (largest absolute eigenvalue).
  double norm() const;

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  SymMatrix operator-() const { return SymMatrix(-m_); }

 private:
  Matrix m_;
};

/// Eigen-decomposition S = V diag(eigenvalues) V^T with ascending eigenvalues.
struct SpectralData {
  Vector eigenvalues;
  Matrix eigenvectors;
  double rank_tol = 0.0;  // absolute cutoff below which |lambda| counts as zero

  double max_abs() const;
  int rank() const;
};

/// Default relative rank cutoff: dim * 1e-12 (multiplied by max |eigenvalue|).
double default_rank_tol(int dim);

SpectralData spectral(const SymMatrix& s, double rel_rank_tol = -1.0);

/// S^dagger: inverts eigenvalues with |lambda| > rel_rank_tol * max|lambda|.
SymMatrix pseudo_inverse(const SymMatrix& s, double rel_rank_tol = -1.0);

/// Orthogonal projector onto ker(S), same rank cutoff as pseudo_inverse.
SymMatrix kernel_projector(const SymMatrix& s, double rel_rank_tol = -1.0);

/// Orthogonal projector onto im(S).
SymMatrix image_projector(const SymMatrix& s, double rel_rank_tol = -1.0);

/// Principal square root of a PSD matrix (negative eigenvalues clamped to 0).
SymMatrix psd_sqrt(const SymMatrix& s);

double min_eigenvalue(const SymMatrix& s);
double max_eigenvalue(const SymMatrix& s);

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  bool operator==(const Inertia&) const = default;
};

/// Inertia with eigenvalues |lambda| <= rel_zero_tol * max|lambda| counted as zero.
Inertia inertia(const SymMatrix& s, double rel_zero_tol = 1e-9);

/// M <= L in the Loewner order: lambda_min(L - M) >= -tol.
bool loewner_leq(const SymMatrix& m, const SymMatrix& l, double tol = 1e-10);

/// Relative nonsingularity threshold used by the congruence gate.
inline constexpr double kNonsingularRelTol = 1e-9;

/// Loewner-congruence ordering: L - M >= -tol*I, both nonsingular and with
/// identical inertia. Failing pairs fill `diagnostic` when provided.
bool congruence_leq(const SymMatrix& m, const SymMatrix& l, double tol = 1e-10,
                    std::string* diagnostic = nullptr);

/// rho((L + M)^{-1} (L - M)). Uses the similar symmetric matrix
/// sqrt(L - M) (L + M)^{-1} sqrt(L - M) when L - M is PSD.
/// Throws std::domain_error if L + M is singular.
double spectral_radius_pencil(const SymMatrix& m, const SymMatrix& l);

/// Spectral radius of a general square matrix.
double spectral_radius(const Matrix& a);

// Equivalent well-posedness tests for a pair M <= L. All three agree on
// pairs away from the nonsingularity threshold.
namespace well_posed {
/// M and L nonsingular with identical counts of positive/negative eigenvalues.
bool by_inertia(const SymMatrix& m, const SymMatrix& l);
/// L + M nonsingular and rho((L + M)^{-1}(L - M)) < 1.
bool by_pencil(const SymMatrix& m, const SymMatrix& l);
/// M nonsingular and M^{-1} L has only real positive eigenvalues.
bool by_ratio(const SymMatrix& m, const SymMatrix& l);
}  // namespace well_posed

}  // namespace gradsynth
