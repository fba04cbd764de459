#pragma once

// Assembly of the rate-analysis and synthesis matrix inequalities as affine
// LMI problems over vectorized decision variables.

#include "gradsynth/affine.hpp"
#include "gradsynth/algorithm.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gradsynth {

enum class BlockSense { negative_definite, positive_definite };

struct AffineBlock {
  std::string label;
  BlockSense sense = BlockSense::negative_definite;
  AffineExpr expr;

  int size() const { return expr.rows(); }
};

struct EqualityRow {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0.0;
};

/// Strict LMI feasibility problem: every negative_definite block must satisfy
/// F(y) <= -margin I, every positive_definite block F(y) >= margin I, and all
/// equality rows hold.
struct LmiProblem {
  int n_vars = 0;
  std::vector<AffineBlock> blocks;
  std::vector<EqualityRow> eq_constraints;
  std::vector<std::string> var_names;
  double strict_margin = 1e-7;

  /// Throws std::invalid_argument on non-symmetric blocks, out-of-range
  /// variables or non-finite data.
  void validate() const;

  Matrix evaluate_block(std::size_t i, const Vector& y) const;
  /// Max |E y - e| over equality rows.
  double equality_residual(const Vector& y) const;

  /// Human-readable dump: blocks with constant and coefficient matrices, then
  /// equality rows; variables in registration order.
  void dump(std::ostream& os) const;
};

/// Data scale used before assembly: 1 / ||L|| (1 when L = 0).
double data_scale(const SectorBounds& s);

/// Default strict margin for bounds already scaled: 1e-7 (1 + ||L||).
double default_margin(const SectorBounds& scaled_bounds);

struct AnalysisLmi {
  LmiProblem problem;
  AffineExpr p;                // (n+d) x (n+d), scaled units
  std::optional<AffineExpr> r; // absent when L - M is nonsingular
  double scale = 1.0;          // data scale s; certificates map back with it
  double rho = 0.0;
  double lambda = 0.0;
  int n = 0;
  int d = 0;

  /// Certificate variables in original units.
  SymMatrix certificate_p(const Vector& y) const;
  double certificate_r(const Vector& y) const;
};

/// Rate-analysis inequality for a fixed algorithm. Decision variables: the
/// upper triangle of P and (if L - M is singular) the multiplier r.
/// Requires 0 <= lambda <= rho^2 and rho in [0, 1).
AnalysisLmi build_analysis_lmi(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                               double lambda, double margin = -1.0);

struct SynthesisLmi {
  LmiProblem problem;
  AffineExpr p11;               // n x n
  AffineExpr p22;               // d x d
  AffineExpr a_hat;             // n x n
  std::optional<AffineExpr> r;
  int n = 0;
  int d = 0;
  double scale = 1.0;
  double rho = 0.0;
  double lambda = 0.0;
  SectorBounds bounds;          // original units
  SectorBounds scaled_bounds;   // bounds used during assembly
};

/// Synthesis inequality in the linearizing variables (P11, P22, A^, r) with
/// C = J2 P11, P21 = J3 P11, B^ = (A^ - P11) J1^T M^{-1} substituted, plus
/// the equality J2 P11 J1^T = I. Requires n >= 3d and nonsingular M.
SynthesisLmi build_synthesis_lmi(const SectorBounds& s, int n, double rho, double lambda,
                                 double margin = -1.0);

/// Selector matrices J1 = (I 0), J2 = (0 I 0), J3 = (0 0 I 0), each d x n.
Matrix selector(int which, int d, int n);

// Direct numeric evaluations used for independent verification.

/// Left-hand side of the analysis inequality, (n + 2d) square, at (P, r).
Matrix analysis_matrix(const AlgorithmParams& alg, const SectorBounds& s, const SymMatrix& p,
                       double r, double rho, double lambda);

/// Schur-complemented (2n + 3d) form of the analysis inequality at (P, r)
/// for the given algorithm, written with A^ = P11 A~ and B^ = P11 B.
Matrix schur_form_matrix(const AlgorithmParams& alg, const SectorBounds& s, const SymMatrix& p,
                         double r, double rho, double lambda);

/// Symmetric-vectorized cone block of the form G0 + sum_i y_i G_i >= 0.
struct ConeBlock {
  int size = 0;
  Vector constant;
  std::vector<std::pair<int, Vector>> coeffs;
};

/// Standard conic feasibility form: find y with E y = e and every cone block
/// PSD. Negative-definite blocks are negated and all blocks shifted by
/// -margin I, so strictness is already absorbed.
struct ConicForm {
  int n_vars = 0;
  std::vector<ConeBlock> cones;
  Matrix eq_matrix;
  Vector eq_rhs;
  double margin = 0.0;

  int total_cone_dim() const;
};

/// svec with sqrt(2) off-diagonal scaling (upper triangle, row-major).
Vector svec(const Matrix& m);
Matrix smat(const Vector& v, int dim);

ConicForm vectorize(const LmiProblem& p);

/// Inverse of the cone part of vectorize: reconstructs each original block
/// (sign and margin restored).
std::vector<AffineExpr> devectorize(const ConicForm& form, const LmiProblem& layout);

}  // namespace gradsynth
