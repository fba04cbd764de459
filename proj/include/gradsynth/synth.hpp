#pragma once

// Algorithm design: baselines, certification, bisection synthesis, constrained
// problems and order reduction.

#include "gradsynth/lmi.hpp"
#include "gradsynth/sdp.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gradsynth {

enum class LambdaPolicy {
  rho_squared,      // lambda = rho^2 only
  zero,             // lambda = 0 only
  fallback,         // rho^2, then 0
  grid,             // rho^2, 0, rho^2/2
};

std::string to_string(LambdaPolicy p);
/// Throws std::invalid_argument on unknown names.
LambdaPolicy parse_lambda_policy(const std::string& s);
std::vector<double> lambda_values(LambdaPolicy p, double rho);

/// Analysis certificate (P, r, lambda) for rate rho, in original units.
/// margin is the strict margin of the scaled problem it was verified against.
struct RateCertificate {
  Matrix P;
  double r = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double margin = 0.0;
  bool verified = false;
  double min_eig_p = 0.0;        // scaled units
  double max_eig_analysis = 0.0; // scaled units
};

/// Independent re-evaluation of a certificate: builds the analysis matrix
/// numerically (not via the LMI assembler) on the scaled data and checks
/// P >= margin/2, block <= -margin/2, 0 <= lambda <= rho^2. Updates the
/// eigenvalue fields and verified flag; returns verified.
bool verify_certificate(const AlgorithmParams& alg, const SectorBounds& s, RateCertificate& cert);

struct CertifyOutcome {
  std::optional<RateCertificate> cert;
  bool constraint_violation = false;
  double constraint_residual = 0.0;
  std::vector<std::pair<double, SolveStatus>> attempts;  // (lambda, status)
  std::string diagnostic;

  bool ok() const { return cert.has_value(); }
};

/// Tries each lambda of the policy in order; returns the first verified
/// certificate. A fixed-point constraint residual above constraint_tol is
/// reported as constraint_violation without solving.
CertifyOutcome certify(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                       LambdaPolicy policy = LambdaPolicy::grid, double constraint_tol = 1e-6,
                       const SolveOptions& solver = {});

/// certify with an explicit list of lambda values.
CertifyOutcome certify_lambdas(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                               const std::vector<double>& lambdas, double constraint_tol = 1e-6,
                               const SolveOptions& solver = {});

struct RateSearch {
  std::optional<RateCertificate> cert;  // at the smallest certified rate found
  double rho = 1.0;
  std::vector<std::pair<double, bool>> trace;  // (rho, certified)
  std::string diagnostic;

  bool ok() const { return cert.has_value(); }
};

/// Smallest rate in (lo, 1) certified with the grid policy, by bisection to
/// rho_tol starting from hi (retried at 1 - 1e-4 if hi fails).
RateSearch find_certified_rate(const AlgorithmParams& alg, const SectorBounds& s, double lo,
                               double hi, double rho_tol = 1e-4, double constraint_tol = 1e-6,
                               const SolveOptions& solver = {});

/// A = C = I, B = -2 (L + M)^{-1}, and its optimal rate rho((L+M)^{-1}(L-M)).
std::pair<AlgorithmParams, double> gradient_baseline(const SectorBounds& s);

class RecoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recovers (A, B, C) from P11 and A^ for the given bounds:
/// C = J2 P11, B^ = (A^ - P11) J1^T M^{-1}, B = P11^{-1} B^, A = P11^{-1} A^ - B M C.
/// Throws RecoveryError if cond(P11) > 1e12, C J1^T != I (1e-8) or the
/// fixed-point constraint fails (1e-6).
AlgorithmParams recover_params(const Matrix& p11, const Matrix& a_hat, const SectorBounds& s);

/// Same, from a solved synthesis problem; the result is in original units.
AlgorithmParams recover_params(const SynthesisLmi& lmi, const Vector& y);

struct BisectionStep {
  double rho = 0.0;
  SolveStatus status = SolveStatus::inaccurate;
  double lambda = 0.0;  // lambda of the last attempt at this rho
};

struct SynthesisOptions {
  double rho_tol = 1e-4;
  LambdaPolicy lambda_policy = LambdaPolicy::fallback;
  std::optional<double> rho_upper;
  SolveOptions solver;
};

struct SynthesisResult {
  AlgorithmParams alg;
  RateCertificate cert;
  double rho_star = 0.0;
  std::vector<BisectionStep> bisection_trace;
  std::string lambda_policy_used;
};

/// Bisection over rho on the synthesis LMI, then recovery and re-certification.
/// n <= 0 selects n = 3d. Throws std::runtime_error if no rate below one is found.
SynthesisResult synthesize(const SectorBounds& s, int n = -1, const SynthesisOptions& opts = {});

/// Synthesis for the saddle-point bounds of min f s.t. A_eq z = b_eq.
SynthesisResult synthesize_constrained(const SectorBounds& f_bounds, const Matrix& a_eq,
                                       const Vector& b_eq, int n = -1,
                                       const SynthesisOptions& opts = {});

struct ReductionOutcome {
  std::optional<SynthesisResult> result;
  Vector hankel_singular_values;
  std::string diagnostic;

  bool ok() const { return result.has_value(); }
};

/// Discrete-time controllability and observability gramians of (At, B, C).
std::pair<Matrix, Matrix> gramians(const Matrix& a_shift, const Matrix& b, const Matrix& c);

/// Similarity transform of (A, B, C) into balanced coordinates (equal,
/// diagonal gramians of (A~, B, C)). The iteration's gradient queries are
/// unchanged. Returns nullopt if A~ is not Schur stable or a Hankel singular
/// value is below 1e-12 times the largest.
std::optional<AlgorithmParams> balanced_realization(const AlgorithmParams& alg,
                                                    Vector* hankel = nullptr);

/// Balanced truncation of (A~, B, C) to target_n states, B repaired to restore
/// the fixed-point constraint, then re-certified by bisection on rho.
/// Throws std::invalid_argument if target_n < d or target_n > n.
ReductionOutcome reduce_order(const SynthesisResult& res, int target_n,
                              const SynthesisOptions& opts = {});

}  // namespace gradsynth
