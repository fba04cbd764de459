#include "gradsynth/synth.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>

namespace gradsynth {

namespace {

// Solves X = A X A^T + Q by vectorization: (I - A (x) A) vec(X) = vec(Q).
Matrix stein(const Matrix& a, const Matrix& q) {
  const auto n = a.rows();
  Matrix k(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = a(i, j) * a;
  }
  k = Matrix::Identity(n * n, n * n) - k;
  const Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible()) throw std::runtime_error("gramian: Stein equation is singular");
  const Vector x = lu.solve(Eigen::Map<const Vector>(q.data(), n * n));
  const Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

struct Balancing {
  Matrix t;    // x = t * x_bal
  Matrix ti;   // x_bal = ti * x
  Vector hsv;
};

// Square-root balancing with symmetric PSD factors of the gramians; keeps the
// leading `order` states.
Balancing balance(const Matrix& at, const Matrix& b, const Matrix& c, int order);

}  // namespace

std::pair<Matrix, Matrix> gramians(const Matrix& a_shift, const Matrix& b, const Matrix& c) {
  if (spectral_radius(a_shift) >= 1.0) {
    throw std::runtime_error("gramians: iteration matrix is not Schur stable");
  }
  return {stein(a_shift, b * b.transpose()), stein(a_shift.transpose(), c.transpose() * c)};
}

namespace {

// Diagonal similarity equalizing row and column norms of [A~ B; C 0]
// (Osborne iteration). Recovered realizations can span many orders of
// magnitude, which makes the Kronecker Stein system numerically singular.
Vector diagonal_prebalance(const Matrix& at, const Matrix& b, const Matrix& c) {
  const auto n = at.rows();
  Vector dg = Vector::Ones(n);
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = c.col(i).squaredNorm() * dg(i) * dg(i);
      double row = b.row(i).squaredNorm() / (dg(i) * dg(i));
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::pow(at(j, i) * dg(i) / dg(j), 2);
        row += std::pow(at(i, j) * dg(j) / dg(i), 2);
      }
      if (!(col > 0 && row > 0)) continue;
      const double f = std::pow(row / col, 0.25);
      if (std::abs(std::log(f)) > 1e-3) {
        dg(i) *= f;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dg;
}

Balancing balance(const Matrix& at_in, const Matrix& b_in, const Matrix& c_in, int order) {
  const Vector dg = diagonal_prebalance(at_in, b_in, c_in);
  const Matrix at = dg.cwiseInverse().asDiagonal() * at_in * dg.asDiagonal();
  const Matrix b = dg.cwiseInverse().asDiagonal() * b_in;
  const Matrix c = c_in * dg.asDiagonal();
  const auto [wc, wo] = gramians(at, b, c);
  const Matrix rc = psd_sqrt(SymMatrix(wc)).matrix();
  const Matrix ro = psd_sqrt(SymMatrix(wo)).matrix();
  Eigen::JacobiSVD<Matrix> svd(ro.transpose() * rc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Balancing out;
  out.hsv = svd.singularValues();
  const Vector isq = out.hsv.head(order).cwiseSqrt().cwiseInverse();
  out.t = rc * svd.matrixV().leftCols(order) * isq.asDiagonal();
  out.ti = isq.asDiagonal() * svd.matrixU().leftCols(order).transpose() * ro.transpose();
  out.t = dg.asDiagonal() * out.t;
  out.ti = out.ti * dg.cwiseInverse().asDiagonal();
  return out;
}

}  // namespace

std::optional<AlgorithmParams> balanced_realization(const AlgorithmParams& alg, Vector* hankel) {
  const Matrix at = alg.shifted();
  if (!(spectral_radius(at) < 1.0)) return std::nullopt;
  Balancing bal;
  try {
    bal = balance(at, alg.B, alg.C, alg.n());
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  if (hankel) *hankel = bal.hsv;
  if (!(bal.hsv(alg.n() - 1) > 1e-12 * bal.hsv(0))) return std::nullopt;
  const Matrix b = bal.ti * alg.B;
  const Matrix c = alg.C * bal.t;
  const Matrix a = bal.ti * at * bal.t - b * alg.bounds.lower().matrix() * c;
  AlgorithmParams out(a, b, c, alg.bounds);
  if (!out.A.allFinite() || !(out.constraint_residual() <= 1e-6)) return std::nullopt;
  return out;
}

ReductionOutcome reduce_order(const SynthesisResult& res, int target_n, const SynthesisOptions& opts) {
  const AlgorithmParams& alg = res.alg;
  const int n = alg.n();
  const int d = alg.d();
  if (target_n < d) throw std::invalid_argument("reduce_order: target_n must be at least d");
  if (target_n > n) throw std::invalid_argument("reduce_order: target_n exceeds the state dimension");
  ReductionOutcome out;
  if (target_n == n) {
    out.result = res;
    return out;
  }
  const SectorBounds& s = alg.bounds;
  const Matrix at = alg.shifted();
  const Balancing bal = balance(at, alg.B, alg.C, target_n);
  out.hankel_singular_values = bal.hsv;
  if (!(bal.hsv(target_n - 1) > 1e-14 * std::max(1.0, bal.hsv(0)))) {
    out.diagnostic = "retained Hankel singular values are numerically zero";
    return out;
  }
  const Matrix at_r = bal.ti * at * bal.t;
  Matrix b_r = bal.ti * alg.B;
  const Matrix c_r = alg.C * bal.t;

  // Minimum-norm B correction restoring C_r (A~_r - I)^{-1} B_r M = I.
  const Eigen::FullPivLU<Matrix> lu(at_r - Matrix::Identity(target_n, target_n));
  if (!lu.isInvertible()) {
    out.diagnostic = "reduced iteration matrix has an eigenvalue at one";
    return out;
  }
  const Matrix k = c_r * lu.inverse();
  const Matrix m_inv = s.lower().matrix().inverse();
  const Matrix kp = k.completeOrthogonalDecomposition().pseudoInverse();
  b_r += kp * (m_inv - k * b_r);
  const Matrix a_r = at_r - b_r * s.lower().matrix() * c_r;
  AlgorithmParams reduced(a_r, b_r, c_r, s);
  if (!(reduced.constraint_residual() <= 1e-6)) {
    out.diagnostic = "B repair could not restore the fixed-point constraint";
    return out;
  }

  // Smallest certified rate by bisection, starting from the spectral radius.
  constexpr double kRhoCap = 1.0 - 1e-4;
  const double rho_min = spectral_radius(reduced.shifted());
  if (!(rho_min < kRhoCap)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "reduced iteration matrix has spectral radius %.6g", rho_min);
    out.diagnostic = buf;
    return out;
  }
  RateSearch search = find_certified_rate(reduced, s, rho_min,
                                          std::max(rho_min, res.rho_star) + 0.01, opts.rho_tol,
                                          1e-6, opts.solver);
  if (!search.ok()) {
    out.diagnostic = "reduced algorithm could not be certified for any rate below one";
    return out;
  }
  std::vector<BisectionStep> trace;
  for (const auto& [rho, ok] : search.trace) {
    trace.push_back({rho, ok ? SolveStatus::feasible : SolveStatus::infeasible, 0.0});
  }
  out.result = SynthesisResult{.alg = reduced,
                               .cert = *search.cert,
                               .rho_star = search.rho,
                               .bisection_trace = std::move(trace),
                               .lambda_policy_used = "grid"};
  return out;
}

}  // namespace gradsynth
