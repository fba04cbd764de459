#include "gradsynth/synth.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gradsynth {

std::string to_string(LambdaPolicy p) {
  switch (p) {
    case LambdaPolicy::rho_squared: return "rho_squared";
    case LambdaPolicy::zero: return "zero";
    case LambdaPolicy::fallback: return "fallback";
    case LambdaPolicy::grid: return "grid";
  }
  return "unknown";
}

LambdaPolicy parse_lambda_policy(const std::string& s) {
  for (auto p : {LambdaPolicy::rho_squared, LambdaPolicy::zero, LambdaPolicy::fallback,
                 LambdaPolicy::grid}) {
    if (s == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown lambda policy '" + s + "'");
}

std::vector<double> lambda_values(LambdaPolicy p, double rho) {
  const double r2 = rho * rho;
  switch (p) {
    case LambdaPolicy::rho_squared: return {r2};
    case LambdaPolicy::zero: return {0.0};
    case LambdaPolicy::fallback: return {r2, 0.0};
    case LambdaPolicy::grid: return {r2, 0.0, 0.5 * r2};
  }
  return {r2};
}

namespace {

std::string lambda_label(double lambda, double rho) {
  if (lambda == 0.0) return "zero";
  if (lambda == rho * rho) return "rho_squared";
  if (lambda == 0.5 * rho * rho) return "half_rho_squared";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", lambda);
  return buf;
}

}  // namespace

bool verify_certificate(const AlgorithmParams& alg, const SectorBounds& s, RateCertificate& cert) {
  cert.verified = false;
  const int n = alg.n();
  const int d = alg.d();
  if (cert.P.rows() != n + d || cert.P.cols() != n + d) return false;
  if (!(cert.rho >= 0.0 && cert.rho < 1.0)) return false;
  if (!(cert.lambda >= 0.0 && cert.lambda <= cert.rho * cert.rho * (1.0 + 1e-12))) return false;
  if (!cert.P.allFinite() || !std::isfinite(cert.r)) return false;

  const double sc = data_scale(s);
  const SectorBounds ss = s.scaled(sc);
  const AlgorithmParams scaled(alg.A, alg.B / sc, alg.C, ss);
  Matrix ps = 0.5 * (cert.P + cert.P.transpose());
  ps.topLeftCorner(n, n) *= sc;
  ps.bottomRightCorner(d, d) /= sc;
  const SymMatrix p(ps);
  cert.min_eig_p = min_eigenvalue(p);
  const Matrix f = analysis_matrix(scaled, ss, p, cert.r / sc, cert.rho, cert.lambda);
  cert.max_eig_analysis = max_eigenvalue(SymMatrix(f));
  cert.verified = cert.min_eig_p >= 0.5 * cert.margin && cert.max_eig_analysis <= -0.5 * cert.margin;
  return cert.verified;
}

CertifyOutcome certify(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                       LambdaPolicy policy, double constraint_tol, const SolveOptions& solver) {
  CertifyOutcome out = certify_lambdas(alg, s, rho, lambda_values(policy, rho), constraint_tol, solver);
  if (!out.ok() && !out.constraint_violation && out.diagnostic.empty()) {
    out.diagnostic = "no lambda in policy '" + to_string(policy) + "' gave a verified certificate";
  }
  return out;
}

CertifyOutcome certify_lambdas(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                               const std::vector<double>& lambdas, double constraint_tol,
                               const SolveOptions& solver) {
  CertifyOutcome out;
  if (alg.d() != s.dim()) throw DimensionError("certify: algorithm/bounds dimension mismatch");
  out.constraint_residual = alg.constraint_residual();
  if (!(out.constraint_residual <= constraint_tol)) {
    out.constraint_violation = true;
    char buf[160];
    std::snprintf(buf, sizeof buf, "fixed-point constraint residual %.3g exceeds %.3g",
                  out.constraint_residual, constraint_tol);
    out.diagnostic = buf;
    return out;
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    out.diagnostic = "rate outside [0, 1)";
    return out;
  }
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0 && lambda <= rho * rho)) {
      out.diagnostic = "lambda outside [0, rho^2]";
      return out;
    }
    const AnalysisLmi lmi = build_analysis_lmi(alg, s, rho, lambda);
    const SolveReport rep = solve_feasibility(lmi.problem, solver);
    out.attempts.emplace_back(lambda, rep.status);
    if (!rep.ok()) continue;
    RateCertificate cert;
    cert.P = lmi.certificate_p(rep.point).matrix();
    cert.r = lmi.certificate_r(rep.point);
    cert.lambda = lambda;
    cert.rho = rho;
    cert.margin = lmi.problem.strict_margin;
    if (verify_certificate(alg, s, cert)) {
      out.cert = cert;
      return out;
    }
    out.attempts.back().second = SolveStatus::inaccurate;
  }
  return out;
}

RateSearch find_certified_rate(const AlgorithmParams& alg, const SectorBounds& s, double lo,
                               double hi, double rho_tol, double constraint_tol,
                               const SolveOptions& solver) {
  constexpr double kRhoCap = 1.0 - 1e-4;
  RateSearch out;
  auto attempt = [&](double rho) {
    CertifyOutcome co = certify(alg, s, rho, LambdaPolicy::grid, constraint_tol, solver);
    out.trace.emplace_back(rho, co.ok());
    if (co.constraint_violation) out.diagnostic = co.diagnostic;
    return co;
  };
  hi = std::min(hi, kRhoCap);
  lo = std::max(0.0, lo);
  CertifyOutcome best = attempt(hi);
  if (!best.ok() && !best.constraint_violation && hi < kRhoCap) {
    hi = kRhoCap;
    best = attempt(hi);
  }
  if (!best.ok()) {
    if (out.diagnostic.empty()) out.diagnostic = "no certified rate below one";
    return out;
  }
  while (hi - lo > rho_tol) {
    const double mid = 0.5 * (lo + hi);
    CertifyOutcome co = attempt(mid);
    if (co.ok()) {
      hi = mid;
      best = std::move(co);
    } else {
      lo = mid;
    }
  }
  out.cert = best.cert;
  out.rho = hi;
  return out;
}

std::pair<AlgorithmParams, double> gradient_baseline(const SectorBounds& s) {
  if (!s.well_posed()) {
    throw std::invalid_argument("gradient_baseline: bounds are not well-posed: " + s.diagnostic());
  }
  const int d = s.dim();
  const Matrix sum = s.upper().matrix() + s.lower().matrix();
  const Matrix b = -2.0 * sum.inverse();
  AlgorithmParams alg(Matrix::Identity(d, d), b, Matrix::Identity(d, d), s);
  const double res = alg.constraint_residual();
  if (!(res <= 1e-8 * (1.0 + sum.norm() * sum.inverse().norm()))) {
    throw std::logic_error("gradient_baseline: fixed-point constraint residual too large");
  }
  return {alg, spectral_radius_pencil(s.lower(), s.upper())};
}

AlgorithmParams recover_params(const Matrix& p11, const Matrix& a_hat, const SectorBounds& s) {
  const int n = static_cast<int>(p11.rows());
  const int d = s.dim();
  if (p11.cols() != n || a_hat.rows() != n || a_hat.cols() != n) {
    throw DimensionError("recover_params: P11 and A^ must be n x n");
  }
  if (n < 3 * d) throw DimensionError("recover_params: need n >= 3d");
  const Matrix p11s = 0.5 * (p11 + p11.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(p11s, Eigen::EigenvaluesOnly);
  const double emin = es.eigenvalues()(0);
  const double emax = es.eigenvalues()(n - 1);
  if (!(emin > 0.0) || emax / emin > 1e12) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "P11 numerically singular or indefinite (eigenvalues %.3g..%.3g)",
                  emin, emax);
    throw RecoveryError(buf);
  }
  const Matrix j1 = selector(1, d, n);
  const Matrix j2 = selector(2, d, n);
  const Matrix m_inv = s.lower().matrix().inverse();
  const Matrix c = j2 * p11s;
  const Matrix b_hat = (a_hat - p11s) * j1.transpose() * m_inv;
  const Eigen::LLT<Matrix> llt(p11s);
  const Matrix b = llt.solve(b_hat);
  const Matrix a = llt.solve(a_hat) - b * s.lower().matrix() * c;
  const double cj = (c * j1.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(cj <= 1e-8)) throw RecoveryError("recover_params: C J1^T differs from the identity");
  AlgorithmParams alg(a, b, c, s);
  const double res = alg.constraint_residual();
  if (!(res <= 1e-6)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "recover_params: fixed-point constraint residual %.3g", res);
    throw RecoveryError(buf);
  }
  return alg;
}

AlgorithmParams recover_params(const SynthesisLmi& lmi, const Vector& y) {
  const AlgorithmParams scaled =
      recover_params(lmi.p11.evaluate(y), lmi.a_hat.evaluate(y), lmi.scaled_bounds);
  return AlgorithmParams(scaled.A, scaled.B * lmi.scale, scaled.C, lmi.bounds);
}

namespace {

struct SynthAttempt {
  SolveStatus status = SolveStatus::infeasible;
  double lambda = 0.0;
  std::optional<SynthesisLmi> lmi;
  Vector point;
};

SynthAttempt solve_synthesis(const SectorBounds& s, int n, double rho, LambdaPolicy policy,
                             const SolveOptions& solver) {
  SynthAttempt out;
  for (double lambda : lambda_values(policy, rho)) {
    SynthesisLmi lmi = build_synthesis_lmi(s, n, rho, lambda);
    const SolveReport rep = solve_feasibility(lmi.problem, solver);
    out.status = rep.status;
    out.lambda = lambda;
    if (rep.ok()) {
      out.point = rep.point;
      out.lmi.emplace(std::move(lmi));
      return out;
    }
  }
  return out;
}

std::optional<AlgorithmParams> try_recover(const SynthAttempt& at) {
  try {
    return recover_params(*at.lmi, at.point);
  } catch (const RecoveryError&) {
    return std::nullopt;
  }
}

}  // namespace

SynthesisResult synthesize(const SectorBounds& s, int n, const SynthesisOptions& opts) {
  if (!s.well_posed()) {
    throw std::invalid_argument("synthesize: bounds are not well-posed: " + s.diagnostic());
  }
  const int d = s.dim();
  if (n <= 0) n = 3 * d;
  if (n < 3 * d) throw std::invalid_argument("synthesize: need n >= 3d");
  constexpr double kRhoCap = 1.0 - 1e-4;
  const double rho_grad = spectral_radius_pencil(s.lower(), s.upper());

  std::vector<BisectionStep> trace;
  double hi = opts.rho_upper ? std::min(*opts.rho_upper, kRhoCap)
                             : std::min(rho_grad + 0.05, kRhoCap);
  SynthAttempt best = solve_synthesis(s, n, hi, opts.lambda_policy, opts.solver);
  trace.push_back({hi, best.status, best.lambda});
  while (best.status != SolveStatus::feasible) {
    if (hi >= kRhoCap) {
      throw std::runtime_error("synthesize: no feasible rate below one (last status " +
                               to_string(best.status) + ")");
    }
    hi = std::min(kRhoCap, 1.0 - 0.5 * (1.0 - hi));
    best = solve_synthesis(s, n, hi, opts.lambda_policy, opts.solver);
    trace.push_back({hi, best.status, best.lambda});
  }
  double lo = 0.0;
  while (hi - lo > opts.rho_tol) {
    const double mid = 0.5 * (lo + hi);
    SynthAttempt at = solve_synthesis(s, n, mid, opts.lambda_policy, opts.solver);
    trace.push_back({mid, at.status, at.lambda});
    if (at.status == SolveStatus::feasible) {
      hi = mid;
      best = std::move(at);
    } else {
      lo = mid;
    }
  }

  // Recover at the smallest feasible rate and move to balanced coordinates
  // (the raw realization leaves one state scaling free and is often badly
  // scaled). A max-slack solve is the fallback when the first point fails.
  std::optional<AlgorithmParams> alg;
  std::optional<RateCertificate> cert;
  auto finish = [&](const SynthAttempt& at) {
    auto raw = try_recover(at);
    if (!raw) return;
    std::vector<AlgorithmParams> candidates;
    if (auto bal = balanced_realization(*raw)) candidates.push_back(*bal);
    candidates.push_back(*raw);
    if (!alg) alg = candidates.front();
    for (const auto& cand : candidates) {
      const CertifyOutcome co = certify(cand, s, hi, LambdaPolicy::grid, 1e-6, opts.solver);
      if (co.ok()) {
        alg = cand;
        cert = co.cert;
        return;
      }
    }
  };
  finish(best);
  if (!cert) {
    SolveOptions centered = opts.solver;
    centered.maximize_margin = true;
    const SynthAttempt at = solve_synthesis(s, n, hi, opts.lambda_policy, centered);
    if (at.status == SolveStatus::feasible) finish(at);
  }
  if (!alg) throw std::runtime_error("synthesize: parameter recovery failed at rho = " + std::to_string(hi));
  double rho_star = hi;
  for (int bump = 0; !cert && bump < 5; ++bump) {
    rho_star = std::min(kRhoCap, rho_star + opts.rho_tol);
    const CertifyOutcome co = certify(*alg, s, rho_star, LambdaPolicy::grid, 1e-6, opts.solver);
    if (co.ok()) cert = co.cert;
  }
  if (!cert) {
    throw std::runtime_error("synthesize: recovered algorithm failed re-certification near rho = " +
                             std::to_string(hi));
  }
  return SynthesisResult{.alg = *alg,
                         .cert = *cert,
                         .rho_star = rho_star,
                         .bisection_trace = std::move(trace),
                         .lambda_policy_used = lambda_label(best.lambda, hi)};
}

SynthesisResult synthesize_constrained(const SectorBounds& f_bounds, const Matrix& a_eq,
                                       const Vector& b_eq, int n, const SynthesisOptions& opts) {
  if (a_eq.rows() != b_eq.size()) throw DimensionError("synthesize_constrained: A_eq/b_eq mismatch");
  if (a_eq.rows() > 0 && a_eq.cols() != f_bounds.dim()) {
    throw DimensionError("synthesize_constrained: A_eq has wrong column count");
  }
  if (a_eq.rows() == 0) return synthesize(f_bounds, n, opts);
  return synthesize(lagrangian_bounds(f_bounds, a_eq), n, opts);
}

}  // namespace gradsynth
