#include "gradsynth/synth.hpp"
#include "gradsynth/verify.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace gradsynth;
using namespace testing_support;

namespace {

double tm_rate(double kappa) { return 1.0 - std::sqrt(1.0 / kappa); }
double lower_bound(double kappa) { return (std::sqrt(kappa) - 1) / (std::sqrt(kappa) + 1); }

Eigen::MatrixXcd transfer(const AlgorithmParams& a, std::complex<double> z) {
  const int n = a.n();
  const Eigen::MatrixXcd zi = z * Eigen::MatrixXcd::Identity(n, n) - a.shifted().cast<std::complex<double>>();
  return a.C.cast<std::complex<double>>() * zi.partialPivLu().solve(a.B.cast<std::complex<double>>());
}

const SynthesisResult& s15() {
  static const SynthesisResult r = synthesize(SectorBounds::scalar(1, 15), 3);
  return r;
}

}  // namespace

TEST(LambdaPolicy, NamesAndValues) {
  for (auto p : {LambdaPolicy::rho_squared, LambdaPolicy::zero, LambdaPolicy::fallback, LambdaPolicy::grid})
    EXPECT_EQ(parse_lambda_policy(to_string(p)), p);
  EXPECT_THROW(parse_lambda_policy("sometimes"), std::invalid_argument);
  const auto g = lambda_values(LambdaPolicy::grid, 0.5);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 0.25);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.125);
}

TEST(GradientBaseline, ScalarFifteen) {
  const auto [alg, rho] = gradient_baseline(SectorBounds::scalar(1, 15));
  EXPECT_DOUBLE_EQ(alg.B(0, 0), -0.125);
  EXPECT_DOUBLE_EQ(alg.A(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(alg.C(0, 0), 1.0);
  EXPECT_NEAR(rho, 0.875, 1e-15);
  EXPECT_LT(alg.constraint_residual(), 1e-12);
}

TEST(GradientBaseline, DegenerateSectorIsNewtonStep) {
  const auto [alg, rho] = gradient_baseline(SectorBounds::scalar(4, 4, 2));
  EXPECT_LT((alg.B + 0.25 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_NEAR(rho, 0.0, 1e-15);
}

TEST(GradientBaseline, StructuredPair) {
  const SectorBounds s = SectorBounds::structured(1, 10);
  const auto [alg, rho] = gradient_baseline(s);
  const Matrix sum = s.lower().matrix() + s.upper().matrix();
  const Matrix diff = s.upper().matrix() - s.lower().matrix();
  EXPECT_NEAR(rho, dense_spectral_radius(sum.inverse() * diff), 1e-12);
  EXPECT_LT(rho, lower_bound(10));
  EXPECT_LT((alg.B + 2 * sum.inverse()).norm(), 1e-14);
}

TEST(GradientBaseline, IllPosedRejected) {
  Vector lo(2), hi(2);
  lo << -1, 1;
  hi << 1, 2;
  EXPECT_THROW(gradient_baseline(SectorBounds(SymMatrix::diagonal(lo), SymMatrix::diagonal(hi))),
               std::invalid_argument);
}

TEST(Certify, GradientBaselineAboveRate) {
  const SectorBounds s = SectorBounds::scalar(1, 3);
  const AlgorithmParams alg = gradient_baseline(s).first;
  const CertifyOutcome zero = certify_lambdas(alg, s, 0.55, {0.0});
  ASSERT_TRUE(zero.ok()) << zero.diagnostic;
  EXPECT_EQ(zero.cert->lambda, 0.0);
  EXPECT_TRUE(zero.cert->verified);
  const CertifyOutcome grid = certify(alg, s, 0.55);
  ASSERT_TRUE(grid.ok());
  EXPECT_GE(grid.attempts.size(), 1u);
  EXPECT_EQ(grid.cert->rho, 0.55);
  EXPECT_LE(grid.cert->lambda, 0.55 * 0.55);
}

TEST(Certify, ReportsEveryLambdaWhenInfeasible) {
  const SectorBounds s = SectorBounds::scalar(1, 3);
  const CertifyOutcome out = certify(gradient_baseline(s).first, s, 0.3);
  EXPECT_FALSE(out.ok());
  EXPECT_EQ(out.attempts.size(), 3u);
  EXPECT_FALSE(out.constraint_violation);
}

TEST(Certify, ConstraintViolationReportedSeparately) {
  const SectorBounds s = SectorBounds::scalar(1, 3);
  AlgorithmParams alg = gradient_baseline(s).first;
  alg.A(0, 0) = 0.9;  // moves the fixed point off the critical point
  const CertifyOutcome out = certify(alg, s, 0.9);
  EXPECT_FALSE(out.ok());
  EXPECT_TRUE(out.constraint_violation);
  EXPECT_GT(out.constraint_residual, 1e-6);
  EXPECT_TRUE(out.attempts.empty());
}

TEST(Certify, TamperedCertificateRejected) {
  const SectorBounds s = SectorBounds::scalar(1, 3);
  const AlgorithmParams alg = gradient_baseline(s).first;
  RateCertificate cert = *certify(alg, s, 0.55).cert;
  EXPECT_TRUE(verify_certificate(alg, s, cert));
  cert.rho = 0.3;
  EXPECT_FALSE(verify_certificate(alg, s, cert));
  EXPECT_FALSE(cert.verified);
}

TEST(RecoverParams, IdentityAhatRejected) {
  Matrix p11(3, 3);
  p11 << 2, 1, 0, 1, 2, 0, 0, 0, 1;
  EXPECT_THROW(recover_params(p11, p11, SectorBounds::scalar(1, 15)), RecoveryError);
}

TEST(RecoverParams, IllConditionedRejected) {
  Matrix p11 = Matrix::Identity(3, 3);
  p11(1, 0) = p11(0, 1) = 1.0;
  p11(2, 2) = 1e-14;
  EXPECT_THROW(recover_params(p11, 0.5 * p11, SectorBounds::scalar(1, 15)), RecoveryError);
}

TEST(Synthesize, ScalarFifteenMatchesTripleMomentum) {
  const SynthesisResult& r = s15();
  EXPECT_LE(r.rho_star, tm_rate(15) + 2e-3);
  EXPECT_GE(r.rho_star, lower_bound(15) - 1e-3);
  EXPECT_EQ(r.cert.rho, r.rho_star);
  EXPECT_TRUE(r.cert.verified);
  EXPECT_LT(dense_spectral_radius(r.alg.shifted()), r.rho_star);
  EXPECT_LE(r.alg.constraint_residual(), 1e-6);
  EXPECT_EQ(r.alg.n(), 3);
  EXPECT_FALSE(r.lambda_policy_used.empty());
}

TEST(Synthesize, CertifiesAtOwnRateAndNotBelowLowerBound) {
  const SynthesisResult& r = s15();
  const SectorBounds s = SectorBounds::scalar(1, 15);
  EXPECT_TRUE(certify(r.alg, s, r.rho_star).ok());
  EXPECT_FALSE(certify(r.alg, s, lower_bound(15) - 1e-2).ok());
}

TEST(Synthesize, BisectionTraceIsMonotone) {
  auto trace = s15().bisection_trace;
  ASSERT_FALSE(trace.empty());
  std::sort(trace.begin(), trace.end(), [](const auto& a, const auto& b) { return a.rho < b.rho; });
  int transitions = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const bool prev = trace[i - 1].status == SolveStatus::feasible;
    const bool cur = trace[i].status == SolveStatus::feasible;
    if (prev != cur) ++transitions;
    EXPECT_FALSE(prev && !cur) << "feasible at " << trace[i - 1].rho << " but not at " << trace[i].rho;
  }
  EXPECT_LE(transitions, 1);
}

TEST(Synthesize, DegenerateSectorNearZero) {
  SynthesisOptions o;
  const SynthesisResult r = synthesize(SectorBounds::scalar(1, 1), 3, o);
  EXPECT_LE(r.rho_star, o.rho_tol + 1e-3);
  // The single quadratic of the class is solved.
  const SectorBounds s = SectorBounds::scalar(1, 1);
  const TrajectoryReport rep = simulate(r.alg, make_quadratic(s, 0.0, Vector::Constant(1, 2.0)), Vector::Ones(3), 200);
  EXPECT_TRUE(rep.converged);
}

TEST(Synthesize, ScalingCovariance) {
  SynthesisOptions o;
  const double base = s15().rho_star;
  for (double c : {0.01, 40.0}) {
    const SynthesisResult r = synthesize(SectorBounds::scalar(c, 15 * c), 3, o);
    EXPECT_NEAR(r.rho_star, base, 2 * o.rho_tol) << "scale " << c;
  }
}

TEST(Synthesize, StructuredBeatsUnstructuredBound) {
  const SectorBounds s = SectorBounds::structured(1, 10);
  SynthesisOptions o;
  const SynthesisResult r = synthesize(s, -1, o);
  EXPECT_EQ(r.alg.n(), 6);
  EXPECT_LE(r.rho_star, gradient_baseline(s).second + o.rho_tol);
  EXPECT_LT(r.rho_star, lower_bound(10));
}

TEST(Synthesize, RejectsTooFewStates) {
  EXPECT_THROW(synthesize(SectorBounds::scalar(1, 15, 2), 5), std::invalid_argument);
}

TEST(SynthesizeConstrained, NoConstraintRowsMatchesPlainSynthesis) {
  const SectorBounds s = SectorBounds::scalar(1, 15);
  const SynthesisResult r = synthesize_constrained(s, Matrix(0, 1), Vector(0), 3);
  EXPECT_EQ(r.rho_star, s15().rho_star);
}

TEST(SynthesizeConstrained, EqualityConstrainedExample) {
  Matrix a(1, 2);
  a << 1, 1;
  const SynthesisResult r = synthesize_constrained(SectorBounds::scalar(1, 15, 2), a, Vector::Zero(1), 9);
  EXPECT_NEAR(r.rho_star, s15().rho_star, 5e-3);
  EXPECT_LE(r.rho_star, 0.875);
  EXPECT_EQ(r.alg.d(), 3);
  EXPECT_TRUE(r.cert.verified);
}

TEST(BalancedRealization, PreservesTransferFunction) {
  const AlgorithmParams& alg = s15().alg;
  Vector hsv;
  const auto bal = balanced_realization(alg, &hsv);
  ASSERT_TRUE(bal.has_value());
  EXPECT_EQ(hsv.size(), 3);
  for (int i = 1; i < hsv.size(); ++i) EXPECT_GE(hsv(i - 1), hsv(i));
  for (std::complex<double> z : {std::complex<double>(1.5, 0), std::complex<double>(0, -2), std::complex<double>(-0.9, 0.9)}) {
    EXPECT_LT((transfer(alg, z) - transfer(*bal, z)).norm(), 1e-8);
  }
  const auto [wc, wo] = gramians(bal->shifted(), bal->B, bal->C);
  EXPECT_LT((wc - wo).norm(), 1e-8 * wc.norm());
  EXPECT_LT((wc - Matrix(wc.diagonal().asDiagonal())).norm(), 1e-8 * wc.norm());
}

TEST(ReduceOrder, TargetEqualsStateCountIsIdentity) {
  const ReductionOutcome out = reduce_order(s15(), 3);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.result->rho_star, s15().rho_star);
  EXPECT_EQ(out.result->alg.A, s15().alg.A);
}

TEST(ReduceOrder, InvalidTargetsThrow) {
  EXPECT_THROW(reduce_order(s15(), 0), std::invalid_argument);
  EXPECT_THROW(reduce_order(s15(), 4), std::invalid_argument);
}

TEST(ReduceOrder, DownToDecisionDimensionHandled) {
  const ReductionOutcome out = reduce_order(s15(), 1);
  EXPECT_EQ(out.hankel_singular_values.size(), 3);
  if (out.ok()) {
    // A one-state method for S(1,15) cannot beat the gradient rate.
    EXPECT_GE(out.result->rho_star, 0.875 - 1e-3);
    EXPECT_TRUE(out.result->cert.verified);
    EXPECT_LE(out.result->alg.constraint_residual(), 1e-6);
  } else {
    EXPECT_FALSE(out.diagnostic.empty());
  }
}

TEST(FindCertifiedRate, GradientBaselineTight) {
  const SectorBounds s = SectorBounds::scalar(1, 9);
  const auto [alg, rho] = gradient_baseline(s);
  const RateSearch rs = find_certified_rate(alg, s, 0.0, 0.99, 1e-4);
  ASSERT_TRUE(rs.ok());
  EXPECT_GE(rs.rho, rho - 1e-6);
  EXPECT_LE(rs.rho, rho + 2e-4);
}
