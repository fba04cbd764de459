#include "gradsynth/config.hpp"
#include "gradsynth/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace gradsynth;

TEST(Config, ParsesScalarSector) {
  const ExperimentConfig c = parse_config("command = synth\nsector = scalar\nm = 2\nl = 30\ndim = 2\n");
  EXPECT_EQ(c.command, Command::synth);
  EXPECT_EQ(c.m, 2.0);
  EXPECT_EQ(build_sector(c).upper().matrix(), 30.0 * Matrix::Identity(2, 2));
}

TEST(Config, MatrixSyntax) {
  const Matrix m = parse_matrix("[1 2; 3 4.5e-1]");
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(1, 1), 0.45);
  EXPECT_EQ(parse_matrix(format_matrix(m)), m);
  EXPECT_THROW(parse_matrix("[1 2; 3]"), ConfigError);
  EXPECT_THROW(parse_matrix("1 2"), ConfigError);
  EXPECT_EQ(parse_vector("[1 2 3]").size(), 3);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("sector = matrix\nM = [1 2; 0 1]\nL = [3 0; 0 3]\n"), ConfigError);
  EXPECT_THROW(parse_config("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_config("m = 1\nm = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("m one\n"), ConfigError);
  EXPECT_THROW(parse_config("l = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("lambda_policy = often\n"), ConfigError);
  EXPECT_THROW(parse_config("kappas = [0.5 2]\n"), ConfigError);
}

TEST(Config, CommentsAndBlankLines) {
  const ExperimentConfig c = parse_config("# design run\n\nl = 20  # upper\n");
  EXPECT_EQ(c.l, 20.0);
}

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.command = Command::analyze;
  c.sector = SectorKind::lagrangian;
  c.m = 0.1;
  c.l = 1.0 / 3;
  c.dim = 2;
  c.a_eq = Matrix::Ones(1, 2);
  c.b_eq = Vector::Constant(1, 0.7);
  c.A = Matrix::Random(3, 3);
  c.B = Matrix::Random(3, 3);
  c.C = Matrix::Random(3, 3);
  c.rho = 0.123456789012345678;
  c.lambda = 0.01;
  c.seed = 42;
  c.kappas = {2.5, 10};
  c.tag = "x1";
  c.cert = "cert_x1.txt";
  c.lambda_policy = LambdaPolicy::grid;
  const ExperimentConfig back = parse_config(emit_config(c));
  EXPECT_TRUE(same_config(c, back));
  EXPECT_EQ(emit_config(back), emit_config(c));
  EXPECT_TRUE(same_config(ExperimentConfig{}, parse_config(emit_config(ExperimentConfig{}))));
}

TEST(Config, CertificateRoundTrip) {
  RateCertificate cert;
  cert.P = Matrix::Identity(2, 2) * 0.3;
  cert.P(0, 1) = cert.P(1, 0) = 1e-9;
  cert.r = -2.5;
  cert.lambda = 0.25;
  cert.rho = 0.5;
  cert.margin = 1e-7;
  cert.verified = true;
  const RateCertificate back = parse_certificate(emit_certificate(cert));
  EXPECT_EQ(back.P, cert.P);
  EXPECT_EQ(back.r, cert.r);
  EXPECT_EQ(back.rho, cert.rho);
  EXPECT_EQ(back.lambda, cert.lambda);
  EXPECT_EQ(back.verified, true);
}

TEST(Config, AlgorithmFileIsAnalyzeConfig) {
  ExperimentConfig src;
  src.m = 1;
  src.l = 3;
  const SectorBounds s = build_sector(src);
  const AlgorithmParams alg = gradient_baseline(s).first;
  const ExperimentConfig c = parse_config(emit_algorithm(src, alg, 0.55, 0.0, "cert_run.txt"));
  EXPECT_EQ(c.command, Command::analyze);
  EXPECT_EQ(*c.B, alg.B);
  EXPECT_EQ(c.cert, "cert_run.txt");
  EXPECT_EQ(*c.rho, 0.55);
}

TEST(Config, StructuredAndLagrangianSectors) {
  const SectorBounds st = build_sector(parse_config("sector = structured\nm = 1\nl = 10\n"));
  EXPECT_EQ(st.dim(), 2);
  const ExperimentConfig lc = parse_config("sector = lagrangian\nm = 1\nl = 15\ndim = 2\nA_eq = [1 1]\n");
  EXPECT_EQ(build_sector(lc).dim(), 3);
  EXPECT_EQ(build_base_sector(lc).dim(), 2);
  EXPECT_THROW(build_sector(parse_config("sector = lagrangian\nm = 1\nl = 15\n")), ConfigError);
}

TEST(Sweep, DefaultGrid) {
  const auto k = default_kappas();
  ASSERT_EQ(k.size(), 10u);
  EXPECT_NEAR(k.front(), 2.0, 1e-12);
  EXPECT_NEAR(k.back(), 100.0, 1e-9);
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_NEAR(k[i] / k[i - 1], k[1] / k[0], 1e-9);
}

TEST(Sweep, ScalarRowsAndStableCsv) {
  SweepOptions o;
  o.kappas = {2, 10};
  o.jobs = 2;
  const auto rows = run_sweep(o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.message;
    EXPECT_NEAR(r.rho_synth - r.rho_tm, 0.0, 2e-3);
    EXPECT_NEAR(r.rho_grad, (r.kappa - 1) / (r.kappa + 1), 1e-12);
    EXPECT_NEAR(r.rho_nesterov, (std::sqrt(r.kappa) - 1) / (std::sqrt(r.kappa) + 1), 1e-12);
  }
  std::ostringstream a, b;
  write_sweep_csv(a, rows);
  write_sweep_csv(b, run_sweep(o));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "kappa,status,rho_synth,rho_grad,rho_tm,rho_nesterov");
}

TEST(Sweep, StructuredLeavesReferenceColumnsEmpty) {
  SweepOptions o;
  o.mode = "structured";
  o.kappas = {10};
  const auto rows = run_sweep(o);
  ASSERT_EQ(rows[0].status, "ok") << rows[0].message;
  EXPECT_TRUE(std::isnan(rows[0].rho_tm));
  EXPECT_LE(rows[0].rho_synth, rows[0].rho_grad + o.synth.rho_tol);
  EXPECT_LT(rows[0].rho_grad, (std::sqrt(10.0) - 1) / (std::sqrt(10.0) + 1));
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_NE(os.str().find(",,\n"), std::string::npos);
}

TEST(Sweep, FailuresBecomeRows) {
  SweepOptions o;
  o.kappas = {4};
  o.n = 2;  // fewer states than the synthesis allows
  const auto rows = run_sweep(o);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "failed");
  EXPECT_FALSE(rows[0].message.empty());
  o.kappas = {0.5};
  EXPECT_THROW(run_sweep(o), std::invalid_argument);
}
