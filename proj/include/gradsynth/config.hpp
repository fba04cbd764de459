#pragma once

// Flat "key = value" experiment configuration and text serialization of
// algorithms and certificates. Matrices are written row-major in brackets,
// rows separated by ';': M = [1 0; 0 2].

#include "gradsynth/synth.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gradsynth {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { synth, analyze, simulate, sweep, constrained, reduce };
enum class SectorKind { scalar, matrix, structured, lagrangian };

std::string to_string(Command c);
std::string to_string(SectorKind k);
Command parse_command(const std::string& s);

struct ExperimentConfig {
  Command command = Command::synth;

  // Sector: scalar uses (m, l, dim); matrix uses (M, L); structured uses (m, l);
  // lagrangian wraps the scalar or matrix base with (A_eq, b_eq).
  SectorKind sector = SectorKind::scalar;
  double m = 1.0;
  double l = 10.0;
  int dim = 1;
  std::optional<Matrix> M;
  std::optional<Matrix> L;
  std::optional<Matrix> a_eq;
  std::optional<Vector> b_eq;

  int n = 0;  // 0 selects 3d
  double rho_tol = 1e-4;
  LambdaPolicy lambda_policy = LambdaPolicy::fallback;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string tag = "run";
  int jobs = 1;

  // analyze / simulate / reduce inputs
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  std::optional<Matrix> C;
  std::optional<double> rho;
  std::optional<double> lambda;
  double constraint_tol = 1e-6;
  std::string cert;  // certificate file to verify instead of solving

  std::string objective = "quadratic";  // quadratic | logcosh
  double theta = 0.5;
  std::optional<Vector> shift;
  std::optional<Vector> x0;
  int k_max = 5000;

  std::string mode = "scalar";  // sweep mode: scalar | structured | constrained
  std::vector<double> kappas;

  int target_n = 0;
};

/// Throws ConfigError on unknown or duplicate keys, malformed values and
/// non-symmetric M or L.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Emits every field; parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const ExperimentConfig& c);
bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

/// Bounds described by the config (Lagrangian bounds for the lagrangian kind).
SectorBounds build_sector(const ExperimentConfig& c);
/// Bounds before the Lagrangian lift (equal to build_sector otherwise).
SectorBounds build_base_sector(const ExperimentConfig& c);

/// "[a b; c d]" with %.17g entries.
std::string format_matrix(const Matrix& m, int digits = 17);
std::string format_vector(const Vector& v, int digits = 17);
std::string format_double(double v, int digits = 17);
Matrix parse_matrix(const std::string& s);
Vector parse_vector(const std::string& s);

/// Splits "key = value" lines; '#' starts a comment. Throws ConfigError on
/// lines without '=' and on duplicate keys.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

/// Algorithm file: a valid analyze config for the sector of `c` with A, B, C,
/// rho and lambda, plus `cert = <cert_file>` when non-empty.
std::string emit_algorithm(const ExperimentConfig& sector_source, const AlgorithmParams& alg,
                           double rho, double lambda, const std::string& cert_file);
std::string emit_certificate(const RateCertificate& cert);
RateCertificate parse_certificate(const std::string& text);

}  // namespace gradsynth
