#pragma once

// Condition-number sweeps and single-run dispatch for the command line tool.

#include "gradsynth/config.hpp"

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace gradsynth {

struct SweepRow {
  double kappa = 0.0;
  std::string status;  // "ok" or "failed"
  double rho_synth = NAN;
  double rho_grad = NAN;
  double rho_tm = NAN;        // scalar mode only
  double rho_nesterov = NAN;  // scalar mode only
  std::string tag;            // alg_<tag>.txt / cert_<tag>.txt when written
  std::string message;
};

struct SweepOptions {
  std::string mode = "scalar";  // scalar | structured | constrained
  double m = 1.0;
  std::vector<double> kappas;
  int n = 0;
  Matrix a_eq = Matrix::Ones(1, 2);  // constrained mode
  SynthesisOptions synth;
  int jobs = 1;
  std::string out_dir;  // empty: no per-row files
};

/// Ten log-spaced condition numbers from 2 to 100.
std::vector<double> default_kappas();

/// Runs synthesize and gradient_baseline for every kappa (l = kappa m), in
/// parallel over `jobs` threads. Rows keep the input order.
std::vector<SweepRow> run_sweep(const SweepOptions& opts);

/// Header kappa,status,rho_synth,rho_grad,rho_tm,rho_nesterov; 12 significant
/// digits; absent values are empty fields.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Executes one configured command, writing results into c.out. Relative
/// certificate paths are resolved against base_dir. Returns the process exit
/// code: 0 success, 2 infeasible or rejected, 1 malformed input.
int run_single(const ExperimentConfig& c, const std::string& base_dir, std::ostream& log,
               std::ostream& err);

}  // namespace gradsynth
