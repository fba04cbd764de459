#pragma once

// Small dense primal-dual interior-point solver for strict LMI feasibility.

#include "gradsynth/lmi.hpp"

#include <string>

namespace gradsynth {

enum class SolveStatus { feasible, infeasible, inaccurate, iteration_limit };

std::string to_string(SolveStatus s);

struct SolveOptions {
  int max_iter = 200;
  double tol = 1e-8;
  /// Box |z_k| <= variable_bound on the coordinates left after eliminating
  /// the equality rows. Infeasibility is reported relative to this box.
  double variable_bound = 1e4;
  /// Keep iterating past the first strictly feasible iterate and return the
  /// point of (near) maximal slack.
  bool maximize_margin = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::inaccurate;
  Vector point;               // decision vector y, size n_vars
  double slack = 0.0;         // best t with every shifted block >= t I
  double min_block_eig = 0.0; // min over blocks of the sign-adjusted eigenvalue at point
  double eq_residual = 0.0;
  int iterations = 0;
  double solve_time = 0.0;    // seconds
  std::string message;

  bool ok() const { return status == SolveStatus::feasible; }
};

/// Finds y with every block strictly feasible by at least the problem margin.
/// A feasible status is only returned after re-evaluating the original blocks
/// (each at least margin/2) and the equality residual at the returned point.
SolveReport solve_feasibility(const LmiProblem& problem, const SolveOptions& opts = {});

}  // namespace gradsynth
