#pragma once

// Independent checks of designed algorithms: simulation, Lyapunov decrease at
// sampled states and the frequency-domain inequality on a circle.

#include "gradsynth/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gradsynth {

struct TrajectoryReport {
  std::vector<double> residual_norms;  // |x_k - x*|, k = 0..K
  double fitted_rate = 0.0;
  int fit_start = 0;
  int fit_end = 0;
  double c_estimate = 0.0;  // max_k r_k / (r_0 rate^k) for the fitted rate
  bool converged = false;
  bool diverged = false;
  Vector x_star;
};

/// Runs x+ = A x + B grad f(C x) from x0 for at most k_max steps. x* is lifted
/// from f.critical_point when known, otherwise taken as the terminal iterate.
/// Stops at residual <= 1e-10 r_0 (converged) or > 1e12 r_0 (diverged).
/// The rate is exp of the least-squares slope of log r_k on [0.2 K, K].
TrajectoryReport simulate(const AlgorithmParams& alg, const Objective& f, const Vector& x0,
                          int k_max = 5000);

/// Smallest c with r_k <= c rho^k r_0 along the recorded trajectory.
double transient_constant(const TrajectoryReport& rep, double rho);

/// CSV with header "k,residual", 12 significant digits.
void write_trajectory_csv(std::ostream& os, const TrajectoryReport& rep);

struct LyapunovReport {
  bool decrease_ok = true;
  bool bounds_ok = true;
  int points = 0;
  double worst_decrease = -1e300;  // max of V(x+) - rho^2 V(x) - tol
  double worst_lower = -1e300;     // max of alpha |x|^2 - V(x)
  double worst_upper = -1e300;     // max of V(x) - beta |x|^2
  double alpha = 0.0;
  double beta = 0.0;

  bool pass() const { return decrease_ok && bounds_ok; }
};

/// V(x) = [x; w]^T P [x; w] + g(Cx) - g(0) - w^T (L-M)^+ w / 2 with w = grad g(Cx),
/// evaluated along x+ = A~ x + B w. g must lie in S(0, L - M) with grad g(0) = 0.
/// Points are uniform in the ball of the given radius.
LyapunovReport lyapunov_decrease_check(const AlgorithmParams& alg, const SectorBounds& s,
                                       const RateCertificate& cert, const Objective& g,
                                       int n_points = 1000, std::uint64_t seed = 1,
                                       double radius = 10.0);

/// V at a single state (shifted coordinates).
double lyapunov_value(const AlgorithmParams& alg, const SectorBounds& s, const Matrix& p,
                      const Objective& g, const Vector& x);

struct FdiReport {
  double max_eig_over_circle = 0.0;
  double worst_omega = 0.0;
  int samples = 0;
};

/// Samples Y + Y^* - 2I with Y = lambda z^{-1} I + (l - m)(1 - lambda z^{-1}) G(z),
/// G(z) = C (zI - A~)^{-1} B, at z = rho e^{i w}, w = 2 pi k / n_freq.
/// Throws std::invalid_argument if rho <= rho(A~).
FdiReport fdi_sample(const AlgorithmParams& alg, double m, double l, double rho, double lambda,
                     int n_freq = 256);

/// As above with (m, l) read from alg.bounds; throws std::invalid_argument for
/// matrix sectors.
FdiReport fdi_sample(const AlgorithmParams& alg, double rho, double lambda, int n_freq = 256);

}  // namespace gradsynth
