#include "gradsynth/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace gradsynth {

namespace {

void fit_rate(TrajectoryReport& rep, int k_end) {
  const auto& r = rep.residual_norms;
  int k0 = static_cast<int>(std::floor(0.2 * k_end));
  if (k_end - k0 < 2) k0 = 0;
  rep.fit_start = k0;
  rep.fit_end = k_end;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = k0; k <= k_end; ++k) {
    if (!(r[k] > 0.0)) continue;
    const double y = std::log(r[k]);
    sx += k;
    sy += y;
    sxx += double(k) * k;
    sxy += k * y;
    ++cnt;
  }
  if (cnt < 2) {
    rep.fitted_rate = 0.0;
    return;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  rep.fitted_rate = std::exp(slope);
}

}  // namespace

TrajectoryReport simulate(const AlgorithmParams& alg, const Objective& f, const Vector& x0,
                          int k_max) {
  if (x0.size() != alg.n()) throw DimensionError("simulate: x0 has wrong size");
  if (f.dim != alg.d()) throw DimensionError("simulate: objective dimension differs from d");
  TrajectoryReport rep;
  std::vector<Vector> xs;
  Vector x = x0;
  xs.push_back(x);
  const bool known = f.critical_point.has_value();
  if (known) rep.x_star = alg.lift_fixed_point(*f.critical_point);

  if (!known) {
    // Run to the end (or until stationary) and treat the last iterate as x*.
    for (int k = 0; k < k_max; ++k) {
      Vector xn = alg.A * x + alg.B * f.grad(alg.C * x);
      const bool still = (xn - x).norm() <= 1e-15 * (1.0 + x.norm());
      x = std::move(xn);
      xs.push_back(x);
      if (!x.allFinite() || still) break;
    }
    rep.x_star = xs.back();
  }

  const double r0 = (x0 - rep.x_star).norm();
  rep.residual_norms.push_back(r0);
  if (!(r0 > 0.0)) {
    rep.converged = true;
    return rep;
  }
  x = x0;
  for (int k = 1; k <= k_max; ++k) {
    if (known) {
      x = alg.A * x + alg.B * f.grad(alg.C * x);
    } else {
      if (k >= static_cast<int>(xs.size())) break;
      x = xs[k];
    }
    const double rk = (x - rep.x_star).norm();
    if (!std::isfinite(rk) || rk > 1e12 * r0) {
      rep.residual_norms.push_back(std::isfinite(rk) ? rk : INFINITY);
      rep.diverged = true;
      return rep;
    }
    rep.residual_norms.push_back(rk);
    if (rk <= 1e-10 * r0) {
      rep.converged = true;
      break;
    }
  }
  const int k_end = static_cast<int>(rep.residual_norms.size()) - 1;
  fit_rate(rep, k_end);
  if (rep.fitted_rate > 0.0) rep.c_estimate = transient_constant(rep, rep.fitted_rate);
  return rep;
}

double transient_constant(const TrajectoryReport& rep, double rho) {
  const auto& r = rep.residual_norms;
  if (r.empty() || !(r[0] > 0.0)) return 0.0;
  double c = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    c = std::max(c, r[k] / (r[0] * std::pow(rho, static_cast<double>(k))));
  }
  return c;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryReport& rep) {
  os << "k,residual\n";
  char buf[64];
  for (std::size_t k = 0; k < rep.residual_norms.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g\n", k, rep.residual_norms[k]);
    os << buf;
  }
}

double lyapunov_value(const AlgorithmParams& alg, const SectorBounds& s, const Matrix& p,
                      const Objective& g, const Vector& x) {
  const Vector z = alg.C * x;
  const Vector w = g.grad(z);
  Vector xw(x.size() + w.size());
  xw << x, w;
  const Vector zero = Vector::Zero(z.size());
  return xw.dot(p * xw) + g.eval(z) - g.eval(zero) - 0.5 * w.dot(s.gap_pinv().matrix() * w);
}

LyapunovReport lyapunov_decrease_check(const AlgorithmParams& alg, const SectorBounds& s,
                                       const RateCertificate& cert, const Objective& g,
                                       int n_points, std::uint64_t seed, double radius) {
  LyapunovReport rep;
  const int n = alg.n();
  const Matrix at = alg.shifted();
  const SymMatrix p(cert.P);
  const double cn = Eigen::JacobiSVD<Matrix>(alg.C).singularValues()(0);
  const double ln = s.gap().norm();
  rep.alpha = min_eigenvalue(p);
  rep.beta = max_eigenvalue(p) * (1.0 + ln * ln * cn * cn) + 0.5 * ln * cn * cn;
  const double rho2 = cert.rho * cert.rho;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n_points; ++i) {
    Vector x(n);
    for (int j = 0; j < n; ++j) x(j) = normal(rng);
    x *= radius * std::pow(unif(rng), 1.0 / n) / std::max(x.norm(), 1e-300);
    const Vector xp = at * x + alg.B * g.grad(alg.C * x);
    const double v = lyapunov_value(alg, s, cert.P, g, x);
    const double vp = lyapunov_value(alg, s, cert.P, g, xp);
    const double tol = 1e-8 * (1.0 + std::abs(v));
    const double dec = vp - rho2 * v - tol;
    const double x2 = x.squaredNorm();
    const double lower = rep.alpha * x2 - v - tol;
    const double upper = v - rep.beta * x2 - tol;
    rep.worst_decrease = std::max(rep.worst_decrease, dec);
    rep.worst_lower = std::max(rep.worst_lower, lower);
    rep.worst_upper = std::max(rep.worst_upper, upper);
    if (dec > 0.0) rep.decrease_ok = false;
    if (lower > 0.0 || upper > 0.0) rep.bounds_ok = false;
    ++rep.points;
  }
  return rep;
}

FdiReport fdi_sample(const AlgorithmParams& alg, double m, double l, double rho, double lambda,
                     int n_freq) {
  using Complex = std::complex<double>;
  using CMatrix = Eigen::MatrixXcd;
  const Matrix at = alg.shifted();
  const double spec = spectral_radius(at);
  if (!(rho > spec)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "fdi_sample: rho %.6g does not exceed rho(A~) = %.6g", rho, spec);
    throw std::invalid_argument(buf);
  }
  if (n_freq < 1) throw std::invalid_argument("fdi_sample: n_freq must be positive");
  const int n = alg.n();
  const int d = alg.d();
  const CMatrix a = at.cast<Complex>();
  const CMatrix b = alg.B.cast<Complex>();
  const CMatrix c = alg.C.cast<Complex>();
  const CMatrix id_n = CMatrix::Identity(n, n);
  const CMatrix id_d = CMatrix::Identity(d, d);
  FdiReport rep;
  rep.max_eig_over_circle = -INFINITY;
  for (int k = 0; k < n_freq; ++k) {
    const double omega = 2.0 * std::numbers::pi * k / n_freq;
    const Complex z = std::polar(rho, omega);
    const CMatrix g = c * (z * id_n - a).partialPivLu().solve(b);
    const Complex zi = 1.0 / z;
    const CMatrix y = lambda * zi * id_d + (l - m) * (1.0 - lambda * zi) * g;
    const CMatrix form = y + y.adjoint() - 2.0 * id_d;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (form + form.adjoint()), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues()(d - 1);
    if (top > rep.max_eig_over_circle) {
      rep.max_eig_over_circle = top;
      rep.worst_omega = omega;
    }
    ++rep.samples;
  }
  return rep;
}

FdiReport fdi_sample(const AlgorithmParams& alg, double rho, double lambda, int n_freq) {
  double m = 0.0, l = 0.0;
  if (!alg.bounds.is_scalar(&m, &l)) {
    throw std::invalid_argument("fdi_sample: only scalar sectors M = mI, L = lI are supported");
  }
  return fdi_sample(alg, m, l, rho, lambda, n_freq);
}

}  // namespace gradsynth
