#include "gradsynth/funclass.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace gradsynth {

SectorBounds::SectorBounds(SymMatrix m, SymMatrix l)
    : m_(std::move(m)),
      l_(std::move(l)),
      gap_(SymMatrix::zero(1)),
      gap_pinv_(SymMatrix::zero(1)),
      kernel_(SymMatrix::zero(1)) {
  if (m_.dim() != l_.dim()) throw DimensionError("SectorBounds: M and L differ in dimension");
  const double tol = 1e-10 * std::max(1.0, std::max(m_.norm(), l_.norm()));
  if (!loewner_leq(m_, l_, tol)) {
    throw std::invalid_argument("SectorBounds: M <= L violated");
  }
  gap_ = l_ - m_;
  gap_pinv_ = pseudo_inverse(gap_);
  kernel_ = kernel_projector(gap_);
  gap_singular_ = kernel_.matrix().trace() > 0.5;
  well_posed_ = congruence_leq(m_, l_, tol, &diagnostic_);
}

SectorBounds SectorBounds::scalar(double m, double l, int dim) {
  return SectorBounds(SymMatrix::scaled_identity(dim, m), SymMatrix::scaled_identity(dim, l));
}

SectorBounds SectorBounds::structured(double m, double l) {
  const double q = m / l;
  const double c = std::sqrt(1.0 - q * q);
  Matrix rot(2, 2);
  rot << c, -q, q, c;
  Matrix lo = Matrix::Zero(2, 2);
  lo(0, 0) = l - m + m * m / l;
  lo(1, 1) = m;
  Matrix mid = Matrix::Zero(2, 2);
  mid(0, 0) = l;
  mid(1, 1) = 2.0 * m - m * m / l;
  return SectorBounds(SymMatrix(lo), SymMatrix(rot.transpose() * mid * rot));
}

SectorBounds SectorBounds::scaled(double s) const {
  if (!(s > 0)) throw std::invalid_argument("SectorBounds::scaled: factor must be positive");
  return SectorBounds(m_ * s, l_ * s);
}

bool SectorBounds::is_scalar(double* m, double* l, double tol) const {
  const int d = dim();
  const double mv = m_(0, 0);
  const double lv = l_(0, 0);
  const double scale = std::max(1.0, std::max(std::abs(mv), std::abs(lv)));
  const Matrix id = Matrix::Identity(d, d);
  const bool ok = (m_.matrix() - mv * id).cwiseAbs().maxCoeff() <= tol * scale &&
                  (l_.matrix() - lv * id).cwiseAbs().maxCoeff() <= tol * scale;
  if (ok) {
    if (m) *m = mv;
    if (l) *l = lv;
  }
  return ok;
}

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::quadratic: return "quadratic";
    case ObjectiveKind::logcosh_quadratic: return "logcosh-quadratic";
    case ObjectiveKind::lagrangian: return "lagrangian";
    case ObjectiveKind::shifted: return "shifted";
  }
  return "unknown";
}

double logcosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

namespace {

Vector sample_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  const double nrm = v.norm();
  if (nrm == 0.0) return Vector::Zero(dim);
  const double r = radius * std::pow(unif(rng), 1.0 / dim);
  return v * (r / nrm);
}

}  // namespace

SpotCheckReport sector_spot_check(const Objective& f, const SectorBounds& s, int n_pairs,
                                  double radius, std::uint64_t seed, double tol) {
  if (f.dim != s.dim()) throw DimensionError("sector_spot_check: dimension mismatch");
  const Matrix& m = s.lower().matrix();
  const Matrix& gap = s.gap().matrix();
  const Matrix& ker = s.gap_kernel().matrix();
  SpotCheckReport rep;
  rep.tol = tol >= 0 ? tol : 1e-8 * (1.0 + s.gap().norm());
  rep.pairs = n_pairs;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_pairs; ++k) {
    const Vector z1 = sample_ball(rng, f.dim, radius);
    const Vector z2 = sample_ball(rng, f.dim, radius);
    const Vector dz = z1 - z2;
    const Vector dg = (f.grad(z1) - m * z1) - (f.grad(z2) - m * z2);
    const double inner = dg.dot(dz);
    const double upper = dz.dot(gap * dz);
    double viol = std::max(-inner, inner - upper);
    if (s.gap_singular()) viol = std::max(viol, (ker * dg).norm());
    rep.worst_violation = std::max(rep.worst_violation, viol);
  }
  if (n_pairs == 0) rep.worst_violation = 0.0;
  rep.pass = rep.worst_violation <= rep.tol;
  return rep;
}

Objective make_quadratic(const SectorBounds& s, double theta, const Vector& shift) {
  if (shift.size() != s.dim()) throw DimensionError("make_quadratic: shift dimension mismatch");
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("make_quadratic: theta outside [0,1]");
  const Matrix q = s.lower().matrix() + theta * s.gap().matrix();
  Objective f;
  f.dim = s.dim();
  f.kind = ObjectiveKind::quadratic;
  f.eval = [q, shift](const Vector& z) {
    const Vector e = z - shift;
    return 0.5 * e.dot(q * e);
  };
  f.grad = [q, shift](const Vector& z) -> Vector { return q * (z - shift); };
  f.critical_point = shift;
  f.hessian = q;
  return f;
}

Objective make_logcosh(const SectorBounds& s, std::uint64_t seed) {
  const SpectralData sd = spectral(s.gap());
  const int d = s.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> width(0.5, 2.0);
  Vector sigma = sd.eigenvalues.cwiseMax(0.0);
  Vector c(d);
  for (int i = 0; i < d; ++i) c(i) = width(rng);
  const Matrix v = sd.eigenvectors;
  const Matrix m = s.lower().matrix();
  Objective f;
  f.dim = d;
  f.kind = ObjectiveKind::logcosh_quadratic;
  f.eval = [m, v, sigma, c](const Vector& z) {
    double val = 0.5 * z.dot(m * z);
    const Vector p = v.transpose() * z;
    for (int i = 0; i < p.size(); ++i) val += sigma(i) / (c(i) * c(i)) * logcosh(c(i) * p(i));
    return val;
  };
  f.grad = [m, v, sigma, c](const Vector& z) -> Vector {
    const Vector p = v.transpose() * z;
    Vector t(p.size());
    for (int i = 0; i < p.size(); ++i) t(i) = sigma(i) / c(i) * std::tanh(c(i) * p(i));
    return m * z + v * t;
  };
  f.critical_point = Vector::Zero(d);
  return f;
}

SectorBounds lagrangian_bounds(const SectorBounds& s, const Matrix& a_eq) {
  const int d = s.dim();
  if (a_eq.cols() != d) throw DimensionError("lagrangian_bounds: A_eq has wrong column count");
  const int d2 = static_cast<int>(a_eq.rows());
  if (d2 == 0) return s;
  Eigen::FullPivLU<Matrix> lu(a_eq);
  lu.setThreshold(1e-10);
  if (lu.rank() < d2) throw std::invalid_argument("lagrangian_bounds: A_eq is rank deficient");
  const Inertia im = inertia(s.lower(), kNonsingularRelTol);
  if (im.zero > 0) throw std::invalid_argument("lagrangian_bounds: M is singular");
  if (im.negative > 0) throw std::invalid_argument("lagrangian_bounds: M is indefinite");
  if (inertia(s.upper(), kNonsingularRelTol).zero > 0) {
    throw std::invalid_argument("lagrangian_bounds: L is singular");
  }
  auto assemble = [&](const Matrix& top) {
    Matrix out = Matrix::Zero(d + d2, d + d2);
    out.topLeftCorner(d, d) = top;
    out.topRightCorner(d, d2) = a_eq.transpose();
    out.bottomLeftCorner(d2, d) = a_eq;
    return SymMatrix(out);
  };
  SectorBounds out(assemble(s.lower().matrix()), assemble(s.upper().matrix()));
  if (!out.well_posed()) {
    throw std::runtime_error("lagrangian_bounds: saddle bounds failed the congruence check: " +
                             out.diagnostic());
  }
  return out;
}

std::pair<Objective, SectorBounds> make_lagrangian(const Objective& f, const SectorBounds& s,
                                                   const Matrix& a_eq, const Vector& b_eq) {
  if (f.dim != s.dim()) throw DimensionError("make_lagrangian: objective/bounds mismatch");
  if (a_eq.rows() != b_eq.size()) throw DimensionError("make_lagrangian: A_eq/b_eq mismatch");
  if (a_eq.rows() == 0) return {f, s};
  SectorBounds bounds = lagrangian_bounds(s, a_eq);
  const int d = s.dim();
  const int d2 = static_cast<int>(a_eq.rows());
  Objective lag;
  lag.dim = d + d2;
  lag.kind = ObjectiveKind::lagrangian;
  auto fe = f.eval;
  auto fg = f.grad;
  lag.eval = [fe, a_eq, b_eq, d, d2](const Vector& y) {
    const Vector x = y.head(d);
    return fe(x) + y.tail(d2).dot(a_eq * x - b_eq);
  };
  lag.grad = [fg, a_eq, b_eq, d, d2](const Vector& y) -> Vector {
    const Vector x = y.head(d);
    Vector g(d + d2);
    g.head(d) = fg(x) + a_eq.transpose() * y.tail(d2);
    g.tail(d2) = a_eq * x - b_eq;
    return g;
  };
  if (f.hessian && f.critical_point) {
    Matrix kkt = Matrix::Zero(d + d2, d + d2);
    kkt.topLeftCorner(d, d) = *f.hessian;
    kkt.topRightCorner(d, d2) = a_eq.transpose();
    kkt.bottomLeftCorner(d2, d) = a_eq;
    // grad f(x) = H (x - x0); stationarity: H x + A^T nu = H x0, A x = b.
    Vector rhs(d + d2);
    rhs.head(d) = *f.hessian * *f.critical_point;
    rhs.tail(d2) = b_eq;
    lag.critical_point = kkt.fullPivLu().solve(rhs);
    lag.hessian = kkt;
  }
  return {lag, bounds};
}

Objective shift_to_origin(const Objective& f, const SectorBounds& s) {
  if (!f.critical_point) {
    throw std::invalid_argument("shift_to_origin: objective has no known critical point");
  }
  const Vector zs = *f.critical_point;
  const Matrix m = s.lower().matrix();
  const double f0 = f.eval(zs);
  auto fe = f.eval;
  auto fg = f.grad;
  Objective g;
  g.dim = f.dim;
  g.kind = ObjectiveKind::shifted;
  g.eval = [fe, zs, m, f0](const Vector& z) { return fe(z + zs) - 0.5 * z.dot(m * z) - f0; };
  g.grad = [fg, zs, m](const Vector& z) -> Vector { return fg(z + zs) - m * z; };
  g.critical_point = Vector::Zero(f.dim);
  if (f.hessian) g.hessian = *f.hessian - m;
  return g;
}

}  // namespace gradsynth
