#include "gradsynth/lmi.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace gradsynth {

void LmiProblem::validate() const {
  if (static_cast<int>(var_names.size()) != n_vars) {
    throw std::invalid_argument("LmiProblem: var_names size differs from n_vars");
  }
  for (const auto& b : blocks) {
    if (b.expr.rows() != b.expr.cols()) {
      throw std::invalid_argument("LmiProblem: block '" + b.label + "' is not square");
    }
    if (!b.expr.is_symmetric(1e-12)) {
      throw std::invalid_argument("LmiProblem: block '" + b.label + "' is not symmetric");
    }
    if (!b.expr.constant().allFinite()) {
      throw std::invalid_argument("LmiProblem: block '" + b.label + "' has non-finite data");
    }
    for (const auto& [var, coef] : b.expr.terms()) {
      if (var < 0 || var >= n_vars) {
        throw std::invalid_argument("LmiProblem: block '" + b.label + "' references variable " +
                                    std::to_string(var) + " out of range");
      }
      if (!coef.allFinite()) {
        throw std::invalid_argument("LmiProblem: block '" + b.label + "' has non-finite data");
      }
    }
  }
  for (const auto& row : eq_constraints) {
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("LmiProblem: non-finite equality rhs");
    for (const auto& [var, c] : row.coeffs) {
      if (var < 0 || var >= n_vars || !std::isfinite(c)) {
        throw std::invalid_argument("LmiProblem: malformed equality row");
      }
    }
  }
}

Matrix LmiProblem::evaluate_block(std::size_t i, const Vector& y) const {
  return blocks.at(i).expr.evaluate(y);
}

double LmiProblem::equality_residual(const Vector& y) const {
  double worst = 0.0;
  for (const auto& row : eq_constraints) {
    double v = -row.rhs;
    for (const auto& [var, c] : row.coeffs) v += c * y(var);
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

void LmiProblem::dump(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "# LMI problem\n";
  os << "variables " << n_vars << "\n";
  for (int i = 0; i < n_vars; ++i) os << "  " << i << " " << var_names[i] << "\n";
  os << "margin " << strict_margin << "\n";
  for (const auto& b : blocks) {
    os << "block " << b.label << " size " << b.size() << " sense "
       << (b.sense == BlockSense::negative_definite ? "negative_definite" : "positive_definite")
       << "\n";
    os << "  constant\n" << b.expr.constant() << "\n";
    for (const auto& [var, coef] : b.expr.terms()) {
      os << "  coeff " << var << " (" << var_names[var] << ")\n" << coef << "\n";
    }
  }
  os << "equalities " << eq_constraints.size() << "\n";
  for (const auto& row : eq_constraints) {
    os << " ";
    for (const auto& [var, c] : row.coeffs) os << " " << c << "*y" << var;
    os << " = " << row.rhs << "\n";
  }
  os.precision(old);
}

double data_scale(const SectorBounds& s) {
  const double nl = s.upper().norm();
  return nl > 0 ? 1.0 / nl : 1.0;
}

double default_margin(const SectorBounds& scaled_bounds) {
  return 1e-7 * (1.0 + scaled_bounds.upper().norm());
}

Matrix selector(int which, int d, int n) {
  if (which < 1 || which > 3) throw std::invalid_argument("selector: index must be 1, 2 or 3");
  if (which * d > n) throw DimensionError("selector: need n >= " + std::to_string(which * d));
  Matrix j = Matrix::Zero(d, n);
  j.block(0, (which - 1) * d, d, d) = Matrix::Identity(d, d);
  return j;
}

namespace {

void check_rate(double rho, double lambda) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rate must lie in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= rho * rho * (1.0 + 1e-12))) {
    throw std::invalid_argument("lambda must lie in [0, rho^2]");
  }
}

// Constant part of the multiplier term over (x, w, x+, w+) plus the r-term
// coefficient (nullopt when Pi = 0).
Matrix multiplier_constant(const Matrix& c, const Matrix& lt_pinv, double lambda) {
  const auto n = c.cols();
  const auto d = c.rows();
  Matrix m = Matrix::Zero(2 * n + 2 * d, 2 * n + 2 * d);
  const auto x = 0;
  const auto w = n;
  const auto xp = n + d;
  const auto wp = 2 * n + d;
  m.block(x, wp, n, d) = -0.5 * lambda * c.transpose();
  m.block(wp, x, d, n) = -0.5 * lambda * c;
  m.block(w, wp, d, d) = 0.5 * lambda * lt_pinv;
  m.block(wp, w, d, d) = 0.5 * lambda * lt_pinv;
  m.block(xp, wp, n, d) = 0.5 * c.transpose();
  m.block(wp, xp, d, n) = 0.5 * c;
  m.block(wp, wp, d, d) = -lt_pinv;
  return m;
}

Matrix multiplier_r_coefficient(int n, int d, const Matrix& pi) {
  Matrix m = Matrix::Zero(2 * n + 2 * d, 2 * n + 2 * d);
  m.block(n, n, d, d) = -pi;
  m.block(2 * n + d, 2 * n + d, d, d) = -pi;
  return m;
}

Matrix stacked_map(const Matrix& a_shift, const Matrix& b) {
  const auto n = a_shift.rows();
  const auto d = b.cols();
  Matrix w = Matrix::Zero(2 * n + 2 * d, n + 2 * d);
  w.block(0, 0, n, n) = Matrix::Identity(n, n);
  w.block(n, n, d, d) = Matrix::Identity(d, d);
  w.block(n + d, 0, n, n) = a_shift;
  w.block(n + d, n, n, d) = b;
  w.block(2 * n + d, n + d, d, d) = Matrix::Identity(d, d);
  return w;
}

}  // namespace

SymMatrix AnalysisLmi::certificate_p(const Vector& y) const {
  // Scaled gradients are s times the original ones, so P maps back by the
  // congruence diag(I, s) divided by s.
  Matrix ps = p.evaluate(y);
  ps.topLeftCorner(n, n) /= scale;
  ps.bottomRightCorner(d, d) *= scale;
  return SymMatrix(ps);
}

double AnalysisLmi::certificate_r(const Vector& y) const {
  return r ? r->evaluate(y)(0, 0) * scale : 0.0;
}

AnalysisLmi build_analysis_lmi(const AlgorithmParams& alg, const SectorBounds& s, double rho,
                               double lambda, double margin) {
  check_rate(rho, lambda);
  if (alg.d() != s.dim()) throw DimensionError("build_analysis_lmi: algorithm/bounds dimension mismatch");
  const int n = alg.n();
  const int d = alg.d();
  AnalysisLmi out;
  out.scale = data_scale(s);
  out.rho = rho;
  out.lambda = lambda;
  out.n = n;
  out.d = d;
  const SectorBounds ss = s.scaled(out.scale);
  const Matrix a_shift = alg.A + alg.B * s.lower().matrix() * alg.C;
  const Matrix b = alg.B / out.scale;

  VariableRegistry reg;
  out.p = reg.symmetric("P", n + d);
  if (ss.gap_singular()) out.r = reg.scalar("r");

  const AffineExpr zero_nn(n + d, n + d);
  AffineExpr mid = AffineExpr::blocks({{-(rho * rho) * out.p, zero_nn}, {zero_nn, out.p}});
  mid += AffineExpr(multiplier_constant(alg.C, ss.gap_pinv().matrix(), lambda));
  if (out.r) {
    AffineExpr rterm(2 * n + 2 * d, 2 * n + 2 * d);
    for (const auto& [var, coef] : out.r->terms()) {
      rterm.add_term(var, coef(0, 0) * multiplier_r_coefficient(n, d, ss.gap_kernel().matrix()));
    }
    mid += rterm;
  }
  const Matrix w = stacked_map(a_shift, b);
  AffineExpr main = w.transpose() * mid * w;
  main.symmetrize();

  LmiProblem& p = out.problem;
  p.n_vars = reg.size();
  p.var_names = reg.names();
  p.strict_margin = margin > 0 ? margin : default_margin(ss);
  p.blocks.push_back({"P", BlockSense::positive_definite, out.p});
  p.blocks.push_back({"rate", BlockSense::negative_definite, main});
  p.validate();
  return out;
}

Matrix analysis_matrix(const AlgorithmParams& alg, const SectorBounds& s, const SymMatrix& p,
                       double r, double rho, double lambda) {
  const int n = alg.n();
  const int d = alg.d();
  if (p.dim() != n + d) throw DimensionError("analysis_matrix: P has wrong size");
  Matrix mid = Matrix::Zero(2 * n + 2 * d, 2 * n + 2 * d);
  mid.topLeftCorner(n + d, n + d) = -(rho * rho) * p.matrix();
  mid.bottomRightCorner(n + d, n + d) = p.matrix();
  mid += multiplier_constant(alg.C, s.gap_pinv().matrix(), lambda);
  if (s.gap_singular()) mid += r * multiplier_r_coefficient(n, d, s.gap_kernel().matrix());
  const Matrix w = stacked_map(alg.shifted(), alg.B);
  const Matrix out = w.transpose() * mid * w;
  return 0.5 * (out + out.transpose());
}

Matrix schur_form_matrix(const AlgorithmParams& alg, const SectorBounds& s, const SymMatrix& p,
                         double r, double rho, double lambda) {
  const int n = alg.n();
  const int d = alg.d();
  const Matrix& pm = p.matrix();
  const Matrix p11 = pm.topLeftCorner(n, n);
  const Matrix p21 = pm.bottomLeftCorner(d, n);
  const Matrix p12 = p21.transpose();
  const Matrix p22 = pm.bottomRightCorner(d, d);
  const Matrix at = alg.shifted();
  const Matrix& b = alg.B;
  const Matrix& c = alg.C;
  const Matrix lt = s.gap_pinv().matrix();
  const Matrix pi = s.gap_singular() ? s.gap_kernel().matrix() : Matrix::Zero(d, d);
  const int sz = 2 * n + 3 * d;
  Matrix m = Matrix::Zero(sz, sz);
  const int o1 = 0, o2 = n, o3 = n + d, o4 = n + 2 * d, o5 = 2 * n + 2 * d;
  auto put = [&m](int r0, int c0, const Matrix& blk) {
    m.block(r0, c0, blk.rows(), blk.cols()) = blk;
    if (r0 != c0) m.block(c0, r0, blk.cols(), blk.rows()) = blk.transpose();
  };
  put(o1, o1, -(rho * rho) * p11);
  put(o2, o1, -(rho * rho) * p21);
  put(o2, o2, -(rho * rho) * p22 - r * pi);
  put(o3, o1, 0.5 * c * at - 0.5 * lambda * c);
  put(o3, o2, 0.5 * c * b + 0.5 * lambda * lt);
  put(o3, o3, -lt - r * pi);
  put(o4, o1, p11 * at);
  put(o4, o2, p11 * b);
  put(o4, o3, p12);
  put(o4, o4, -p11);
  put(o5, o1, p21 * at);
  put(o5, o2, p21 * b);
  put(o5, o3, p22);
  put(o5, o4, -p21);
  put(o5, o5, -p22);
  return 0.5 * (m + m.transpose());
}

SynthesisLmi build_synthesis_lmi(const SectorBounds& s, int n, double rho, double lambda,
                                 double margin) {
  check_rate(rho, lambda);
  const int d = s.dim();
  if (n < 3 * d) {
    throw std::invalid_argument("build_synthesis_lmi: need n >= 3d (n = " + std::to_string(n) +
                                ", d = " + std::to_string(d) + ")");
  }
  if (inertia(s.lower(), kNonsingularRelTol).zero > 0) {
    throw std::invalid_argument("build_synthesis_lmi: M is singular");
  }
  const double scale = data_scale(s);
  SynthesisLmi out{.problem = {},
                   .p11 = {},
                   .p22 = {},
                   .a_hat = {},
                   .r = std::nullopt,
                   .n = n,
                   .d = d,
                   .scale = scale,
                   .rho = rho,
                   .lambda = lambda,
                   .bounds = s,
                   .scaled_bounds = s.scaled(scale)};
  const SectorBounds& ss = out.scaled_bounds;
  const Matrix lt = ss.gap_pinv().matrix();
  const Matrix m_inv = ss.lower().matrix().inverse();
  const Matrix j1 = selector(1, d, n);
  const Matrix j2 = selector(2, d, n);
  const Matrix j3 = selector(3, d, n);

  VariableRegistry reg;
  out.p11 = reg.symmetric("P11", n);
  out.p22 = reg.symmetric("P22", d);
  out.a_hat = reg.general("Ahat", n, n);
  AffineExpr r_pi(d, d);
  if (ss.gap_singular()) {
    out.r = reg.scalar("r");
    for (const auto& [var, coef] : out.r->terms()) {
      r_pi.add_term(var, coef(0, 0) * ss.gap_kernel().matrix());
    }
  }

  const AffineExpr& p11 = out.p11;
  const AffineExpr& p22 = out.p22;
  const AffineExpr& ah = out.a_hat;
  const AffineExpr c = j2 * p11;
  const AffineExpr p21 = j3 * p11;
  const AffineExpr p12 = p21.transpose();
  const AffineExpr bh = (ah - p11) * Matrix(j1.transpose() * m_inv);
  const double rr = rho * rho;

  // Lower-triangular blocks over the partition (n, d, d, n, d).
  const AffineExpr b21 = -rr * p21;
  const AffineExpr b22 = -rr * p22 - r_pi;
  const AffineExpr b31 = 0.5 * (j2 * ah) - (0.5 * lambda) * c;
  const AffineExpr b32 = 0.5 * (j2 * bh) + AffineExpr(Matrix(0.5 * lambda * lt));
  const AffineExpr b33 = AffineExpr(Matrix(-lt)) - r_pi;
  const AffineExpr& b41 = ah;
  const AffineExpr& b42 = bh;
  const AffineExpr& b43 = p12;
  const AffineExpr b44 = -p11;
  const AffineExpr b51 = j3 * ah;
  const AffineExpr b52 = j3 * bh;
  const AffineExpr& b53 = p22;
  const AffineExpr b54 = -p21;
  const AffineExpr b55 = -p22;

  AffineExpr main = AffineExpr::blocks({
      {-rr * p11, b21.transpose(), b31.transpose(), b41.transpose(), b51.transpose()},
      {b21, b22, b32.transpose(), b42.transpose(), b52.transpose()},
      {b31, b32, b33, b43.transpose(), b53.transpose()},
      {b41, b42, b43, b44, b54.transpose()},
      {b51, b52, b53, b54, b55},
  });
  main.symmetrize();
  const AffineExpr pfull = AffineExpr::blocks({{p11, p12}, {p21, p22}});

  LmiProblem& p = out.problem;
  p.n_vars = reg.size();
  p.var_names = reg.names();
  p.strict_margin = margin > 0 ? margin : default_margin(ss);
  p.blocks.push_back({"synthesis", BlockSense::negative_definite, main});
  p.blocks.push_back({"P", BlockSense::positive_definite, pfull});

  // C J1^T = J2 P11 J1^T = I_d.
  const AffineExpr cj = c * Matrix(j1.transpose());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      EqualityRow row;
      for (const auto& [var, coef] : cj.terms()) {
        if (coef(i, j) != 0.0) row.coeffs.emplace_back(var, coef(i, j));
      }
      row.rhs = (i == j ? 1.0 : 0.0) - cj.constant()(i, j);
      p.eq_constraints.push_back(std::move(row));
    }
  }
  p.validate();
  return out;
}

int ConicForm::total_cone_dim() const {
  int total = 0;
  for (const auto& c : cones) total += c.size * (c.size + 1) / 2;
  return total;
}

Vector svec(const Matrix& m) {
  const auto n = m.rows();
  Vector v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      v(k++) = (i == j) ? m(i, j) : r2 * m(i, j);
    }
  }
  return v;
}

Matrix smat(const Vector& v, int dim) {
  if (v.size() != dim * (dim + 1) / 2) throw DimensionError("smat: length mismatch");
  Matrix m(dim, dim);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double val = (i == j) ? v(k) : v(k) / r2;
      m(i, j) = val;
      m(j, i) = val;
      ++k;
    }
  }
  return m;
}

ConicForm vectorize(const LmiProblem& p) {
  ConicForm out;
  out.n_vars = p.n_vars;
  out.margin = p.strict_margin;
  for (const auto& b : p.blocks) {
    const double sign = b.sense == BlockSense::negative_definite ? -1.0 : 1.0;
    ConeBlock cone;
    cone.size = b.size();
    const Matrix shift = p.strict_margin * Matrix::Identity(b.size(), b.size());
    cone.constant = svec(sign * b.expr.constant() - shift);
    for (const auto& [var, coef] : b.expr.terms()) cone.coeffs.emplace_back(var, svec(sign * coef));
    out.cones.push_back(std::move(cone));
  }
  const auto neq = static_cast<Eigen::Index>(p.eq_constraints.size());
  out.eq_matrix = Matrix::Zero(neq, p.n_vars);
  out.eq_rhs = Vector::Zero(neq);
  for (Eigen::Index i = 0; i < neq; ++i) {
    for (const auto& [var, c] : p.eq_constraints[i].coeffs) out.eq_matrix(i, var) += c;
    out.eq_rhs(i) = p.eq_constraints[i].rhs;
  }
  return out;
}

std::vector<AffineExpr> devectorize(const ConicForm& form, const LmiProblem& layout) {
  std::vector<AffineExpr> out;
  for (std::size_t i = 0; i < form.cones.size(); ++i) {
    const ConeBlock& cone = form.cones[i];
    const double sign =
        layout.blocks.at(i).sense == BlockSense::negative_definite ? -1.0 : 1.0;
    const Matrix shift = form.margin * Matrix::Identity(cone.size, cone.size);
    AffineExpr e(Matrix(sign * (smat(cone.constant, cone.size) + shift)));
    for (const auto& [var, v] : cone.coeffs) e.add_term(var, sign * smat(v, cone.size));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace gradsynth
