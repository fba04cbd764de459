#include "gradsynth/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace gradsynth {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual-form block: Z = C - sum_i u_i A_i, A_i stored as vec columns.
struct DenseCone {
  int s = 0;
  Matrix c;
  Matrix amat;  // (s*s) x nu
};

struct LpRow {
  int var = 0;
  double a = 0.0;
  double c = 0.0;
};

double min_eig(const Matrix& m) {
  if (m.rows() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix reshape(const Vector& v, int s) { return Eigen::Map<const Matrix>(v.data(), s, s); }

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with X + alpha dX >= 0 (inf if unbounded).
double max_step(const Matrix& x, const Matrix& dx) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix l = llt.matrixL();
  Matrix s = l.triangularView<Eigen::Lower>().solve(dx);
  s = l.triangularView<Eigen::Lower>().solve(Matrix(s.transpose()));
  const double lmin = min_eig(sym(s));
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_lp(const Vector& x, const Vector& dx) {
  double a = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  }
  return a;
}

class InteriorPoint {
 public:
  InteriorPoint(std::vector<DenseCone> cones, std::vector<LpRow> lp, int nu)
      : cones_(std::move(cones)), lp_(std::move(lp)), nu_(nu) {
    b_ = Vector::Zero(nu_);
    b_(nu_ - 1) = 1.0;
    n_barrier_ = static_cast<double>(lp_.size());
    for (const auto& c : cones_) n_barrier_ += c.s;
  }

  Vector a_op(const std::vector<Matrix>& xs, const Vector& xl) const {
    Vector out = Vector::Zero(nu_);
    for (std::size_t j = 0; j < cones_.size(); ++j) {
      const auto& c = cones_[j];
      out += c.amat.transpose() * Eigen::Map<const Vector>(xs[j].data(), c.s * c.s);
    }
    for (std::size_t l = 0; l < lp_.size(); ++l) out(lp_[l].var) += lp_[l].a * xl(l);
    return out;
  }

  std::vector<Matrix> a_adj(const Vector& u) const {
    std::vector<Matrix> out;
    for (const auto& c : cones_) out.push_back(reshape(c.amat * u, c.s));
    return out;
  }

  Vector a_adj_lp(const Vector& u) const {
    Vector out(lp_.size());
    for (std::size_t l = 0; l < lp_.size(); ++l) out(l) = lp_[l].a * u(lp_[l].var);
    return out;
  }

  // Min eigenvalue over cones of C - sum_{i < nu-1} u_i A_i (the slack t left out).
  double true_slack(const Vector& u) const {
    Vector v = u;
    v(nu_ - 1) = 0.0;
    double worst = kInf;
    const auto adj = a_adj(v);
    for (std::size_t j = 0; j < cones_.size(); ++j) {
      worst = std::min(worst, min_eig(sym(cones_[j].c - adj[j])));
    }
    return worst;
  }

  struct Result {
    Vector u;
    int iterations = 0;
    bool converged = false;
    bool infeasible_certificate = false;
    bool breakdown = false;
    double pobj = 0.0;
    double dobj = 0.0;
  };

  Result run(const SolveOptions& opts, double bound) {
    Result res;
    const int ncones = static_cast<int>(cones_.size());
    const int nlp = static_cast<int>(lp_.size());

    // Strictly dual-feasible start: u = (0, t0) with Z = C - t0 I >= I.
    Vector u = Vector::Zero(nu_);
    double cmin = kInf;
    for (const auto& c : cones_) cmin = std::min(cmin, min_eig(c.c));
    u(nu_ - 1) = cmin - 1.0;
    std::vector<Matrix> z(ncones), x(ncones);
    {
      const auto adj = a_adj(u);
      for (int j = 0; j < ncones; ++j) {
        z[j] = sym(cones_[j].c - adj[j]);
        x[j] = Matrix::Identity(cones_[j].s, cones_[j].s);
      }
    }
    Vector zl(nlp), xl = Vector::Ones(nlp);
    {
      const Vector adj = a_adj_lp(u);
      for (int l = 0; l < nlp; ++l) zl(l) = lp_[l].c - adj(l);
    }
    double tot = 0.0;
    for (const auto& c : cones_) tot += c.s;
    for (int j = 0; j < ncones; ++j) x[j] /= tot;
    xl /= tot;

    const double bnorm = 1.0;
    double cnorm = 0.0;
    for (const auto& c : cones_) cnorm = std::max(cnorm, c.c.norm());

    for (int it = 0; it < opts.max_iter; ++it) {
      res.iterations = it;
      if (!opts.maximize_margin && true_slack(u) >= 0.0) break;

      // Residuals and objectives.
      const Vector rp = b_ - a_op(x, xl);
      const auto adj = a_adj(u);
      const Vector adj_lp = a_adj_lp(u);
      std::vector<Matrix> rd(ncones);
      double dinf = 0.0;
      double pobj = 0.0;
      double xz = 0.0;
      for (int j = 0; j < ncones; ++j) {
        rd[j] = sym(cones_[j].c - z[j] - adj[j]);
        dinf = std::max(dinf, rd[j].norm());
        pobj += (cones_[j].c.array() * x[j].array()).sum();
        xz += (x[j].array() * z[j].array()).sum();
      }
      Vector rdl(nlp);
      for (int l = 0; l < nlp; ++l) {
        rdl(l) = lp_[l].c - zl(l) - adj_lp(l);
        pobj += lp_[l].c * xl(l);
      }
      if (nlp > 0) dinf = std::max(dinf, rdl.cwiseAbs().maxCoeff());
      xz += xl.dot(zl);
      const double dobj = u(nu_ - 1);
      const double mu = xz / n_barrier_;
      const double pinf = rp.norm() / (1.0 + bnorm);
      dinf /= (1.0 + cnorm);
      const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      res.pobj = pobj;
      res.dobj = dobj;
      if (pinf < opts.tol && dinf < opts.tol && relgap < opts.tol) {
        res.converged = true;
        break;
      }
      // Weak duality: any dual-feasible point in the box has t <= pobj + |rp|_1 |u|_inf.
      if (!opts.maximize_margin && pobj < 0.0 &&
          rp.lpNorm<1>() * (bound + std::abs(pobj) + std::abs(dobj) + 1.0) < -0.5 * pobj &&
          dinf < 1e-6) {
        res.infeasible_certificate = true;
        break;
      }

      // Schur complement M_ij = <A_i, X A_j Z^{-1}>.
      std::vector<Matrix> zi(ncones);
      Matrix schur = Matrix::Zero(nu_, nu_);
      bool fail = false;
      for (int j = 0; j < ncones && !fail; ++j) {
        const auto& c = cones_[j];
        Eigen::LLT<Matrix> llt(z[j]);
        if (llt.info() != Eigen::Success) {
          fail = true;
          break;
        }
        zi[j] = llt.solve(Matrix::Identity(c.s, c.s));
        Matrix ymat(c.s * c.s, nu_);
        for (int i = 0; i < nu_; ++i) {
          const Matrix ai = reshape(c.amat.col(i), c.s);
          const Matrix yi = x[j] * ai * zi[j];
          ymat.col(i) = Eigen::Map<const Vector>(yi.data(), c.s * c.s);
        }
        schur.noalias() += c.amat.transpose() * ymat;
      }
      if (fail) {
        res.breakdown = true;
        break;
      }
      for (int l = 0; l < nlp; ++l) {
        schur(lp_[l].var, lp_[l].var) += lp_[l].a * lp_[l].a * xl(l) / zl(l);
      }
      schur = sym(schur);
      Eigen::LDLT<Matrix> ldlt(schur);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        const double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        ldlt.compute(schur + reg * Matrix::Identity(nu_, nu_));
        if (ldlt.info() != Eigen::Success) {
          res.breakdown = true;
          break;
        }
      }

      // X Rd Z^{-1} enters every right-hand side.
      std::vector<Matrix> xrz(ncones);
      for (int j = 0; j < ncones; ++j) xrz[j] = x[j] * rd[j] * zi[j];
      Vector xrz_lp(nlp);
      for (int l = 0; l < nlp; ++l) xrz_lp(l) = xl(l) * rdl(l) / zl(l);

      struct Direction {
        std::vector<Matrix> dx, dz;
        Vector dxl, dzl;
        Vector du_;
      };
      auto direction = [&](double sigma, const Direction* corr) {
        std::vector<Matrix> t(ncones);
        Vector tl(nlp);
        for (int j = 0; j < ncones; ++j) {
          t[j] = -sigma * mu * zi[j] + xrz[j];
          if (corr) t[j] += corr->dx[j] * corr->dz[j] * zi[j];
        }
        for (int l = 0; l < nlp; ++l) {
          tl(l) = -sigma * mu / zl(l) + xrz_lp(l);
          if (corr) tl(l) += corr->dxl(l) * corr->dzl(l) / zl(l);
        }
        const Vector rhs = b_ + a_op(t, tl);
        const Vector du = ldlt.solve(rhs);
        Direction d;
        d.du_ = du;
        const auto adj_du = a_adj(du);
        const Vector adj_du_lp = a_adj_lp(du);
        d.dx.resize(ncones);
        d.dz.resize(ncones);
        for (int j = 0; j < ncones; ++j) {
          d.dz[j] = sym(rd[j] - adj_du[j]);
          Matrix dxj = sigma * mu * zi[j] - x[j] - x[j] * d.dz[j] * zi[j];
          if (corr) dxj -= corr->dx[j] * corr->dz[j] * zi[j];
          d.dx[j] = sym(dxj);
        }
        d.dzl = rdl - adj_du_lp;
        d.dxl.resize(nlp);
        for (int l = 0; l < nlp; ++l) {
          double v = sigma * mu / zl(l) - xl(l) - xl(l) * d.dzl(l) / zl(l);
          if (corr) v -= corr->dxl(l) * corr->dzl(l) / zl(l);
          d.dxl(l) = v;
        }
        return d;
      };
      auto steps = [&](const Direction& d, double* ap, double* ad) {
        double p = max_step_lp(xl, d.dxl);
        double q = max_step_lp(zl, d.dzl);
        for (int j = 0; j < ncones; ++j) {
          p = std::min(p, max_step(x[j], d.dx[j]));
          q = std::min(q, max_step(z[j], d.dz[j]));
        }
        *ap = p;
        *ad = q;
      };

      const Direction aff = direction(0.0, nullptr);
      double ap = 0.0, ad = 0.0;
      steps(aff, &ap, &ad);
      ap = std::min(1.0, ap);
      ad = std::min(1.0, ad);
      double mu_aff = 0.0;
      for (int j = 0; j < ncones; ++j) {
        mu_aff += ((x[j] + ap * aff.dx[j]).array() * (z[j] + ad * aff.dz[j]).array()).sum();
      }
      mu_aff += (xl + ap * aff.dxl).dot(zl + ad * aff.dzl);
      mu_aff /= n_barrier_;
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      const Direction dir = direction(sigma, &aff);
      steps(dir, &ap, &ad);
      constexpr double kGamma = 0.98;
      ap = std::min(1.0, kGamma * ap);
      ad = std::min(1.0, kGamma * ad);
      if (ap < 1e-12 && ad < 1e-12) {
        res.breakdown = true;
        break;
      }
      for (int j = 0; j < ncones; ++j) {
        x[j] = sym(x[j] + ap * dir.dx[j]);
        z[j] = sym(z[j] + ad * dir.dz[j]);
      }
      xl += ap * dir.dxl;
      zl += ad * dir.dzl;
      u += ad * dir.du_;
      res.iterations = it + 1;
    }
    res.u = u;
    return res;
  }

 private:
  std::vector<DenseCone> cones_;
  std::vector<LpRow> lp_;
  int nu_;
  Vector b_;
  double n_barrier_ = 0.0;
};

}  // namespace

SolveReport solve_feasibility(const LmiProblem& problem, const SolveOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  problem.validate();
  SolveReport rep;
  const ConicForm form = vectorize(problem);
  const int nv = problem.n_vars;

  // Eliminate equality rows: y = y0 + N z.
  Vector y0 = Vector::Zero(nv);
  Matrix nbasis = Matrix::Identity(nv, nv);
  double eq_scale = 1.0;
  if (form.eq_matrix.rows() > 0) {
    eq_scale += form.eq_rhs.cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Matrix> svd(form.eq_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double thresh = 1e-12 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > thresh) ++rank;
    }
    svd.setThreshold(thresh / std::max(1.0, sv.size() > 0 ? sv(0) : 1.0));
    y0 = svd.solve(form.eq_rhs);
    nbasis = svd.matrixV().rightCols(nv - rank);
    if ((form.eq_matrix * y0 - form.eq_rhs).cwiseAbs().maxCoeff() > 1e-9 * eq_scale) {
      rep.status = SolveStatus::infeasible;
      rep.point = y0;
      rep.eq_residual = problem.equality_residual(y0);
      rep.message = "inconsistent equality constraints";
      return rep;
    }
  }
  const int m = static_cast<int>(nbasis.cols());
  const int nu = m + 1;

  std::vector<DenseCone> cones;
  for (const auto& cb : form.cones) {
    DenseCone dc;
    dc.s = cb.size;
    const int s2 = cb.size * cb.size;
    Vector c0 = Eigen::Map<const Vector>(smat(cb.constant, cb.size).data(), s2);
    Matrix g = Matrix::Zero(s2, nv);
    for (const auto& [var, v] : cb.coeffs) {
      const Matrix gi = smat(v, cb.size);
      g.col(var) += Eigen::Map<const Vector>(gi.data(), s2);
    }
    c0 += g * y0;
    dc.c = sym(reshape(c0, cb.size));
    dc.amat.resize(s2, nu);
    dc.amat.leftCols(m) = -(g * nbasis);
    const Matrix id = Matrix::Identity(cb.size, cb.size);
    dc.amat.col(m) = Eigen::Map<const Vector>(id.data(), s2);
    cones.push_back(std::move(dc));
  }
  std::vector<LpRow> lp;
  for (int k = 0; k < m; ++k) {
    lp.push_back({k, 1.0, opts.variable_bound});
    lp.push_back({k, -1.0, opts.variable_bound});
  }

  Vector zvec = Vector::Zero(m);
  InteriorPoint ipm(cones, lp, nu);
  InteriorPoint::Result r;
  if (m > 0) {
    r = ipm.run(opts, opts.variable_bound);
    zvec = r.u.head(m);
  } else {
    r.u = Vector::Zero(1);
  }
  Vector uz = Vector::Zero(nu);
  uz.head(m) = zvec;
  const double slack = ipm.true_slack(uz);

  rep.iterations = r.iterations;
  rep.slack = slack;
  rep.point = y0 + nbasis * zvec;
  if (slack >= 0.0) {
    rep.status = SolveStatus::feasible;
  } else if (r.infeasible_certificate) {
    rep.status = SolveStatus::infeasible;
    rep.message = "dual bound below zero";
  } else if (r.converged || m == 0) {
    rep.status = slack < 0.0 ? SolveStatus::infeasible : SolveStatus::feasible;
    rep.message = "converged with negative optimal slack";
  } else if (r.breakdown) {
    rep.status = SolveStatus::inaccurate;
    rep.message = "numerical breakdown";
  } else {
    rep.status = SolveStatus::iteration_limit;
    rep.message = "iteration limit";
  }

  // Re-check the original blocks at the returned point.
  rep.min_block_eig = kInf;
  for (std::size_t i = 0; i < problem.blocks.size(); ++i) {
    const Matrix f = problem.evaluate_block(i, rep.point);
    const double sign = problem.blocks[i].sense == BlockSense::negative_definite ? -1.0 : 1.0;
    rep.min_block_eig = std::min(rep.min_block_eig, min_eig(sym(sign * f)));
  }
  rep.eq_residual = problem.equality_residual(rep.point);
  if (rep.status == SolveStatus::feasible) {
    if (rep.min_block_eig < 0.5 * problem.strict_margin) {
      rep.status = SolveStatus::inaccurate;
      rep.message = "verification failed: block eigenvalue below margin/2";
    } else if (rep.eq_residual > 1e-7 * eq_scale) {
      rep.status = SolveStatus::inaccurate;
      rep.message = "verification failed: equality residual";
    }
  }
  rep.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace gradsynth
