// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "gradsynth/synth.hpp"
#include "gradsynth/verify.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace gradsynth;
using namespace testing_support;

namespace {

struct Design {
  std::string name;
  SectorBounds base;           // class of the objective f
  std::optional<Matrix> a_eq;  // lifted to the Lagrangian class when set
  SynthesisResult res;

  SectorBounds bounds() const { return res.alg.bounds; }
};

std::vector<Design> designs;
std::vector<std::pair<std::string, std::pair<AlgorithmParams, RateCertificate>>> certificates;

double tm_rate(double k) { return 1.0 - std::sqrt(1.0 / k); }
double lower_bound(double k) { return (std::sqrt(k) - 1) / (std::sqrt(k) + 1); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s (%s)\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void add_design(const std::string& name, const SectorBounds& base, std::optional<Matrix> a_eq,
                const SynthesisResult& res) {
  designs.push_back({name, base, std::move(a_eq), res});
  certificates.push_back({name, {res.alg, res.cert}});
}

bool criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  for (double k : {2.0, 5.0, 10.0, 15.0, 50.0, 100.0}) {
    const SectorBounds s = SectorBounds::scalar(1, k);
    try {
      const SynthesisResult r = synthesize(s, 3);
      const double gap = std::abs(r.rho_star - tm_rate(k));
      worst = std::max(worst, gap);
      const bool row_ok = gap <= 3e-3 && r.rho_star >= lower_bound(k) - 1e-3;
      if (!row_ok) std::printf("  kappa %g: rho* %.6f, triple momentum %.6f\n", k, r.rho_star, tm_rate(k));
      ok = ok && row_ok;
      add_design("scalar k=" + fmt("%g", k), s, std::nullopt, r);
    } catch (const std::exception& e) {
      std::printf("  kappa %g: %s\n", k, e.what());
      ok = false;
    }
  }
  const double t = seconds_since(t0);
  ok = ok && t < 60.0;
  report(1, "triple momentum parity", ok, fmt("max |rho* - tm| = %.2e, %.1f s", worst, t));
  return ok;
}

bool criterion2() {
  bool ok = true;
  std::string detail;
  for (double k : {3.0, 15.0}) {
    const SectorBounds s = SectorBounds::scalar(1, k);
    const auto [alg, rho_grad] = gradient_baseline(s);
    const bool exact = std::abs(rho_grad - (k - 1) / (k + 1)) < 1e-12;
    const CertifyOutcome above = certify(alg, s, rho_grad + 1e-3);
    const CertifyOutcome below = certify(alg, s, rho_grad - 1e-2);
    ok = ok && exact && above.ok() && !below.ok();
    if (above.ok()) certificates.push_back({"gradient k=" + fmt("%g", k), {alg, *above.cert}});
    detail += fmt("kappa %g: ", k) + std::string(above.ok() ? "above certified" : "above REJECTED") + ", " +
              (below.ok() ? "below CERTIFIED" : "below rejected") + "; ";
  }
  report(2, "gradient baseline sharpness", ok, detail.substr(0, detail.size() - 2));
  return ok;
}

bool criterion3() {
  const SectorBounds s = SectorBounds::structured(1, 10);
  const double rho_grad = gradient_baseline(s).second;
  const double pencil = spectral_radius_pencil(s.lower(), s.upper());
  try {
    const SynthesisResult r = synthesize(s);
    add_design("structured k=10", s, std::nullopt, r);
    const bool ok = r.rho_star <= pencil + 1e-3 && pencil + 1e-3 < lower_bound(10) &&
                    std::abs(rho_grad - pencil) < 1e-12;
    report(3, "structured benefit", ok,
           fmt("rho* %.6f, structured gradient %.6f, unstructured bound %.6f", r.rho_star, pencil, lower_bound(10)));
    return ok;
  } catch (const std::exception& e) {
    report(3, "structured benefit", false, e.what());
    return false;
  }
}

bool criterion4() {
  const SectorBounds base = SectorBounds::scalar(1, 15, 2);
  Matrix a(1, 2);
  a << 1, 1;
  const double lo = 0.7418 - 5e-3, hi = 0.7422 + 5e-3;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const SynthesisResult r = synthesize_constrained(base, a, Vector::Zero(1), 9);
    add_design("constrained n=9", base, a, r);
    const ReductionOutcome red = reduce_order(r, 6);
    const bool full_ok = r.rho_star >= lo && r.rho_star <= hi && r.rho_star < 0.875;
    bool red_ok = red.ok();
    double red_rho = NAN;
    if (red_ok) {
      red_rho = red.result->rho_star;
      red_ok = red_rho >= lo && red_rho <= hi && red.result->cert.verified;
      add_design("constrained n=6", base, a, *red.result);
    } else {
      std::printf("  reduction rejected: %s\n", red.diagnostic.c_str());
    }
    report(4, "constrained example and reduction", full_ok && red_ok,
           fmt("n=9 rho* %.6f, n=6 rho %.6f, %.1f s", r.rho_star, red_rho, seconds_since(t0)));
    return full_ok && red_ok;
  } catch (const std::exception& e) {
    report(4, "constrained example and reduction", false, e.what());
    return false;
  }
}

// Test objectives for a design: 20 random quadratics and 5 logcosh members of
// the base class, lifted to the Lagrangian when the design is constrained.
std::vector<Objective> test_objectives(const Design& d, std::mt19937_64& rng) {
  std::vector<Objective> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int dim = d.base.dim();
  for (int i = 0; i < 25; ++i) {
    Objective f = i < 20 ? make_quadratic(d.base, u(rng), 3.0 * random_matrix(rng, dim, 1).col(0))
                         : make_logcosh(d.base, 1000 + i);
    if (d.a_eq) {
      const int d2 = static_cast<int>(d.a_eq->rows());
      const Vector b = i < 20 ? Vector(random_matrix(rng, d2, 1).col(0)) : Vector(Vector::Zero(d2));
      f = make_lagrangian(f, d.base, *d.a_eq, b).first;
      // f has z* = 0 and b = 0, so the saddle point is the origin.
      if (!f.critical_point && i >= 20) f.critical_point = Vector::Zero(f.dim);
    }
    out.push_back(std::move(f));
  }
  return out;
}

bool criterion5() {
  std::mt19937_64 rng(2024);
  bool ok = !designs.empty();
  double worst_excess = -1.0, worst_c = 0.0;
  for (const Design& d : designs) {
    for (const Objective& f : test_objectives(d, rng)) {
      const Vector x0 = random_matrix(rng, d.res.alg.n(), 1).col(0);
      const TrajectoryReport rep = simulate(d.res.alg, f, x0, 5000);
      const double c = transient_constant(rep, d.res.rho_star);
      worst_excess = std::max(worst_excess, rep.fitted_rate - d.res.rho_star);
      worst_c = std::max(worst_c, c);
      const bool row_ok = rep.converged && rep.fitted_rate <= d.res.rho_star + 0.01 && c <= 1e3;
      if (!row_ok)
        std::printf("  %s %s: converged %d rate %.6f rho* %.6f c %.3g\n", d.name.c_str(), to_string(f.kind).c_str(),
                    rep.converged, rep.fitted_rate, d.res.rho_star, c);
      ok = ok && row_ok;
    }
  }
  report(5, "rate realization", ok,
         fmt("%g designs x 25 objectives, max(rate - rho*) = %.2e, max c = %.3g",
             static_cast<double>(designs.size()), worst_excess, worst_c));
  return ok;
}

bool criterion6() {
  std::mt19937_64 rng(77);
  bool ok = !certificates.empty();
  int checks = 0;
  for (auto& [name, pair] : certificates) {
    auto& [alg, cert] = pair;
    const SectorBounds s = alg.bounds;
    RateCertificate copy = cert;
    if (!verify_certificate(alg, s, copy)) {
      std::printf("  %s: block re-evaluation failed (min eig P %.3g, max eig %.3g)\n", name.c_str(),
                  copy.min_eig_p, copy.max_eig_analysis);
      ok = false;
      continue;
    }
    // Objectives in the class of this certificate.
    std::vector<Objective> fs;
    const Design* des = nullptr;
    for (const Design& d : designs)
      if (d.name == name) des = &d;
    if (des) {
      const auto all = test_objectives(*des, rng);
      fs = {all[0], all[1], all[20], all[21]};
    } else {
      fs = {make_quadratic(s, 0.2, Vector::Zero(s.dim())), make_quadratic(s, 1.0, Vector::Ones(s.dim())),
            make_logcosh(s, 5)};
    }
    for (const Objective& f : fs) {
      const Objective g = shift_to_origin(f, s);
      const LyapunovReport rep = lyapunov_decrease_check(alg, s, cert, g, 1000, ++checks, 10.0);
      if (!rep.pass()) {
        std::printf("  %s %s: decrease %d (worst %.3g) bounds %d\n", name.c_str(), to_string(f.kind).c_str(),
                    rep.decrease_ok, rep.worst_decrease, rep.bounds_ok);
        ok = false;
      }
    }
  }
  report(6, "certificate semantics", ok,
         fmt("%g certificates, %g Lyapunov checks of 1000 points", static_cast<double>(certificates.size()),
             static_cast<double>(checks)));
  return ok;
}

bool criterion7() {
  bool ok = true;
  int count = 0;
  double worst = -1e300;
  for (auto& [name, pair] : certificates) {
    auto& [alg, cert] = pair;
    double m = 0, l = 0;
    if (!alg.bounds.is_scalar(&m, &l)) continue;
    ++count;
    const double inner = dense_spectral_radius(alg.shifted());
    if (!(inner < cert.rho)) {
      std::printf("  %s: rho(A~) %.6f >= rho %.6f\n", name.c_str(), inner, cert.rho);
      ok = false;
      continue;
    }
    const FdiReport rep = fdi_sample(alg, m, l, cert.rho, cert.lambda, 256);
    worst = std::max(worst, rep.max_eig_over_circle);
    if (!(rep.max_eig_over_circle < 0)) {
      std::printf("  %s: FDI max eig %.3g at omega %.4f\n", name.c_str(), rep.max_eig_over_circle, rep.worst_omega);
      ok = false;
    }
  }
  ok = ok && count > 0;
  report(7, "frequency-domain cross-check", ok,
         fmt("%g scalar-sector certificates, max eigenvalue %.3g", static_cast<double>(count), worst));
  return ok;
}

bool criterion8() {
  std::mt19937_64 rng(8);
  double worst_identity = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 6;
    const int rank = std::uniform_int_distribution<int>(0, d)(rng);
    const SymMatrix s(random_psd(rng, d, rank));
    const Matrix a = s.matrix(), ap = pseudo_inverse(s).matrix(), pk = kernel_projector(s).matrix();
    const Matrix pi = image_projector(s).matrix(), id = Matrix::Identity(d, d);
    const double r = (t % 2 ? 1.0 : -1.0) * std::uniform_real_distribution<double>(0.2, 5.0)(rng);
    for (double e : {(a * ap * a - a).cwiseAbs().maxCoeff(), (ap * a * ap - ap).cwiseAbs().maxCoeff(),
                     (pi + pk - id).cwiseAbs().maxCoeff(),
                     ((a + r * pk).inverse() - (ap + pk / r)).cwiseAbs().maxCoeff(),
                     ((ap + r * pk).inverse() - (a + pk / r)).cwiseAbs().maxCoeff()})
      worst_identity = std::max(worst_identity, e);
  }
  int disagree = 0, well = 0, ill = 0;
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 4;
    Vector e(d);
    for (int i = 0; i < d; ++i) {
      e(i) = u(rng);
      if (std::abs(e(i)) < 0.1) e(i) = std::copysign(0.1, e(i));
    }
    if (t % 10 == 9) e(0) = 0.0;
    const Matrix m = with_spectrum(rng, e);
    const Matrix l = m + random_psd(rng, d, std::uniform_int_distribution<int>(0, d)(rng));
    const SymMatrix ms(m), ls(l);
    const bool s1 = well_posed::by_inertia(ms, ls);
    if (s1 != well_posed::by_pencil(ms, ls) || s1 != well_posed::by_ratio(ms, ls)) ++disagree;
    (s1 ? well : ill)++;
  }
  double worst_constraint = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 4;
    Vector e(d);
    for (int i = 0; i < d; ++i) e(i) = std::uniform_real_distribution<double>(0.1, 3.0)(rng) * (i % 2 ? -1 : 1);
    const Matrix m = with_spectrum(rng, e);
    const SectorBounds s(SymMatrix(m), SymMatrix(m + random_psd(rng, d, d)));
    if (!s.well_posed()) continue;
    worst_constraint = std::max(worst_constraint, gradient_baseline(s).first.constraint_residual());
  }
  const bool ok = worst_identity <= 1e-8 && disagree == 0 && well > 0 && ill > 0 && worst_constraint <= 1e-8;
  report(8, "property suites", ok,
         fmt("identities %.2e, lemma disagreements %g, baseline constraint %.2e", worst_identity,
             static_cast<double>(disagree), worst_constraint));
  return ok;
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
