#include "gradsynth/experiments.hpp"

#include "gradsynth/verify.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace gradsynth {

namespace fs = std::filesystem;

std::vector<double> default_kappas() {
  std::vector<double> out;
  constexpr int kCount = 10;
  for (int i = 0; i < kCount; ++i) {
    out.push_back(2.0 * std::pow(50.0, static_cast<double>(i) / (kCount - 1)));
  }
  return out;
}

namespace {

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

std::string kappa_tag(const std::string& mode, double kappa) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_k%.6g", mode.c_str(), kappa);
  return buf;
}

SweepRow sweep_one(const SweepOptions& opts, double kappa) {
  SweepRow row;
  row.kappa = kappa;
  row.tag = kappa_tag(opts.mode, kappa);
  const double m = opts.m;
  const double l = kappa * m;
  ExperimentConfig src;
  src.m = m;
  src.l = l;
  try {
    SectorBounds bounds = SectorBounds::scalar(m, l, 1);
    if (opts.mode == "scalar") {
      src.sector = SectorKind::scalar;
      row.rho_tm = 1.0 - std::sqrt(m / l);
      row.rho_nesterov = (std::sqrt(l) - std::sqrt(m)) / (std::sqrt(l) + std::sqrt(m));
    } else if (opts.mode == "structured") {
      src.sector = SectorKind::structured;
      bounds = SectorBounds::structured(m, l);
    } else if (opts.mode == "constrained") {
      src.sector = SectorKind::lagrangian;
      src.dim = static_cast<int>(opts.a_eq.cols());
      src.a_eq = opts.a_eq;
      bounds = lagrangian_bounds(SectorBounds::scalar(m, l, src.dim), opts.a_eq);
    } else {
      throw std::invalid_argument("unknown sweep mode '" + opts.mode + "'");
    }
    row.rho_grad = gradient_baseline(bounds).second;
    const SynthesisResult res = synthesize(bounds, opts.n, opts.synth);
    row.rho_synth = res.rho_star;
    row.status = "ok";
    if (!opts.out_dir.empty()) {
      const std::string cert_name = "cert_" + row.tag + ".txt";
      write_file(fs::path(opts.out_dir) / cert_name, emit_certificate(res.cert));
      write_file(fs::path(opts.out_dir) / ("alg_" + row.tag + ".txt"),
                 emit_algorithm(src, res.alg, res.rho_star, res.cert.lambda, cert_name));
    }
  } catch (const std::exception& e) {
    row.status = "failed";
    row.message = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepOptions& opts) {
  const std::vector<double> kappas = opts.kappas.empty() ? default_kappas() : opts.kappas;
  for (double k : kappas) {
    if (!(k > 1.0)) throw std::invalid_argument("run_sweep: every kappa must exceed 1");
  }
  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);
  std::vector<SweepRow> rows(kappas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < kappas.size(); i = next++) rows[i] = sweep_one(opts, kappas[i]);
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(kappas.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "kappa,status,rho_synth,rho_grad,rho_tm,rho_nesterov\n";
  for (const auto& r : rows) {
    os << csv_num(r.kappa) << ',' << r.status << ',' << csv_num(r.rho_synth) << ','
       << csv_num(r.rho_grad) << ',' << csv_num(r.rho_tm) << ',' << csv_num(r.rho_nesterov)
       << '\n';
  }
}

namespace {

struct Outputs {
  fs::path dir;
  std::string tag;

  void write_result(const std::string& command, const std::string& status, double rho,
                    double lambda, int n, int d) const {
    std::ostringstream os;
    os << "tag,command,status,rho,lambda,n,d\n";
    os << tag << ',' << command << ',' << status << ',' << csv_num(rho) << ',' << csv_num(lambda)
       << ',' << n << ',' << d << '\n';
    write_file(dir / "results.csv", os.str());
  }

  void write_algorithm(const ExperimentConfig& src, const AlgorithmParams& alg,
                       const RateCertificate& cert) const {
    const std::string cert_name = "cert_" + tag + ".txt";
    write_file(dir / cert_name, emit_certificate(cert));
    write_file(dir / ("alg_" + tag + ".txt"),
               emit_algorithm(src, alg, cert.rho, cert.lambda, cert_name));
  }
};

SynthesisOptions synth_options(const ExperimentConfig& c) {
  SynthesisOptions o;
  o.rho_tol = c.rho_tol;
  o.lambda_policy = c.lambda_policy;
  return o;
}

AlgorithmParams config_algorithm(const ExperimentConfig& c, const SectorBounds& s) {
  if (!c.A || !c.B || !c.C) throw ConfigError("this command needs A, B and C");
  return AlgorithmParams(*c.A, *c.B, *c.C, s);
}

void log_line(std::ostream& os, const char* fmt, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  os << buf << '\n';
}

int run_synth(const ExperimentConfig& c, const Outputs& o, std::ostream& log) {
  ExperimentConfig src = c;
  SynthesisResult res = [&] {
    if (c.command == Command::constrained) {
      if (!c.a_eq) throw ConfigError("constrained needs A_eq");
      src.sector = SectorKind::lagrangian;
      const SectorBounds base = build_base_sector(c);
      const Vector b = c.b_eq ? *c.b_eq : Vector::Zero(c.a_eq->rows());
      return synthesize_constrained(base, *c.a_eq, b, c.n, synth_options(c));
    }
    return synthesize(build_sector(c), c.n, synth_options(c));
  }();
  o.write_algorithm(src, res.alg, res.cert);
  o.write_result(to_string(c.command), "ok", res.rho_star, res.cert.lambda, res.alg.n(),
                 res.alg.d());
  log_line(log, "rho_star = %.12g", res.rho_star);
  log << "lambda = " << res.lambda_policy_used << '\n';
  return 0;
}

int run_analyze(const ExperimentConfig& c, const std::string& base_dir, const Outputs& o,
                std::ostream& log, std::ostream& err) {
  const SectorBounds s = build_sector(c);
  const AlgorithmParams alg = config_algorithm(c, s);
  const double residual = alg.constraint_residual();
  log_line(log, "constraint_residual = %.6g", residual);
  if (!(residual <= c.constraint_tol)) {
    err << "fixed-point constraint residual " << residual << " exceeds " << c.constraint_tol
        << '\n';
    o.write_result("analyze", "constraint_violation", NAN, NAN, alg.n(), alg.d());
    return 2;
  }
  if (!c.cert.empty()) {
    fs::path p(c.cert);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read certificate '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RateCertificate cert = parse_certificate(ss.str());
    const bool ok = verify_certificate(alg, s, cert);
    log_line(log, "certificate rho = %.12g, verified = %g", cert.rho, ok ? 1.0 : 0.0);
    log_line(log, "min eig P = %.6g, max eig analysis block = %.6g", cert.min_eig_p,
             cert.max_eig_analysis);
    o.write_result("analyze", ok ? "verified" : "rejected", cert.rho, cert.lambda, alg.n(), alg.d());
    return ok ? 0 : 2;
  }
  SolveOptions solver;
  std::optional<RateCertificate> cert;
  if (c.rho) {
    const CertifyOutcome co =
        c.lambda ? certify_lambdas(alg, s, *c.rho, {*c.lambda}, c.constraint_tol, solver)
                 : certify(alg, s, *c.rho, LambdaPolicy::grid, c.constraint_tol, solver);
    for (const auto& [lam, st] : co.attempts) {
      log << "lambda " << format_double(lam, 6) << ": " << to_string(st) << '\n';
    }
    if (!co.ok()) err << co.diagnostic << '\n';
    cert = co.cert;
  } else {
    const double lo = spectral_radius(alg.shifted());
    const RateSearch rs = find_certified_rate(alg, s, lo, 1.0 - 1e-4, c.rho_tol, c.constraint_tol);
    if (!rs.ok()) err << rs.diagnostic << '\n';
    cert = rs.cert;
  }
  if (!cert) {
    o.write_result("analyze", "infeasible", c.rho.value_or(NAN), NAN, alg.n(), alg.d());
    return 2;
  }
  o.write_algorithm(c, alg, *cert);
  o.write_result("analyze", "ok", cert->rho, cert->lambda, alg.n(), alg.d());
  log_line(log, "certified rho = %.12g, lambda = %.12g", cert->rho, cert->lambda);
  return 0;
}

int run_simulate(const ExperimentConfig& c, const Outputs& o, std::ostream& log) {
  const SectorBounds base = build_base_sector(c);
  const SectorBounds s = build_sector(c);
  const AlgorithmParams alg = c.A ? config_algorithm(c, s) : gradient_baseline(s).first;
  const int d0 = base.dim();
  Objective f = c.objective == "logcosh"
                    ? make_logcosh(base, c.seed)
                    : make_quadratic(base, c.theta, c.shift ? *c.shift : Vector::Zero(d0));
  if (c.sector == SectorKind::lagrangian) {
    const Vector b = c.b_eq ? *c.b_eq : Vector::Zero(c.a_eq->rows());
    f = make_lagrangian(f, base, *c.a_eq, b).first;
  }
  const Vector x0 = c.x0 ? *c.x0 : Vector::Ones(alg.n());
  const TrajectoryReport rep = simulate(alg, f, x0, c.k_max);
  std::ostringstream csv;
  write_trajectory_csv(csv, rep);
  write_file(o.dir / ("traj_" + o.tag + ".csv"), csv.str());
  const std::string status = rep.diverged ? "diverged" : (rep.converged ? "converged" : "not_converged");
  o.write_result("simulate", status, rep.fitted_rate, NAN, alg.n(), alg.d());
  log_line(log, "fitted_rate = %.12g over %g steps", rep.fitted_rate,
           static_cast<double>(rep.residual_norms.size() - 1));
  log << "status = " << status << '\n';
  return rep.diverged ? 2 : 0;
}

int run_sweep_command(const ExperimentConfig& c, const Outputs& o, std::ostream& log,
                      std::ostream& err) {
  SweepOptions so;
  so.mode = c.mode;
  so.m = c.m;
  so.kappas = c.kappas;
  so.n = c.n;
  if (c.a_eq) so.a_eq = *c.a_eq;
  so.synth = synth_options(c);
  so.jobs = c.jobs;
  so.out_dir = o.dir.string();
  const auto rows = run_sweep(so);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_file(o.dir / "results.csv", csv.str());
  bool all_ok = true;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      all_ok = false;
      err << "kappa " << format_double(r.kappa, 6) << ": " << r.message << '\n';
    }
  }
  log << rows.size() << " rows written\n";
  return all_ok ? 0 : 2;
}

int run_reduce(const ExperimentConfig& c, const Outputs& o, std::ostream& log, std::ostream& err) {
  if (c.target_n <= 0) throw ConfigError("reduce needs target_n");
  const SectorBounds s = build_sector(c);
  SynthesisResult full = [&] {
    if (!c.A) return synthesize(s, c.n, synth_options(c));
    const AlgorithmParams alg = config_algorithm(c, s);
    const RateSearch rs = find_certified_rate(alg, s, spectral_radius(alg.shifted()),
                                              c.rho.value_or(1.0 - 1e-4), c.rho_tol,
                                              c.constraint_tol);
    if (!rs.ok()) throw std::runtime_error("input algorithm could not be certified: " + rs.diagnostic);
    return SynthesisResult{.alg = alg, .cert = *rs.cert, .rho_star = rs.rho,
                           .bisection_trace = {}, .lambda_policy_used = "grid"};
  }();
  log_line(log, "full order rho = %.12g (n = %g)", full.rho_star, full.alg.n());
  const ReductionOutcome red = reduce_order(full, c.target_n, synth_options(c));
  if (red.hankel_singular_values.size() > 0) {
    log << "hankel singular values = " << format_vector(red.hankel_singular_values, 6) << '\n';
  }
  if (!red.ok()) {
    err << "reduction rejected: " << red.diagnostic << '\n';
    o.write_result("reduce", "rejected", NAN, NAN, c.target_n, full.alg.d());
    return 2;
  }
  o.write_algorithm(c, red.result->alg, red.result->cert);
  o.write_result("reduce", "ok", red.result->rho_star, red.result->cert.lambda, c.target_n,
                 full.alg.d());
  log_line(log, "reduced rho = %.12g", red.result->rho_star);
  return 0;
}

}  // namespace

int run_single(const ExperimentConfig& c, const std::string& base_dir, std::ostream& log,
               std::ostream& err) {
  try {
    Outputs o{fs::path(c.out), c.tag};
    fs::create_directories(o.dir);
    switch (c.command) {
      case Command::synth:
      case Command::constrained: return run_synth(c, o, log);
      case Command::analyze: return run_analyze(c, base_dir, o, log, err);
      case Command::simulate: return run_simulate(c, o, log);
      case Command::sweep: return run_sweep_command(c, o, log, err);
      case Command::reduce: return run_reduce(c, o, log, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace gradsynth
