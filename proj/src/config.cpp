#include "gradsynth/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace gradsynth {

std::string to_string(Command c) {
  switch (c) {
    case Command::synth: return "synth";
    case Command::analyze: return "analyze";
    case Command::simulate: return "simulate";
    case Command::sweep: return "sweep";
    case Command::constrained: return "constrained";
    case Command::reduce: return "reduce";
  }
  return "unknown";
}

std::string to_string(SectorKind k) {
  switch (k) {
    case SectorKind::scalar: return "scalar";
    case SectorKind::matrix: return "matrix";
    case SectorKind::structured: return "structured";
    case SectorKind::lagrangian: return "lagrangian";
  }
  return "unknown";
}

Command parse_command(const std::string& s) {
  for (auto c : {Command::synth, Command::analyze, Command::simulate, Command::sweep,
                 Command::constrained, Command::reduce}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + s + "'");
}

namespace {

SectorKind parse_sector(const std::string& s) {
  for (auto k : {SectorKind::scalar, SectorKind::matrix, SectorKind::structured,
                 SectorKind::lagrangian}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown sector kind '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

void require_symmetric(const std::string& key, const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("key '" + key + "': matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("key '" + key + "': matrix must be symmetric");
  }
}

bool same_matrix(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

bool same_vector(const std::optional<Vector>& a, const std::optional<Vector>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() && *a == *b;
}

}  // namespace

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_matrix(const Matrix& m, int digits) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += " ";
      out += format_double(m(i, j), digits);
    }
  }
  return out + "]";
}

std::string format_vector(const Vector& v, int digits) {
  return format_matrix(Matrix(v.transpose()), digits);
}

Matrix parse_matrix(const std::string& s) {
  const std::string t = trim(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ConfigError("matrix must be written as [a b; c d], got '" + s + "'");
  }
  std::vector<std::vector<double>> rows;
  std::stringstream body(t.substr(1, t.size() - 2));
  std::string row;
  while (std::getline(body, row, ';')) {
    for (char& ch : row) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream rs(row);
    std::vector<double> vals;
    std::string tok;
    while (rs >> tok) vals.push_back(parse_double("matrix entry", tok));
    rows.push_back(std::move(vals));
  }
  if (rows.size() == 1 && rows[0].empty()) return Matrix(0, 0);
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  if (cols == 0) throw ConfigError("matrix has an empty row: '" + s + "'");
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError("matrix rows have different lengths: '" + s + "'");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Vector parse_vector(const std::string& s) {
  const Matrix m = parse_matrix(s);
  if (m.rows() > 1 && m.cols() > 1) throw ConfigError("expected a vector, got a matrix: '" + s + "'");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    auto as_int = [&] { return static_cast<int>(parse_int(key, value)); };
    auto as_double = [&] { return parse_double(key, value); };
    auto as_matrix = [&] {
      try {
        return parse_matrix(value);
      } catch (const ConfigError& e) {
        throw ConfigError("key '" + key + "': " + e.what());
      }
    };
    auto as_vector = [&] {
      try {
        return parse_vector(value);
      } catch (const ConfigError& e) {
        throw ConfigError("key '" + key + "': " + e.what());
      }
    };
    if (key == "command") c.command = parse_command(value);
    else if (key == "sector") c.sector = parse_sector(value);
    else if (key == "m") c.m = as_double();
    else if (key == "l") c.l = as_double();
    else if (key == "dim") c.dim = as_int();
    else if (key == "M") c.M = as_matrix();
    else if (key == "L") c.L = as_matrix();
    else if (key == "A_eq") c.a_eq = as_matrix();
    else if (key == "b_eq") c.b_eq = as_vector();
    else if (key == "n") c.n = as_int();
    else if (key == "rho_tol") c.rho_tol = as_double();
    else if (key == "lambda_policy") {
      try {
        c.lambda_policy = parse_lambda_policy(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "seed") {
      const long long v = parse_int(key, value);
      if (v < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "out") c.out = value;
    else if (key == "tag") c.tag = value;
    else if (key == "jobs") c.jobs = as_int();
    else if (key == "A") c.A = as_matrix();
    else if (key == "B") c.B = as_matrix();
    else if (key == "C") c.C = as_matrix();
    else if (key == "rho") c.rho = as_double();
    else if (key == "lambda") c.lambda = as_double();
    else if (key == "constraint_tol") c.constraint_tol = as_double();
    else if (key == "cert") c.cert = value;
    else if (key == "objective") c.objective = value;
    else if (key == "theta") c.theta = as_double();
    else if (key == "shift") c.shift = as_vector();
    else if (key == "x0") c.x0 = as_vector();
    else if (key == "k_max") c.k_max = as_int();
    else if (key == "mode") c.mode = value;
    else if (key == "kappas") {
      const Vector k = as_vector();
      c.kappas.assign(k.data(), k.data() + k.size());
    } else if (key == "target_n") c.target_n = as_int();
    else throw ConfigError("unknown key '" + key + "'");
  }

  if (c.M) require_symmetric("M", *c.M);
  if (c.L) require_symmetric("L", *c.L);
  if (c.dim < 1) throw ConfigError("dim must be positive");
  if (c.n < 0) throw ConfigError("n must be non-negative");
  if (!(c.rho_tol > 0.0)) throw ConfigError("rho_tol must be positive");
  if (c.jobs < 1) throw ConfigError("jobs must be positive");
  if (c.k_max < 1) throw ConfigError("k_max must be positive");
  if (c.target_n < 0) throw ConfigError("target_n must be non-negative");
  if (c.objective != "quadratic" && c.objective != "logcosh") {
    throw ConfigError("objective must be 'quadratic' or 'logcosh'");
  }
  if (c.mode != "scalar" && c.mode != "structured" && c.mode != "constrained") {
    throw ConfigError("mode must be 'scalar', 'structured' or 'constrained'");
  }
  for (double k : c.kappas) {
    if (!(k > 1.0)) throw ConfigError("every kappa must exceed 1");
  }
  if (c.tag.empty() || c.tag.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                           std::string::npos) {
    throw ConfigError("tag may only contain letters, digits, '_', '.' and '-'");
  }
  if (c.sector == SectorKind::matrix && (!c.M || !c.L)) {
    throw ConfigError("sector = matrix needs both M and L");
  }
  if (c.sector == SectorKind::lagrangian && !c.a_eq) {
    throw ConfigError("sector = lagrangian needs A_eq");
  }
  if (c.a_eq && c.b_eq && c.b_eq->size() != c.a_eq->rows()) {
    throw ConfigError("b_eq length must equal the number of rows of A_eq");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  kv("command", to_string(c.command));
  kv("sector", to_string(c.sector));
  kv("m", format_double(c.m));
  kv("l", format_double(c.l));
  kv("dim", std::to_string(c.dim));
  if (c.M) kv("M", format_matrix(*c.M));
  if (c.L) kv("L", format_matrix(*c.L));
  if (c.a_eq) kv("A_eq", format_matrix(*c.a_eq));
  if (c.b_eq) kv("b_eq", format_vector(*c.b_eq));
  kv("n", std::to_string(c.n));
  kv("rho_tol", format_double(c.rho_tol));
  kv("lambda_policy", to_string(c.lambda_policy));
  kv("seed", std::to_string(c.seed));
  kv("out", c.out);
  kv("tag", c.tag);
  kv("jobs", std::to_string(c.jobs));
  if (c.A) kv("A", format_matrix(*c.A));
  if (c.B) kv("B", format_matrix(*c.B));
  if (c.C) kv("C", format_matrix(*c.C));
  if (c.rho) kv("rho", format_double(*c.rho));
  if (c.lambda) kv("lambda", format_double(*c.lambda));
  kv("constraint_tol", format_double(c.constraint_tol));
  if (!c.cert.empty()) kv("cert", c.cert);
  kv("objective", c.objective);
  kv("theta", format_double(c.theta));
  if (c.shift) kv("shift", format_vector(*c.shift));
  if (c.x0) kv("x0", format_vector(*c.x0));
  kv("k_max", std::to_string(c.k_max));
  kv("mode", c.mode);
  if (!c.kappas.empty()) {
    kv("kappas", format_vector(Eigen::Map<const Vector>(c.kappas.data(),
                                                        static_cast<Eigen::Index>(c.kappas.size()))));
  }
  kv("target_n", std::to_string(c.target_n));
  return os.str();
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.command == b.command && a.sector == b.sector && a.m == b.m && a.l == b.l &&
         a.dim == b.dim && same_matrix(a.M, b.M) && same_matrix(a.L, b.L) &&
         same_matrix(a.a_eq, b.a_eq) && same_vector(a.b_eq, b.b_eq) && a.n == b.n &&
         a.rho_tol == b.rho_tol && a.lambda_policy == b.lambda_policy && a.seed == b.seed &&
         a.out == b.out && a.tag == b.tag && a.jobs == b.jobs && same_matrix(a.A, b.A) &&
         same_matrix(a.B, b.B) && same_matrix(a.C, b.C) && a.rho == b.rho &&
         a.lambda == b.lambda && a.constraint_tol == b.constraint_tol && a.cert == b.cert &&
         a.objective == b.objective && a.theta == b.theta && same_vector(a.shift, b.shift) &&
         same_vector(a.x0, b.x0) && a.k_max == b.k_max && a.mode == b.mode &&
         a.kappas == b.kappas && a.target_n == b.target_n;
}

SectorBounds build_base_sector(const ExperimentConfig& c) {
  switch (c.sector) {
    case SectorKind::scalar: return SectorBounds::scalar(c.m, c.l, c.dim);
    case SectorKind::structured: return SectorBounds::structured(c.m, c.l);
    case SectorKind::matrix: return SectorBounds(SymMatrix(*c.M), SymMatrix(*c.L));
    case SectorKind::lagrangian:
      if (c.M && c.L) return SectorBounds(SymMatrix(*c.M), SymMatrix(*c.L));
      return SectorBounds::scalar(c.m, c.l, c.dim);
  }
  throw ConfigError("unknown sector kind");
}

SectorBounds build_sector(const ExperimentConfig& c) {
  const SectorBounds base = build_base_sector(c);
  if (c.sector != SectorKind::lagrangian) return base;
  return lagrangian_bounds(base, *c.a_eq);
}

std::string emit_algorithm(const ExperimentConfig& src, const AlgorithmParams& alg, double rho,
                           double lambda, const std::string& cert_file) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  kv("command", "analyze");
  kv("sector", to_string(src.sector));
  switch (src.sector) {
    case SectorKind::scalar:
      kv("m", format_double(src.m));
      kv("l", format_double(src.l));
      kv("dim", std::to_string(src.dim));
      break;
    case SectorKind::structured:
      kv("m", format_double(src.m));
      kv("l", format_double(src.l));
      break;
    case SectorKind::matrix:
      kv("M", format_matrix(*src.M));
      kv("L", format_matrix(*src.L));
      break;
    case SectorKind::lagrangian:
      if (src.M && src.L) {
        kv("M", format_matrix(*src.M));
        kv("L", format_matrix(*src.L));
      } else {
        kv("m", format_double(src.m));
        kv("l", format_double(src.l));
        kv("dim", std::to_string(src.dim));
      }
      kv("A_eq", format_matrix(*src.a_eq));
      if (src.b_eq) kv("b_eq", format_vector(*src.b_eq));
      break;
  }
  kv("A", format_matrix(alg.A));
  kv("B", format_matrix(alg.B));
  kv("C", format_matrix(alg.C));
  kv("rho", format_double(rho));
  kv("lambda", format_double(lambda));
  if (!cert_file.empty()) kv("cert", cert_file);
  return os.str();
}

std::string emit_certificate(const RateCertificate& cert) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  kv("rho", format_double(cert.rho));
  kv("lambda", format_double(cert.lambda));
  kv("r", format_double(cert.r));
  kv("margin", format_double(cert.margin));
  kv("verified", cert.verified ? "true" : "false");
  kv("min_eig_p", format_double(cert.min_eig_p));
  kv("max_eig_analysis", format_double(cert.max_eig_analysis));
  kv("P", format_matrix(cert.P));
  return os.str();
}

RateCertificate parse_certificate(const std::string& text) {
  RateCertificate cert;
  bool have_p = false, have_rho = false;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "rho") {
      cert.rho = parse_double(key, value);
      have_rho = true;
    } else if (key == "lambda") cert.lambda = parse_double(key, value);
    else if (key == "r") cert.r = parse_double(key, value);
    else if (key == "margin") cert.margin = parse_double(key, value);
    else if (key == "verified") cert.verified = value == "true";
    else if (key == "min_eig_p") cert.min_eig_p = parse_double(key, value);
    else if (key == "max_eig_analysis") cert.max_eig_analysis = parse_double(key, value);
    else if (key == "P") {
      cert.P = parse_matrix(value);
      require_symmetric("P", cert.P);
      have_p = true;
    } else {
      throw ConfigError("unknown certificate key '" + key + "'");
    }
  }
  if (!have_p || !have_rho) throw ConfigError("certificate needs at least P and rho");
  return cert;
}

}  // namespace gradsynth
