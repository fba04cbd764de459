// gradsynth: design and certify first-order algorithms from a key=value config.
//
//   gradsynth synth --config run.cfg --out results/
//   gradsynth analyze --config results/alg_run.txt

#include "gradsynth/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho_tol;
  std::optional<int> jobs;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key = value configuration file");
  sub->add_option("--out", f.out, "output directory (overrides 'out')");
  sub->add_option("--seed", f.seed, "random seed (overrides 'seed')");
  sub->add_option("--rho-tol", f.rho_tol, "bisection tolerance on the rate")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", f.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and certify gradient-based algorithms via linear matrix inequalities"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"synth", "analyze", "simulate", "sweep", "constrained", "reduce"}) {
    add_flags(app.add_subcommand(name, std::string("run the ") + name + " command"), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  using namespace gradsynth;
  ExperimentConfig cfg;
  std::string base_dir = ".";
  try {
    if (!flags.config.empty()) {
      cfg = load_config(flags.config);
      base_dir = std::filesystem::path(flags.config).parent_path().string();
      if (base_dir.empty()) base_dir = ".";
    }
    cfg.command = parse_command(command);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  if (flags.out) cfg.out = *flags.out;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.rho_tol) cfg.rho_tol = *flags.rho_tol;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  return run_single(cfg, base_dir, std::cout, std::cerr);
}
