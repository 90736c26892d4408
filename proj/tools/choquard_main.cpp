#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::int64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> grid;
  bool resolution_study = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file (flat schema)");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--workers", f.workers, "concurrent sweep rows");
  app->add_option("--grid", f.grid, "grid as N,L");
  app->add_flag("--resolution-study", f.resolution_study, "re-solve at 2N, 1.5L and cross-check dilations");
  app->add_option("--set", f.sets, "override a config key: key=value")->take_all();
}

choquard::cli::RunConfig build_config(const CommonFlags& f) {
  using namespace choquard::cli;
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  for (const auto& s : f.sets) apply_override(c, s);
  if (f.out) c.out = *f.out;
  if (f.seed) apply_key(c, "seed", json(*f.seed));
  if (f.workers) apply_key(c, "workers", json(*f.workers));
  if (f.grid) apply_grid_flag(c, *f.grid);
  if (f.resolution_study) c.solver.resolution_study = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace choquard::cli;
  CLI::App app{"Normalized ground states of the mixed local/nonlocal Choquard equation"};
  app.set_version_flag("--version", std::string(choquard::version_string));
  app.require_subcommand(1);

  CommonFlags solve_f, classify_f, verify_f, oracle_f, sweep_f;
  auto* solve = app.add_subcommand("solve", "run the gradient flow and write report, history and field");
  add_common(solve, solve_f);
  auto* classify = app.add_subcommand("classify", "emit critical exponents, regime label and thresholds");
  add_common(classify, classify_f);
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify, verify_f);
  std::optional<std::string> suite;
  bool corrupt = false;
  verify->add_option("--suite", suite, "all, constants, operators, functionals, inequalities, oracle-1d");
  verify->add_flag("--corrupt-multiplier", corrupt, "fault injection: perturb one multiplier entry");
  auto* oracle = app.add_subcommand("oracle", "run the operator oracles only");
  add_common(oracle, oracle_f);
  int dim = 3;
  bool oracle_corrupt = false;
  oracle->add_option("--dim", dim, "3: operator and closed-form oracles; 1: 1-D quadrature oracles");
  oracle->add_flag("--corrupt-multiplier", oracle_corrupt, "fault injection: perturb one multiplier entry");
  auto* sweep = app.add_subcommand("sweep", "solve over the Cartesian product of the sweep axes");
  add_common(sweep, sweep_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_error;
  }

  try {
    if (*solve) return run_solve(build_config(solve_f), std::cout);
    if (*classify) return run_classify(build_config(classify_f), std::cout);
    if (*verify) {
      RunConfig c = build_config(verify_f);
      if (suite) c.suite = *suite;
      if (corrupt) c.corrupt_multiplier = true;
      return run_verify(c, std::cout);
    }
    if (*oracle) {
      RunConfig c = build_config(oracle_f);
      if (oracle_corrupt) c.corrupt_multiplier = true;
      return run_oracle(c, dim, std::cout);
    }
    if (*sweep) return run_sweep(build_config(sweep_f), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}
