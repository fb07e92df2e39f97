// hdivsym command-line front end.
//
//   hdivsym verify      --dim 2 --degree 3
//   hdivsym convergence --dim 2 --degree 3 --levels 4 --seed 7 --out conv.csv
//   hdivsym infsup      --dim 2 --degree 3 --levels 3
//   hdivsym solve       --problem problem.json --out solution.json

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "hdivsym/cli.hpp"

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("HDIVSYM_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"Mixed symmetric-stress / discontinuous-displacement finite"
               " elements on simplicial meshes in R^n"};
  app.require_subcommand(1);

  hdivsym::RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", cfg.n, "space dimension n >= 1");
    sub->add_option("--degree", cfg.k, "stress polynomial degree k >= 2");
    sub->add_option("--mu", cfg.mu, "Lame parameter mu > 0");
    sub->add_option("--lambda", cfg.lambda, "Lame parameter lambda >= 0");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--out", cfg.out, "output file (stdout when omitted)");
    sub->add_option("--out-json", cfg.out_json, "JSON report path");
    sub->add_option("--cell-budget", cfg.cell_budget,
                    "maximum number of mesh cells");
    sub->add_flag("--allow-low-degree", cfg.allow_low_degree,
                  "permit k <= n (stability not guaranteed)");
    sub->add_flag("--deterministic-reduction", cfg.deterministic_reduction,
                  "canonical accumulation order for bitwise reproducibility");
  };

  CLI::App* verify = app.add_subcommand(
      "verify", "run the element-level property suite for (dim, degree)");
  add_common(verify);
  verify->add_flag("--exact-cross-checks", cfg.exact_cross_checks,
                   "larger sample counts and extra oracle cross-checks");

  CLI::App* conv = app.add_subcommand(
      "convergence", "manufactured-solution convergence-rate study");
  add_common(conv);
  conv->add_option("--levels", cfg.levels, "number of refinement levels");

  CLI::App* infsup = app.add_subcommand(
      "infsup", "discrete inf-sup constant per refinement level");
  add_common(infsup);
  infsup->add_option("--levels", cfg.levels, "number of refinement levels");
  infsup->add_option("--floor", cfg.infsup_floor, "minimum admissible beta");
  infsup->add_option("--ratio-bound", cfg.infsup_ratio_bound,
                     "maximum admissible max/min beta ratio");

  CLI::App* solve = app.add_subcommand(
      "solve", "solve a problem file and write the discrete solution");
  add_common(solve);
  solve->add_option("--problem", cfg.problem_file,
                    "problem description (JSON)");
  solve->add_option("--resolution", cfg.resolution,
                    "mesh subdivisions per axis (overridden by the file)");
  solve->add_option("--matrices", cfg.matrix_prefix,
                    "export assembled matrices as <prefix>_{A,B,S,Mu}.mtx");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  if (verify->parsed()) return hdivsym::cmd_verify(cfg);
  if (conv->parsed()) return hdivsym::cmd_convergence(cfg);
  if (infsup->parsed()) return hdivsym::cmd_infsup(cfg);
  if (solve->parsed()) return hdivsym::cmd_solve(cfg);
  return 2;
}
