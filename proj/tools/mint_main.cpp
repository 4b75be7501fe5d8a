// mint [-- multiplicative-integration holonomy engine, command line front end]
//
// Exit codes: 0 all checks pass, 1 at least one check failed,
// 2 usage / scenario schema / name-resolution errors.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mint/verify.hpp"

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out;
  std::string csv_dir;
  int levels = 0;
  double tol = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("scenario", o.scenario_path, "scenario JSON file")->required();
  cmd->add_option("--out", o.out, "write the report JSON to this file (default stdout)");
  cmd->add_option("--csv", o.csv_dir, "write per-level CSV tables into this directory");
  cmd->add_option("--levels", o.levels, "override the scenario refinement level");
  cmd->add_option("--tol", o.tol, "override the scenario tolerance");
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_flag("--deterministic", o.deterministic,
                "byte-stable reports (drops wall-clock timing)");
  cmd->add_option("--jobs", o.jobs, "number of worker threads for independent kites");
}

int run_command(const CommonOpts& o, const std::string& name,
                mint::Report (*runner)(const mint::Scenario&)) {
  mint::Scenario sc = mint::Scenario::from_file(o.scenario_path);
  if (o.levels > 0) sc.run().levels = o.levels;
  if (o.tol > 0) sc.run().tol = o.tol;
  if (o.seed_set) sc.run().seed = o.seed;
  if (o.deterministic) sc.run().deterministic = true;
  if (o.jobs > 0) sc.run().jobs = o.jobs;
  mint::Report rep = runner(sc);
  rep.command = name;
  std::string text = rep.to_json_text();
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) {
      std::cerr << "cannot open output file: " << o.out << "\n";
      return 2;
    }
    f << text;
  }
  if (!o.csv_dir.empty()) rep.write_csv(o.csv_dir);
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonabelian path and surface holonomy via multiplicative integration"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    mint::Report (*runner)(const mint::Scenario&);
  };
  const Cmd cmds[] = {
      {"validate", "crossed-module axioms and fake-flatness", &mint::run_validate},
      {"path", "path multiplicative integral with convergence diagnostics", &mint::run_path},
      {"surface", "surface multiplicative integral over a kite", &mint::run_surface},
      {"functor", "transport axioms: composition, inversion, boundary, degeneracy",
       &mint::run_functor_suite},
      {"stokes2", "boundary compatibility decay for a kite", &mint::run_stokes2},
      {"stokes3", "local and global 3-dimensional Stokes checks", &mint::run_stokes_suite},
      {"wz", "abelian flux quantization sweep on a closed surface", &mint::run_wz_suite},
      {"gauge", "gauge-variation finite-difference checks", &mint::run_gauge_suite},
      {"converge", "per-level refinement tables for the named objects", &mint::run_converge},
  };

  std::vector<std::pair<CLI::App*, CommonOpts>> parsed;
  parsed.reserve(std::size(cmds));
  for (const auto& c : cmds) {
    parsed.emplace_back(app.add_subcommand(c.name, c.help), CommonOpts{});
  }
  for (std::size_t i = 0; i < std::size(cmds); ++i) add_common(parsed[i].first, parsed[i].second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit 2; --help exits 0
  }

  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    if (!parsed[i].first->parsed()) continue;
    auto& o = parsed[i].second;
    o.seed_set = parsed[i].first->count("--seed") > 0;
    try {
      return run_command(o, cmds[i].name, cmds[i].runner);
    } catch (const mint::scenario_error& e) {
      std::cerr << "scenario error: " << e.what() << "\n";
      return 2;
    } catch (const mint::parse_error& e) {
      std::cerr << "expression error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
