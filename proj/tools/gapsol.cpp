// gapsol command-line driver.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gapsol/gapsol.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gap-soliton ground states of periodic nonlinear Schrodinger equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string field_path;
  long long seed = -1;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI configuration file")->required();
    return sub;
  };
  add("band", "Bloch bands of L and the gap at 0");
  add("gapmap", "frequency gap map of a photonic medium");
  auto* solve = add("solve", "ground state on one cell");
  solve->add_option("--seed", seed, "seed for the restart perturbations");
  add("ksweep", "ground states on growing cells");
  add("bifurcate", "gap solitons along an omega list toward a gap edge");
  auto* verify = add("verify", "re-check a dumped field as a critical point");
  verify->add_option("--field", field_path, "field dump (.bin with .json sidecar)")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  gapsol::RunConfig cfg;
  try {
    cfg = gapsol::parse_config(config_path);
    if (seed >= 0) {
      cfg.solver.seed = static_cast<std::uint64_t>(seed);
      cfg.entries["solver.seed"] = std::to_string(seed);
    }
  } catch (const gapsol::Error& e) {
    std::cerr << "gapsol " << cmd << ": " << e.what() << "\n";
    return gapsol::is_refusal(e.code()) ? 2 : 1;
  }
  gapsol::CommandOptions opts;
  if (!field_path.empty()) opts.field = field_path;
  return gapsol::run_command(cmd, cfg, opts, std::cout, std::cerr);
}
