#pragma once

#include "hyperfem/config.hpp"
#include "hyperfem/output.hpp"

#include <string>
#include <vector>

namespace hyperfem {

// In-memory results of one solve: the resolved configuration, the Newton
// trace, and per-step probe samples (outer index step, inner index probe).
struct RunOutputs {
  RunConfig config;
  NewtonResult newton;
  std::vector<std::string> probe_names;
  std::vector<int> probe_nodes;
  std::vector<std::vector<Vec3>> probe_displacement;
  std::vector<std::vector<double>> probe_pressure;
};

MixedElement make_run_element(const RunConfig& config);
Problem build_run_problem(const RunConfig& config);

// Solves the configured problem and samples the probes at every completed
// step.  Throws only for setup errors; solver failures come back in
// outputs.newton.
RunOutputs execute_run(const RunConfig& config);

// Full driver: parse, solve, write the config echo, probe and convergence
// CSVs and optional per-step VTK files next to output_prefix.  Returns 0 on
// full success, 1 otherwise (the failing step is reported on stderr).
int run(const std::string& config_path);

// Command line entry point (solve, gen-mesh, sweep-vol, check-tangents,
// legendre).
int cli_main(int argc, char** argv);

}  // namespace hyperfem
