#include "hyperfem/runner.hpp"

#include "hyperfem/verification.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hyperfem {

namespace {

MaterialModel make_run_material(const RunConfig& config) {
  MaterialModel material;
  material.dev.kind = config.deviatoric;
  material.dev.mu = shear_modulus(config.E, config.nu);
  material.dev.Im = config.Im;
  material.vol.id = config.volumetric;
  material.vol.kappa = bulk_modulus(config.E, config.nu);
  material.nu = config.nu;
  return material;
}

AssemblyMode resolve_mode(const RunConfig& config, const Problem& problem) {
  switch (config.linear_system) {
    case SystemChoice::automatic: return default_assembly_mode(problem);
    case SystemChoice::condensed: return AssemblyMode::condensed;
    case SystemChoice::saddle: return AssemblyMode::saddle;
  }
  throw ConfigError("resolve_mode: unknown linear_system choice");
}

RunOutputs execute_on(const RunConfig& config, const Problem& problem) {
  RunOutputs out;
  out.config = config;

  LoadProgram program;
  if (config.factors.empty()) {
    program = LoadProgram::uniform(config.n_steps);
  } else {
    program.n_steps = config.n_steps;
    program.factors = config.factors;
  }

  out.newton = newton_solve(problem, program, config.solver,
                            resolve_mode(config, problem));

  for (const ProbeSpec& probe : config.probes) {
    out.probe_names.push_back(probe.name);
    out.probe_nodes.push_back(nearest_node(problem.mesh, probe.point));
  }
  const FieldSampler sampler(problem);
  for (const StepRecord& record : out.newton.log.steps) {
    if (!record.converged) break;
    std::vector<Vec3> displacement;
    std::vector<double> pressure;
    for (int node : out.probe_nodes) {
      displacement.push_back(sampler.displacement(record.u, node));
      pressure.push_back(sampler.pressure(record.p, node));
    }
    out.probe_displacement.push_back(std::move(displacement));
    out.probe_pressure.push_back(std::move(pressure));
  }
  return out;
}

BoxMeshSpec parse_box_spec(const std::string& spec) {
  const std::string prefix = "box:";
  if (spec.compare(0, prefix.size(), prefix) != 0) {
    throw ConfigError("gen-mesh: spec must start with 'box:', got '" + spec + "'");
  }
  BoxMeshSpec box;
  std::istringstream in(spec.substr(prefix.size()));
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    if (token == "tet") {
      box.tetrahedral = true;
      continue;
    }
    if (token == "quadratic") {
      box.tetrahedral = true;
      box.quadratic = true;
      continue;
    }
    const size_t eq = token.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("gen-mesh: expected key=value in spec, got '" + token + "'");
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    char* end = nullptr;
    const double number = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      throw ConfigError("gen-mesh: bad number '" + value + "' for " + key);
    }
    if (key == "nx") box.nx = static_cast<int>(number);
    else if (key == "ny") box.ny = static_cast<int>(number);
    else if (key == "nz") box.nz = static_cast<int>(number);
    else if (key == "lx") box.lx = number;
    else if (key == "ly") box.ly = number;
    else if (key == "lz") box.lz = number;
    else if (key == "patch_x") box.patch_x = number;
    else if (key == "patch_y") box.patch_y = number;
    else throw ConfigError("gen-mesh: unknown spec key '" + key + "'");
  }
  return box;
}

int run_gen_mesh(const std::string& spec, const std::string& out_path) {
  const Mesh mesh = generate_block_mesh(parse_box_spec(spec));
  write_mesh(mesh, out_path);
  std::printf("%zu nodes, %zu cells -> %s\n", mesh.nodes.size(), mesh.cells.size(),
              out_path.c_str());
  return 0;
}

int run_sweep(const std::string& out_path, double kappa) {
  const std::vector<VolId> ids = {VolId::V1, VolId::V2, VolId::V3, VolId::V4,
                                  VolId::V5, VolId::V6, VolId::V7, VolId::V8};
  const VolumetricSweep narrow = volumetric_sweep(ids, kappa, 0.95, 1.05, 101);
  const VolumetricSweep wide = volumetric_sweep(ids, kappa, 0.05, 5.0, 100);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("sweep-vol: cannot write " + out_path);
  out << "window,J";
  for (VolId id : ids) out << ",V" << static_cast<int>(id);
  out << "\n";
  const auto emit = [&](const char* window, const VolumetricSweep& sweep) {
    char buffer[64];
    for (size_t i = 0; i < sweep.J.size(); ++i) {
      out << window;
      std::snprintf(buffer, sizeof buffer, "%.17g", sweep.J[i]);
      out << "," << buffer;
      for (int j = 0; j < sweep.p.cols(); ++j) {
        std::snprintf(buffer, sizeof buffer, "%.17g", sweep.p(static_cast<int>(i), j));
        out << "," << buffer;
      }
      out << "\n";
    }
  };
  emit("near", narrow);
  emit("wide", wide);
  if (!out) throw Error("sweep-vol: write failed for " + out_path);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int run_check_tangents(const std::string& config_path) {
  const RunConfig config = parse_run_config(config_path);
  const MixedElement element = make_run_element(config);
  const MaterialModel material = make_run_material(config);

  BoxMeshSpec box;
  box.tetrahedral = config.element != ElementChoice::hex8_p0;
  box.quadratic = box.tetrahedral;
  const Mesh mesh = generate_block_mesh(box);
  const Cell& cell = mesh.cells.front();

  ElementState state;
  state.X.resize(element.n_disp(), 3);
  for (int a = 0; a < element.n_disp(); ++a) {
    state.X.row(a) = mesh.nodes[cell.nodes[a]].transpose();
  }
  std::mt19937 rng(20240815);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  state.u = VecX::Zero(3 * element.n_disp());
  for (int i = 0; i < state.u.size(); ++i) state.u[i] = 0.05 * unit(rng);
  const bool three = config.formulation == FormulationKind::three_field;
  state.p = VecX::Zero(three ? 1 : element.n_pres());
  for (int i = 0; i < state.p.size(); ++i) state.p[i] = 0.2 * config.E * unit(rng);
  state.theta = three ? 0.05 * unit(rng) : 0.0;

  std::vector<QuadHistory> history(
      element.n_qp(),
      config.formulation == FormulationKind::proposed_consistent
          ? update_history(material.vol, 1.0)
          : incompressible_history());

  const TangentCheckResult check =
      fd_tangent_check(config.formulation, element, state, material, history);

  std::printf("Kuu  %.3e\nKup  %.3e\nKpu  %.3e\nKpp  %.3e\n", check.Kuu, check.Kup,
              check.Kpu, check.Kpp);
  if (three) {
    std::printf("Kut  %.3e\nKtu  %.3e\nKtp  %.3e\nKtt  %.3e\n", check.Kut, check.Ktu,
                check.Ktp, check.Ktt);
  }
  const bool ok = check.worst <= 1e-5;
  std::printf("worst %.3e -> %s\n", check.worst, ok ? "ok" : "MISMATCH");
  return ok ? 0 : 1;
}

int run_legendre(const std::string& id_text, double kappa, double p, bool force_grid) {
  if (id_text.size() != 2 || id_text[0] != 'V' || id_text[1] < '1' || id_text[1] > '8') {
    throw ConfigError("legendre: vol-id must be V1 .. V8, got '" + id_text + "'");
  }
  const VolumetricModel vol{static_cast<VolId>(id_text[1] - '0'), kappa};
  const LegendreResult result = legendre_transform(vol, p, force_grid);
  std::printf("Gamma = %.17g\n", result.Gamma);
  std::printf("J* = %.17g\n", result.J_star);
  std::printf("method = %s\n", result.method == LegendreResult::Method::closed_form
                                   ? "closed_form"
                                   : "grid_newton");
  std::printf("stationary points:");
  for (double root : result.stationary_points) std::printf(" %.17g", root);
  std::printf("\n");
  return 0;
}

}  // namespace

MixedElement make_run_element(const RunConfig& config) {
  switch (config.element) {
    case ElementChoice::hex8_p0: return MixedElement::hex8_p0();
    case ElementChoice::tet10_p1: return MixedElement::tet10_p1(BasisKind::lagrange);
    case ElementChoice::tet10_p1_bernstein:
      return MixedElement::tet10_p1(BasisKind::bernstein);
  }
  throw ConfigError("make_run_element: unknown element choice");
}

Problem build_run_problem(const RunConfig& config) {
  Mesh mesh = config.mesh_from_file ? read_mesh(config.mesh_path)
                                    : generate_block_mesh(config.box);
  return build_problem(std::move(mesh), make_run_element(config),
                       make_run_material(config), config.formulation,
                       config.dirichlet, config.neumann);
}

RunOutputs execute_run(const RunConfig& config) {
  const Problem problem = build_run_problem(config);
  return execute_on(config, problem);
}

int run(const std::string& config_path) {
  const RunConfig config = parse_run_config(config_path);
  const std::filesystem::path prefix(config.output_prefix);
  if (prefix.has_parent_path()) {
    std::filesystem::create_directories(prefix.parent_path());
  }

  const Problem problem = build_run_problem(config);
  const RunOutputs outputs = execute_on(config, problem);

  write_config_echo(config);

  std::vector<ProbeRow> rows;
  for (size_t s = 0; s < outputs.probe_displacement.size(); ++s) {
    const StepRecord& record = outputs.newton.log.steps[s];
    for (size_t q = 0; q < outputs.probe_names.size(); ++q) {
      rows.push_back({record.step, record.load_factor, outputs.probe_names[q],
                      outputs.probe_displacement[s][q], outputs.probe_pressure[s][q]});
    }
  }
  write_probe_csv(config.output_prefix + ".probes.csv", rows);
  write_convergence_csv(config.output_prefix + ".convergence.csv", outputs.newton.log);

  if (config.write_vtk) {
    for (const StepRecord& record : outputs.newton.log.steps) {
      if (!record.converged) break;
      write_vtk(problem, record.u, record.p,
                config.output_prefix + ".step_" + std::to_string(record.step) + ".vtk");
    }
  }

  if (!outputs.newton.success) {
    std::fprintf(stderr, "solve failed at step %d: %s\n", outputs.newton.failed_step,
                 outputs.newton.message.c_str());
    return 1;
  }
  const StepRecord& last = outputs.newton.log.steps.back();
  std::printf("completed %zu steps, final residual %.3e after %d iterations\n",
              outputs.newton.log.steps.size(),
              last.residual_norms.empty() ? 0.0 : last.residual_norms.back(),
              last.iterations);
  return 0;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"mixed displacement-pressure finite strain solver"};
  app.require_subcommand(1);

  std::string solve_config;
  CLI::App* solve = app.add_subcommand("solve", "solve a configured problem");
  solve->add_option("config", solve_config, "config file path")->required();

  std::string mesh_spec, mesh_out;
  CLI::App* gen = app.add_subcommand("gen-mesh", "generate a structured box mesh");
  gen->add_option("spec", mesh_spec,
                  "box:nx=..,ny=..,nz=..[,lx=..][,ly=..][,lz=..][,tet|,quadratic]"
                  "[,patch_x=..][,patch_y=..]")
      ->required();
  gen->add_option("out", mesh_out, "output mesh path")->required();

  std::string sweep_out;
  double sweep_kappa = 1.0;
  CLI::App* sweep =
      app.add_subcommand("sweep-vol", "tabulate volumetric pressure responses");
  sweep->add_option("out", sweep_out, "output CSV path")->required();
  sweep->add_option("--kappa", sweep_kappa, "bulk modulus");

  std::string check_config;
  CLI::App* check = app.add_subcommand(
      "check-tangents", "compare analytic element tangents with finite differences");
  check->add_option("config", check_config, "config file path")->required();

  std::string legendre_id;
  double legendre_kappa = 0.0, legendre_p = 0.0;
  bool legendre_grid = false;
  CLI::App* legendre =
      app.add_subcommand("legendre", "complementary volumetric potential");
  legendre->add_option("vol-id", legendre_id, "V1 .. V8")->required();
  legendre->add_option("kappa", legendre_kappa, "bulk modulus")->required();
  legendre->add_option("p", legendre_p, "pressure")->required();
  legendre->add_flag("--grid", legendre_grid, "force the grid search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve->parsed()) return run(solve_config);
    if (gen->parsed()) return run_gen_mesh(mesh_spec, mesh_out);
    if (sweep->parsed()) return run_sweep(sweep_out, sweep_kappa);
    if (check->parsed()) return run_check_tangents(check_config);
    if (legendre->parsed()) return run_legendre(legendre_id, legendre_kappa,
                                                legendre_p, legendre_grid);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace hyperfem
