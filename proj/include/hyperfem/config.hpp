#pragma once

#include "hyperfem/assembly.hpp"
#include "hyperfem/mesh.hpp"

#include <string>
#include <vector>

namespace hyperfem {

enum class ElementChoice { hex8_p0, tet10_p1, tet10_p1_bernstein };
enum class SystemChoice { automatic, condensed, saddle };

const char* to_string(ElementChoice choice);
const char* to_string(SystemChoice choice);

struct ProbeSpec {
  std::string name;
  Vec3 point = Vec3::Zero();
};

// Resolved run description.  Parsing already applies the one semantic
// rewrite: nu = 0.5 with a two-field formulation switches to
// truly_incompressible (three_field cannot take the limit and is rejected).
struct RunConfig {
  FormulationKind formulation = FormulationKind::proposed_consistent;
  ElementChoice element = ElementChoice::hex8_p0;
  SystemChoice linear_system = SystemChoice::automatic;
  std::string output_prefix;

  double E = 1.0;
  double nu = 0.3;
  DevKind deviatoric = DevKind::neo_hookean;
  double Im = 0.0;
  VolId volumetric = VolId::V3;

  bool mesh_from_file = false;
  BoxMeshSpec box;
  std::string mesh_path;

  std::vector<DirichletSpec> dirichlet;
  std::vector<NeumannSpec> neumann;

  int n_steps = 1;
  std::vector<double> factors;  // empty = uniform ramp to 1

  NewtonOptions solver;

  std::vector<ProbeSpec> probes;
  bool write_vtk = false;
};

// Plain-text key/value format with [section] headers and '#' comments:
//
//   [run]       formulation = perturbed|galerkin|proposed|three_field|truly
//               element = hex8_p0|tet10_p1|tet10_p1_bernstein
//               linear_system = auto|condensed|saddle
//               output_prefix = <path stem for results>
//   [material]  E, nu, deviatoric = neo_hookean|gent, Im, volumetric = V1..V8
//   [mesh]      source = box|file; box: nx ny nz lx ly lz patch_x patch_y;
//               file: path (cell type still follows the element choice)
//   [dirichlet] <node set>.<ux|uy|uz> = value
//   [neumann]   <face set> = tx ty tz
//   [steps]     count, factors (optional explicit load factors, count values)
//   [probes]    <name> = x y z
//   [solver]    tol_abs, tol_rel, max_iterations
//   [output]    vtk = true|false
//
// Unknown sections or keys fail with file:line context.  `name` labels parse
// errors; parse_run_config additionally defaults output_prefix to the config
// path without its extension.
RunConfig parse_config_text(const std::string& text, const std::string& name);
RunConfig parse_run_config(const std::string& path);

// Canonical rendering with every default filled in; parsing it back yields a
// config that renders to the same bytes.
std::string render_config(const RunConfig& config);

// Writes render_config to "<output_prefix>.echo.ini" and returns that path.
std::string write_config_echo(const RunConfig& config);

}  // namespace hyperfem
