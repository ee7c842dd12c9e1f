#pragma once

#include "hyperfem/formulations.hpp"
#include "hyperfem/mesh.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace hyperfem {

// Prescribed displacement component on a named node set.  The value is the
// full-load target; the active value at a given step is value * load factor.
struct DirichletSpec {
  std::string node_set;
  int component;
  double value;
};

// Dead surface traction (per unit reference area, full-load value) on a
// named face set.
struct NeumannSpec {
  std::string face_set;
  Vec3 traction;
};

enum class PressureLayout { per_element, per_node };

// Global unknown bookkeeping.  Displacement dofs are node-major (3*node + c);
// a slot of -1 marks a prescribed component whose full-load value sits in
// `prescribed`.  Pressure storage slots live per element (discontinuous) or
// per displacement corner node (continuous); theta slots exist per element
// for the three-field treatment.  Slot indexing is independent of whether
// the linear system is condensed or saddle-point.
struct DofMap {
  std::vector<int> disp_dof;
  std::vector<double> prescribed;
  PressureLayout pressure_layout = PressureLayout::per_element;
  std::vector<int> pressure_dof;
  std::vector<int> theta_dof;
  int n_disp = 0;
  int n_pressure = 0;
  int n_theta = 0;
};

DofMap build_dof_map(const Mesh& mesh, const MixedElement& element,
                     FormulationKind kind,
                     const std::vector<DirichletSpec>& dirichlet);

// A fully prepared boundary value problem: geometry, element pair, material,
// formulation, loads, dof numbering, and the unit-load external force vector.
struct Problem {
  Mesh mesh;
  MixedElement element;
  MaterialModel material;
  FormulationKind kind;
  std::vector<DirichletSpec> dirichlet;
  std::vector<NeumannSpec> neumann;
  Vec3 body_force = Vec3::Zero();
  DofMap dofs;
  VecX f_ext_base;
};

Problem build_problem(Mesh mesh, MixedElement element, MaterialModel material,
                      FormulationKind kind, std::vector<DirichletSpec> dirichlet,
                      std::vector<NeumannSpec> neumann = {},
                      const Vec3& body_force = Vec3::Zero());

// Unit-load external force from dead tractions and a constant body force,
// integrated over the reference configuration with the displacement basis.
VecX external_force(const Mesh& mesh, const BasisFamily& displacement,
                    const std::vector<NeumannSpec>& neumann,
                    const Vec3& body_force = Vec3::Zero());

// Full solution fields: u holds all nodes (prescribed components included,
// node-major), p one value per pressure slot, theta one value per element
// (three-field), history one record per element quadrature point.
struct SolutionState {
  VecX u;
  VecX p;
  VecX theta;
  std::vector<std::vector<QuadHistory>> history;
};

SolutionState initial_state(const Problem& problem);

// Element-local view of the global fields for one cell.
ElementState gather_element_state(const Problem& problem, const SolutionState& state,
                                  int cell_index);

// condensed: pressure (and theta) eliminated per element, displacement-only
// system plus affine recovery of the eliminated increments.  saddle: the
// full mixed system with unknowns ordered [u_free, theta, p].
enum class AssemblyMode { condensed, saddle };

// Condensed when the pressure is discontinuous and the compliance block is
// invertible; the truly incompressible constraint (Kpp = 0) and continuous
// pressure spaces require the saddle route.
AssemblyMode default_assembly_mode(const Problem& problem);

enum class MatrixStructure { spd, symmetric_indefinite, unsymmetric };

// Structure dispatch: weak_galerkin is unsymmetric except for the exactly
// quadratic volumetric function V3; every other treatment is symmetric.
MatrixStructure matrix_structure(FormulationKind kind, VolId id);

struct AssembledSystem {
  Eigen::SparseMatrix<double> K;
  VecX R;                                  // internal minus external forces
  double full_norm = 0.0;                  // norm of the full mixed residual
  std::vector<CondensedElement> recovery;  // condensed mode, one per element
};

// Global tangent and residual at the given state and load factor.  full_norm
// is the Euclidean norm of [Ru_free, Rtheta, Rp] in both modes, so logs are
// comparable across solve routes.
//
// du_prescribed, when given, is a full displacement-layout vector holding a
// pending Dirichlet increment (nonzero only on prescribed slots).  Its
// stiffness product K * du is added to the residual so the increment enters
// the solution through the first linear solve of a load step instead of
// being imposed as a raw state jump, which keeps intermediate states
// evaluable for materials with finite extensibility.
AssembledSystem assemble(const Problem& problem, const SolutionState& state,
                         double load_factor, AssemblyMode mode,
                         const VecX* du_prescribed = nullptr);

// Direct sparse solve with a backward-error check (relative residual above
// 1e-10 raises SolverError).  Symmetric systems try a Cholesky-type LDLT
// factorisation first and fall back to pivoted LU when the indefinite
// pattern defeats it; unsymmetric systems go straight to pivoted LU.
VecX linear_solve(const Eigen::SparseMatrix<double>& A, const VecX& b,
                  MatrixStructure structure);

struct LoadProgram {
  int n_steps = 1;
  std::vector<double> factors;  // empty = uniform ramp k/n_steps
  bool dead_loads = true;

  static LoadProgram uniform(int n_steps);
  double factor(int step) const;  // step in [0, n_steps)
};

struct NewtonOptions {
  double tol_abs = 1e-8;
  double tol_rel = 1e-14;
  int max_iterations = 20;
};

// One accepted (or failed) load step: the residual norms of every assembly,
// the number of linear solves, and the committed solution snapshot.
struct StepRecord {
  int step = 0;
  double load_factor = 0.0;
  std::vector<double> residual_norms;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  VecX u;
  VecX p;
  VecX theta;
};

struct ConvergenceLog {
  std::vector<StepRecord> steps;
};

struct NewtonResult {
  bool success = false;
  int failed_step = -1;  // 0-based; -1 on success
  std::string message;
  SolutionState state;
  ConvergenceLog log;
};

// Incremental load stepping with a full Newton iteration per step.  Each
// step applies the scaled prescribed displacements, iterates until the full
// residual norm meets tol_abs (or the relative floor), commits the state,
// and refreshes the per-point linearisation history (proposed_consistent).
// A step that exhausts its iteration budget stops the run; the log keeps
// every recorded norm.
NewtonResult newton_solve(const Problem& problem, const LoadProgram& program,
                          const NewtonOptions& options, AssemblyMode mode);

NewtonResult newton_solve(const Problem& problem, const LoadProgram& program,
                          const NewtonOptions& options = {});

}  // namespace hyperfem
