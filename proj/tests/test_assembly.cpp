#include "hyperfem/assembly.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "hyperfem/verification.hpp"

using namespace hyperfem;

namespace {

MaterialModel nh_material(double E, double nu, VolId id) {
  MaterialModel material;
  material.dev = {DevKind::neo_hookean, shear_modulus(E, nu), 0.0};
  material.vol = {id, bulk_modulus(E, nu)};
  material.nu = nu;
  return material;
}

MaterialModel gent_material(double E, double nu, double Im, VolId id) {
  MaterialModel material;
  material.dev = {DevKind::gent, shear_modulus(E, nu), Im};
  material.vol = {id, bulk_modulus(E, nu)};
  material.nu = nu;
  return material;
}

// Roller supports on the three coordinate planes of a block mesh.
std::vector<DirichletSpec> symmetry_bcs() {
  return {{"xmin", 0, 0.0}, {"ymin", 1, 0.0}, {"zmin", 2, 0.0}};
}

Problem stretch_problem(FormulationKind kind, const MaterialModel& material,
                        double uz, BoxMeshSpec spec = {}) {
  Mesh mesh = generate_block_mesh(spec);
  std::vector<DirichletSpec> bcs = symmetry_bcs();
  bcs.push_back({"zmax", 2, uz});
  const MixedElement element = spec.quadratic
                                   ? MixedElement::tet10_p1(BasisKind::lagrange)
                                   : MixedElement::hex8_p0();
  return build_problem(std::move(mesh), element, material, kind, std::move(bcs));
}

// Deterministic perturbation of every field, prescribed slots included, so
// assembly oracles see a generic state.
SolutionState perturbed_state(const Problem& problem, unsigned seed) {
  SolutionState state = initial_state(problem);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < state.u.size(); ++i) state.u[i] = 0.04 * d(rng);
  for (int i = 0; i < state.p.size(); ++i) state.p[i] = 0.3 * d(rng);
  for (int i = 0; i < state.theta.size(); ++i) state.theta[i] = 0.05 * d(rng);
  return state;
}

int find_node(const Mesh& mesh, const Vec3& point) {
  for (size_t i = 0; i < mesh.nodes.size(); ++i) {
    if ((mesh.nodes[i] - point).norm() < 1e-12) return static_cast<int>(i);
  }
  REQUIRE(false);
  return -1;
}

double convergence_slope(const std::vector<double>& norms) {
  std::vector<double> r;
  for (double v : norms) {
    if (v > 1e-12) r.push_back(v);
  }
  REQUIRE(r.size() >= 3);
  const size_t n = r.size();
  const double num = std::log(r[n - 1] / r[n - 2]);
  const double den = std::log(r[n - 2] / r[n - 3]);
  return num / den;
}

}  // namespace

TEST_CASE("dof map separates free and prescribed slots") {
  const Mesh mesh = generate_block_mesh({});
  const MixedElement element = MixedElement::hex8_p0();
  std::vector<DirichletSpec> bcs = symmetry_bcs();
  bcs.push_back({"zmax", 2, 0.5});

  const DofMap dofs =
      build_dof_map(mesh, element, FormulationKind::proposed_consistent, bcs);
  CHECK_EQ(dofs.disp_dof.size(), 24);
  CHECK_EQ(dofs.n_disp, 8);
  CHECK_EQ(dofs.n_pressure, 1);
  CHECK_EQ(dofs.pressure_layout, PressureLayout::per_element);
  CHECK_EQ(dofs.n_theta, 0);
  CHECK(dofs.theta_dof.empty());

  for (size_t node = 0; node < mesh.nodes.size(); ++node) {
    const Vec3& X = mesh.nodes[node];
    const bool on_xmin = X[0] == 0.0;
    const bool on_ymin = X[1] == 0.0;
    const bool on_zmin = X[2] == 0.0;
    const bool on_zmax = X[2] == 1.0;
    CHECK_EQ(dofs.disp_dof[3 * node + 0] < 0, on_xmin);
    CHECK_EQ(dofs.disp_dof[3 * node + 1] < 0, on_ymin);
    CHECK_EQ(dofs.disp_dof[3 * node + 2] < 0, on_zmin || on_zmax);
    if (on_zmax) CHECK_EQ(dofs.prescribed[3 * node + 2], 0.5);
    if (on_zmin) CHECK_EQ(dofs.prescribed[3 * node + 2], 0.0);
  }

  const DofMap three =
      build_dof_map(mesh, element, FormulationKind::three_field, bcs);
  CHECK_EQ(three.n_theta, 1);
  CHECK_EQ(three.theta_dof, std::vector<int>{0});
}

TEST_CASE("continuous pressure numbers corner nodes only") {
  BoxMeshSpec spec;
  spec.tetrahedral = true;
  spec.quadratic = true;
  const Mesh mesh = generate_block_mesh(spec);
  const MixedElement element = MixedElement::tet10_p1(BasisKind::lagrange);
  const DofMap dofs = build_dof_map(mesh, element,
                                    FormulationKind::proposed_consistent,
                                    symmetry_bcs());
  CHECK_EQ(dofs.pressure_layout, PressureLayout::per_node);
  CHECK_EQ(dofs.n_pressure, 8);

  std::vector<char> corner(mesh.nodes.size(), 0);
  for (const Cell& cell : mesh.cells) {
    for (int a = 0; a < 4; ++a) corner[cell.nodes[a]] = 1;
  }
  for (size_t node = 0; node < mesh.nodes.size(); ++node) {
    CHECK_EQ(dofs.pressure_dof[node] >= 0, corner[node] == 1);
  }
}

TEST_CASE("dof map rejects bad boundary specifications") {
  const Mesh mesh = generate_block_mesh({});
  const MixedElement element = MixedElement::hex8_p0();
  CHECK_THROWS_AS(build_dof_map(mesh, element, FormulationKind::weak_galerkin,
                                {{"nowhere", 0, 0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(build_dof_map(mesh, element, FormulationKind::weak_galerkin,
                                {{"xmin", 3, 0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(build_dof_map(mesh, element, FormulationKind::weak_galerkin,
                                {{"zmax", 2, 0.5}, {"zmax", 2, 0.3}}),
                  ConfigError);
  // The same value twice is a harmless overlap, not a conflict.
  CHECK_NOTHROW(build_dof_map(mesh, element, FormulationKind::weak_galerkin,
                              {{"zmax", 2, 0.5}, {"zmax", 2, 0.5}}));
}

TEST_CASE("external force integrates dead tractions and body force") {
  BoxMeshSpec spec;
  spec.nx = spec.ny = spec.nz = 2;
  const Mesh mesh = generate_block_mesh(spec);
  const MixedElement element = MixedElement::hex8_p0();

  const Vec3 traction(0.0, 0.0, -3.0);
  const VecX f = external_force(mesh, element.displacement, {{"faces_zmax", traction}});
  Vec3 total = Vec3::Zero();
  for (size_t node = 0; node < mesh.nodes.size(); ++node) {
    total += f.segment<3>(3 * node);
    if (mesh.nodes[node][2] < 1.0) {
      CHECK_EQ(f.segment<3>(3 * node).norm(), 0.0);
    }
  }
  CHECK(total.isApprox(traction, 1e-12));  // unit face area

  // The interior face node collects a quarter of each of the four facets.
  const int center = find_node(mesh, {0.5, 0.5, 1.0});
  CHECK_EQ(f[3 * center + 2], doctest::Approx(-3.0 * 0.25).epsilon(1e-12));

  const Vec3 body(0.0, -9.81, 0.0);
  const VecX fb = external_force(mesh, element.displacement, {}, body);
  Vec3 total_b = Vec3::Zero();
  for (size_t node = 0; node < mesh.nodes.size(); ++node) {
    total_b += fb.segment<3>(3 * node);
  }
  CHECK(total_b.isApprox(body, 1e-12));  // unit volume
}

TEST_CASE("quadratic facets load midedge nodes only") {
  BoxMeshSpec spec;
  spec.tetrahedral = true;
  spec.quadratic = true;
  const Mesh mesh = generate_block_mesh(spec);
  const MixedElement element = MixedElement::tet10_p1(BasisKind::lagrange);

  const Vec3 traction(0.0, 0.0, 2.0);
  const VecX f = external_force(mesh, element.displacement, {{"faces_zmax", traction}});
  Vec3 total = Vec3::Zero();
  double vertex_share = 0.0;
  for (size_t node = 0; node < mesh.nodes.size(); ++node) {
    total += f.segment<3>(3 * node);
    const Vec3& X = mesh.nodes[node];
    const bool vertex = std::fmod(2.0 * X[0], 2.0) == 0.0 &&
                        std::fmod(2.0 * X[1], 2.0) == 0.0 &&
                        std::fmod(2.0 * X[2], 2.0) == 0.0;
    if (vertex) vertex_share += std::abs(f[3 * node + 2]);
  }
  CHECK(total.isApprox(traction, 1e-12));
  // A quadratic triangle assigns zero integral weight to its vertices.
  CHECK_LE(vertex_share, 1e-13);
}

TEST_CASE("saddle assembly matches a dense scatter oracle") {
  BoxMeshSpec spec;
  spec.nx = 2;
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V1);
  std::vector<DirichletSpec> bcs = symmetry_bcs();
  bcs.push_back({"xmax", 0, 0.2});
  Problem problem =
      build_problem(generate_block_mesh(spec), MixedElement::hex8_p0(), material,
                    FormulationKind::weak_galerkin, bcs);
  const SolutionState state = perturbed_state(problem, 7u);

  const AssembledSystem sys = assemble(problem, state, 1.0, AssemblyMode::saddle);
  const DofMap& dofs = problem.dofs;
  const int n = dofs.n_disp + dofs.n_pressure;
  REQUIRE_EQ(sys.K.rows(), n);

  Eigen::MatrixXd Kd = Eigen::MatrixXd::Zero(n, n);
  VecX Rd = VecX::Zero(n);
  for (int e = 0; e < static_cast<int>(problem.mesh.cells.size()); ++e) {
    const ElementState es = gather_element_state(problem, state, e);
    const ElementBlocks b = element_blocks_two_field(
        problem.kind, problem.element, es, material, state.history[e]);
    const Cell& cell = problem.mesh.cells[e];
    std::vector<int> sysidx(3 * problem.element.n_disp());
    for (int a = 0; a < problem.element.n_disp(); ++a) {
      for (int c = 0; c < 3; ++c) {
        sysidx[3 * a + c] = dofs.disp_dof[3 * cell.nodes[a] + c];
      }
    }
    const int prow = dofs.n_disp + dofs.pressure_dof[e];
    for (size_t i = 0; i < sysidx.size(); ++i) {
      if (sysidx[i] < 0) continue;
      Rd[sysidx[i]] += b.Ru[i];
      for (size_t j = 0; j < sysidx.size(); ++j) {
        if (sysidx[j] >= 0) Kd(sysidx[i], sysidx[j]) += b.Kuu(i, j);
      }
      Kd(sysidx[i], prow) += b.Kup(i, 0);
      Kd(prow, sysidx[i]) += b.Kpu(0, i);
    }
    Kd(prow, prow) += b.Kpp(0, 0);
    Rd[prow] += b.Rp[0];
  }

  const Eigen::MatrixXd Ks = Eigen::MatrixXd(sys.K);
  CHECK_LE((Ks - Kd).norm(), 1e-12 * Kd.norm());
  CHECK_LE((sys.R - Rd).norm(), 1e-12 * (1.0 + Rd.norm()));
  CHECK_EQ(sys.full_norm, doctest::Approx(Rd.norm()).epsilon(1e-12));
}

TEST_CASE("structure and mode dispatch") {
  CHECK_EQ(matrix_structure(FormulationKind::weak_galerkin, VolId::V1),
           MatrixStructure::unsymmetric);
  CHECK_EQ(matrix_structure(FormulationKind::weak_galerkin, VolId::V3),
           MatrixStructure::symmetric_indefinite);
  CHECK_EQ(matrix_structure(FormulationKind::proposed_consistent, VolId::V1),
           MatrixStructure::symmetric_indefinite);
  CHECK_EQ(matrix_structure(FormulationKind::truly_incompressible, VolId::V8),
           MatrixStructure::symmetric_indefinite);

  const MaterialModel nh = nh_material(10.0, 0.3, VolId::V2);
  Problem hex = stretch_problem(FormulationKind::proposed_consistent, nh, 0.1);
  CHECK_EQ(default_assembly_mode(hex), AssemblyMode::condensed);

  MaterialModel rubber = nh_material(10.0, 0.5, VolId::V2);
  Problem truly =
      stretch_problem(FormulationKind::truly_incompressible, rubber, 0.1);
  CHECK_EQ(default_assembly_mode(truly), AssemblyMode::saddle);

  BoxMeshSpec tets;
  tets.tetrahedral = true;
  tets.quadratic = true;
  Problem continuous =
      stretch_problem(FormulationKind::proposed_consistent, nh, 0.1, tets);
  CHECK_EQ(default_assembly_mode(continuous), AssemblyMode::saddle);
  const SolutionState state = initial_state(continuous);
  CHECK_THROWS_AS(assemble(continuous, state, 1.0, AssemblyMode::condensed),
                  CondensationError);
}

TEST_CASE("global tangent symmetry follows the formulation") {
  BoxMeshSpec spec;
  spec.nx = spec.ny = spec.nz = 2;
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V8);

  const auto asymmetry = [&](FormulationKind kind, VolId id) {
    MaterialModel m = material;
    m.vol.id = id;
    std::vector<DirichletSpec> bcs = symmetry_bcs();
    bcs.push_back({"zmax", 2, 0.2});
    Problem problem = build_problem(generate_block_mesh(spec),
                                    MixedElement::hex8_p0(), m, kind, bcs);
    const SolutionState state = perturbed_state(problem, 11u);
    const AssembledSystem sys =
        assemble(problem, state, 1.0, AssemblyMode::saddle);
    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.K);
    return (K - K.transpose()).cwiseAbs().maxCoeff() /
           K.cwiseAbs().maxCoeff();
  };

  CHECK_LE(asymmetry(FormulationKind::proposed_consistent, VolId::V8), 1e-12);
  CHECK_LE(asymmetry(FormulationKind::perturbed_lagrangian, VolId::V8), 1e-12);
  CHECK_LE(asymmetry(FormulationKind::three_field, VolId::V8), 1e-12);
  CHECK_GE(asymmetry(FormulationKind::weak_galerkin, VolId::V1), 1e-4);
  CHECK_LE(asymmetry(FormulationKind::weak_galerkin, VolId::V3), 1e-12);
}

TEST_CASE("linear solve meets its backward error contract") {
  using Sparse = Eigen::SparseMatrix<double>;

  Sparse eye(3, 3);
  eye.setIdentity();
  VecX b(3);
  b << 1.0, 2.0, 3.0;
  CHECK((linear_solve(eye, b, MatrixStructure::spd) - b).norm() <= 1e-14);

  // Indefinite with a zero diagonal pivot: exercises the LU fallback.
  Eigen::MatrixXd Ad(2, 2);
  Ad << 2.0, 1.0, 1.0, 0.0;
  VecX b2(2);
  b2 << 1.0, 1.0;
  const VecX x2 = linear_solve(Ad.sparseView(), b2,
                               MatrixStructure::symmetric_indefinite);
  CHECK_EQ(x2[0], doctest::Approx(1.0).epsilon(1e-12));
  CHECK_EQ(x2[1], doctest::Approx(-1.0).epsilon(1e-12));

  std::mt19937 rng(3u);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const int n = 120;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = d(rng);
  }
  M.diagonal().array() += 8.0;
  VecX rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = d(rng);
  const VecX x = linear_solve(M.sparseView(), rhs, MatrixStructure::unsymmetric);
  CHECK_LE((M * x - rhs).norm(), 1e-10 * rhs.norm());
  const VecX x_ref = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);
  CHECK_LE((x - x_ref).norm(), 1e-8 * x_ref.norm());

  const Eigen::MatrixXd spd = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
  const VecX xs = linear_solve(spd.sparseView(), rhs, MatrixStructure::spd);
  CHECK_LE((spd * xs - rhs).norm(), 1e-10 * rhs.norm());

  Sparse zero(2, 2);
  CHECK_THROWS_AS(linear_solve(zero, b2, MatrixStructure::unsymmetric),
                  SolverError);
  Sparse rect(2, 3);
  CHECK_THROWS_AS(linear_solve(rect, b2, MatrixStructure::unsymmetric),
                  SolverError);
  CHECK_EQ(linear_solve(eye, VecX::Zero(3), MatrixStructure::spd).norm(), 0.0);
}

TEST_CASE("load program factors") {
  const LoadProgram uniform = LoadProgram::uniform(4);
  CHECK_EQ(uniform.factor(0), doctest::Approx(0.25));
  CHECK_EQ(uniform.factor(3), doctest::Approx(1.0));
  CHECK_THROWS_AS(uniform.factor(4), DomainError);
  CHECK_THROWS_AS(uniform.factor(-1), DomainError);

  LoadProgram explicit_ramp;
  explicit_ramp.n_steps = 3;
  explicit_ramp.factors = {0.2, 0.6, 1.0};
  CHECK_EQ(explicit_ramp.factor(1), doctest::Approx(0.6));

  LoadProgram mismatched;
  mismatched.n_steps = 2;
  mismatched.factors = {1.0};
  CHECK_THROWS_AS(mismatched.factor(0), ConfigError);

  LoadProgram empty;
  empty.n_steps = 0;
  CHECK_THROWS_AS(empty.factor(0), ConfigError);
}

TEST_CASE("initial state is the stress free reference") {
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V6);
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 0.1);
  const SolutionState state = initial_state(problem);
  CHECK_EQ(state.u.norm(), 0.0);
  CHECK_EQ(state.p.norm(), 0.0);
  REQUIRE_EQ(state.history.size(), 1);
  REQUIRE_EQ(state.history[0].size(), problem.element.n_qp());
  CHECK_EQ(state.history[0][0].J_prev, doctest::Approx(1.0));
  CHECK_EQ(state.history[0][0].theta_hat,
           doctest::Approx(1.0 / material.vol.kappa).epsilon(1e-14));

  Problem galerkin =
      stretch_problem(FormulationKind::weak_galerkin, material, 0.1);
  const SolutionState gstate = initial_state(galerkin);
  CHECK_EQ(gstate.history[0][0].theta_hat, 0.0);

  // The reference state is already in equilibrium.
  const AssembledSystem sys =
      assemble(galerkin, gstate, 0.0, AssemblyMode::saddle);
  CHECK_LE(sys.full_norm, 1e-14);
}

TEST_CASE("prescribed displacements are applied exactly per step") {
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V3);
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 0.4);
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(2), NewtonOptions{});
  REQUIRE(result.success);
  REQUIRE_EQ(result.log.steps.size(), 2);

  const int top = find_node(problem.mesh, {1.0, 1.0, 1.0});
  const int bottom = find_node(problem.mesh, {0.0, 0.0, 0.0});
  CHECK_EQ(result.log.steps[0].u[3 * top + 2], 0.2);
  CHECK_EQ(result.log.steps[1].u[3 * top + 2], 0.4);
  CHECK_EQ(result.state.u[3 * bottom + 0], 0.0);
  CHECK_EQ(result.state.u[3 * bottom + 2], 0.0);
  CHECK_EQ(result.log.steps[0].load_factor, doctest::Approx(0.5));
  CHECK_EQ(result.log.steps[1].load_factor, doctest::Approx(1.0));
}

TEST_CASE("newton converges quadratically and logs faithfully") {
  const MaterialModel material = gent_material(100.0, 0.3, 30.0, VolId::V1);
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 0.3);
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(1), NewtonOptions{});
  REQUIRE(result.success);
  const StepRecord& rec = result.log.steps.front();
  CHECK(rec.converged);
  CHECK_EQ(rec.iterations,
           static_cast<int>(rec.residual_norms.size()) - 1);
  CHECK_LE(rec.iterations, 6);
  CHECK_LE(rec.residual_norms.back(), 1e-8);
  CHECK_GE(convergence_slope(rec.residual_norms), 1.7);
}

TEST_CASE("a vanishing load converges immediately") {
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V2);
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 1e-6);
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(1), NewtonOptions{});
  REQUIRE(result.success);
  CHECK_LE(result.log.steps.front().iterations, 2);
}

TEST_CASE("iteration exhaustion is reported, not thrown") {
  const MaterialModel material = gent_material(100.0, 0.3, 30.0, VolId::V1);
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 0.3);
  NewtonOptions options;
  options.max_iterations = 1;
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(1), options);
  CHECK_FALSE(result.success);
  CHECK_EQ(result.failed_step, 0);
  CHECK(result.message.find("no convergence") != std::string::npos);
  REQUIRE_EQ(result.log.steps.size(), 1);
  CHECK_FALSE(result.log.steps.front().converged);
}

TEST_CASE("a quadratic volumetric energy collapses the formulation family") {
  const MaterialModel material = nh_material(10.0, 0.45, VolId::V3);
  BoxMeshSpec spec;
  spec.nx = spec.ny = spec.nz = 2;

  const auto solve = [&](FormulationKind kind) {
    Problem problem = stretch_problem(kind, material, 0.5, spec);
    const NewtonResult result =
        newton_solve(problem, LoadProgram::uniform(2), NewtonOptions{});
    REQUIRE(result.success);
    return result;
  };

  const NewtonResult proposed = solve(FormulationKind::proposed_consistent);
  const NewtonResult galerkin = solve(FormulationKind::weak_galerkin);
  const NewtonResult perturbed = solve(FormulationKind::perturbed_lagrangian);

  const double u_scale = proposed.state.u.norm();
  const double p_scale = proposed.state.p.norm();
  CHECK_LE((proposed.state.u - galerkin.state.u).norm(), 1e-10 * u_scale);
  CHECK_LE((proposed.state.u - perturbed.state.u).norm(), 1e-10 * u_scale);
  CHECK_LE((proposed.state.p - galerkin.state.p).norm(), 1e-9 * p_scale);
  CHECK_LE((proposed.state.p - perturbed.state.p).norm(), 1e-9 * p_scale);
}

TEST_CASE("condensed and saddle routes agree") {
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V8);
  BoxMeshSpec spec;
  spec.nx = spec.ny = spec.nz = 2;

  for (const FormulationKind kind : {FormulationKind::proposed_consistent,
                                     FormulationKind::three_field}) {
    const bool three = kind == FormulationKind::three_field;
    CAPTURE(three);
    Problem problem = stretch_problem(kind, material, 0.3, spec);
    const NewtonResult condensed = newton_solve(
        problem, LoadProgram::uniform(2), NewtonOptions{}, AssemblyMode::condensed);
    const NewtonResult saddle = newton_solve(
        problem, LoadProgram::uniform(2), NewtonOptions{}, AssemblyMode::saddle);
    REQUIRE(condensed.success);
    REQUIRE(saddle.success);
    CHECK_LE((condensed.state.u - saddle.state.u).norm(),
             1e-8 * (1.0 + saddle.state.u.norm()));
    CHECK_LE((condensed.state.p - saddle.state.p).norm(),
             1e-7 * (1.0 + saddle.state.p.norm()));
    if (kind == FormulationKind::three_field) {
      CHECK_LE((condensed.state.theta - saddle.state.theta).norm(),
               1e-8 * (1.0 + saddle.state.theta.norm()));
    }
  }
}

TEST_CASE("uniaxial stretch reproduces the homogeneous closed form") {
  const MaterialModel material = nh_material(10.0, 0.3, VolId::V5);
  Problem problem =
      stretch_problem(FormulationKind::weak_galerkin, material, 0.4);
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(4), NewtonOptions{});
  REQUIRE(result.success);

  const UniaxialResult oracle = uniaxial_oracle(material, 1.4);
  const int corner = find_node(problem.mesh, {1.0, 1.0, 1.0});
  const double lambda_t = 1.0 + result.state.u[3 * corner + 0];
  CHECK_EQ(lambda_t, doctest::Approx(oracle.lambda_t).epsilon(1e-7));
  CHECK_EQ(1.0 + result.state.u[3 * corner + 1],
           doctest::Approx(oracle.lambda_t).epsilon(1e-7));
  CHECK_EQ(result.state.p[0], doctest::Approx(oracle.pressure).epsilon(1e-7));

  const ElementState es = gather_element_state(problem, result.state, 0);
  const VolumeRatios ratios = element_volume_ratios(problem.element, es);
  CHECK_EQ(ratios.average, doctest::Approx(oracle.J).epsilon(1e-7));
}

TEST_CASE("the incompressible limit keeps the volume exactly") {
  const MaterialModel material = nh_material(10.0, 0.5, VolId::V2);
  Problem problem =
      stretch_problem(FormulationKind::truly_incompressible, material, 1.0);
  const NewtonResult result =
      newton_solve(problem, LoadProgram::uniform(5), NewtonOptions{});
  REQUIRE(result.success);

  const ElementState es = gather_element_state(problem, result.state, 0);
  const VolumeRatios ratios = element_volume_ratios(problem.element, es);
  CHECK_LE(std::abs(ratios.average - 1.0), 1e-8);

  const int corner = find_node(problem.mesh, {1.0, 1.0, 1.0});
  const double lambda_t = 1.0 + result.state.u[3 * corner + 0];
  CHECK_EQ(lambda_t, doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));

  const UniaxialResult oracle = uniaxial_oracle(material, 2.0);
  CHECK_EQ(result.state.p[0],
           doctest::Approx(oracle.pressure).epsilon(1e-6));
}

TEST_CASE("repeat solves are bitwise identical") {
  const MaterialModel material = gent_material(100.0, 0.45, 30.0, VolId::V1);
  BoxMeshSpec spec;
  spec.nx = spec.ny = spec.nz = 2;
  Problem problem =
      stretch_problem(FormulationKind::proposed_consistent, material, 0.4, spec);

  const NewtonResult a =
      newton_solve(problem, LoadProgram::uniform(2), NewtonOptions{});
  const NewtonResult b =
      newton_solve(problem, LoadProgram::uniform(2), NewtonOptions{});
  REQUIRE(a.success);
  REQUIRE(b.success);
  CHECK((a.state.u.array() == b.state.u.array()).all());
  CHECK((a.state.p.array() == b.state.p.array()).all());
  REQUIRE_EQ(a.log.steps.size(), b.log.steps.size());
  for (size_t s = 0; s < a.log.steps.size(); ++s) {
    CHECK(a.log.steps[s].residual_norms == b.log.steps[s].residual_norms);
  }
}
