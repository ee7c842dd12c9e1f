#include "hyperfem/assembly.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace hyperfem {

namespace {

CellKind expected_cell_kind(const BasisFamily& displacement) {
  if (displacement.cell_shape == CellShape::hexahedron) return CellKind::hex8;
  return displacement.order == BasisOrder::quadratic ? CellKind::tet10 : CellKind::tet4;
}

std::string pivot_diagnostic(const VecX& d) {
  if (d.size() == 0) return "empty diagonal";
  int index = 0;
  const double smallest = d.cwiseAbs().minCoeff(&index);
  return "smallest factor pivot " + std::to_string(smallest) + " at dof " +
         std::to_string(index);
}

}  // namespace

DofMap build_dof_map(const Mesh& mesh, const MixedElement& element,
                     FormulationKind kind,
                     const std::vector<DirichletSpec>& dirichlet) {
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  DofMap dofs;
  dofs.disp_dof.assign(3 * n_nodes, 0);
  dofs.prescribed.assign(3 * n_nodes, 0.0);
  std::vector<char> held(3 * n_nodes, 0);

  for (const DirichletSpec& spec : dirichlet) {
    const auto it = mesh.node_sets.find(spec.node_set);
    if (it == mesh.node_sets.end()) {
      throw ConfigError("dirichlet: unknown node set '" + spec.node_set + "'");
    }
    if (spec.component < 0 || spec.component > 2) {
      throw ConfigError("dirichlet: component must be 0 (x), 1 (y), or 2 (z)");
    }
    for (int node : it->second) {
      const int slot = 3 * node + spec.component;
      if (held[slot] && dofs.prescribed[slot] != spec.value) {
        throw ConfigError("dirichlet: node " + std::to_string(node) +
                          " component " + std::to_string(spec.component) +
                          " prescribed twice with different values");
      }
      held[slot] = 1;
      dofs.prescribed[slot] = spec.value;
    }
  }
  int next = 0;
  for (int slot = 0; slot < 3 * n_nodes; ++slot) {
    dofs.disp_dof[slot] = held[slot] ? -1 : next++;
  }
  dofs.n_disp = next;

  if (element.pressure.order == BasisOrder::constant) {
    dofs.pressure_layout = PressureLayout::per_element;
    dofs.pressure_dof.resize(mesh.cells.size());
    std::iota(dofs.pressure_dof.begin(), dofs.pressure_dof.end(), 0);
    dofs.n_pressure = static_cast<int>(mesh.cells.size());
  } else {
    dofs.pressure_layout = PressureLayout::per_node;
    dofs.pressure_dof.assign(n_nodes, -1);
    const int corners = element.pressure.count();
    for (const Cell& cell : mesh.cells) {
      for (int a = 0; a < corners; ++a) dofs.pressure_dof[cell.nodes[a]] = 0;
    }
    int next_p = 0;
    for (int node = 0; node < n_nodes; ++node) {
      if (dofs.pressure_dof[node] == 0) dofs.pressure_dof[node] = next_p++;
      else dofs.pressure_dof[node] = -1;
    }
    dofs.n_pressure = next_p;
  }

  if (kind == FormulationKind::three_field) {
    dofs.theta_dof.resize(mesh.cells.size());
    std::iota(dofs.theta_dof.begin(), dofs.theta_dof.end(), 0);
    dofs.n_theta = static_cast<int>(mesh.cells.size());
  }
  return dofs;
}

VecX external_force(const Mesh& mesh, const BasisFamily& displacement,
                    const std::vector<NeumannSpec>& neumann,
                    const Vec3& body_force) {
  VecX f = VecX::Zero(3 * static_cast<int>(mesh.nodes.size()));

  for (const NeumannSpec& spec : neumann) {
    const auto it = mesh.face_sets.find(spec.face_set);
    if (it == mesh.face_sets.end()) {
      throw ConfigError("neumann: unknown face set '" + spec.face_set + "'");
    }
    for (const FaceRef& ref : it->second) {
      const Cell& cell = mesh.cells[ref.cell];
      const FacetKind kind = facet_kind(cell.kind);
      const std::vector<int>& local = face_local_nodes(cell.kind, ref.face);
      const FacetRule rule = facet_rule(kind);
      const int m = static_cast<int>(local.size());
      Eigen::Matrix<double, Eigen::Dynamic, 3> Xf(m, 3);
      for (int a = 0; a < m; ++a) {
        Xf.row(a) = mesh.nodes[cell.nodes[local[a]]].transpose();
      }
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const FacetShapeEval shape =
            facet_shape_eval(kind, rule.points[q], displacement.basis_kind);
        const Eigen::Matrix<double, 3, 2> tangents = Xf.transpose() * shape.gradients;
        const double dA =
            tangents.col(0).cross(tangents.col(1)).norm() * rule.weights[q];
        for (int a = 0; a < m; ++a) {
          f.segment<3>(3 * cell.nodes[local[a]]) +=
              shape.values[a] * spec.traction * dA;
        }
      }
    }
  }

  if (!body_force.isZero()) {
    const QuadratureRule rule = quadrature_rule(
        displacement.cell_shape,
        displacement.cell_shape == CellShape::hexahedron ? 3 : 4);
    std::vector<ShapeEval> shapes;
    shapes.reserve(rule.points.size());
    for (const Vec3& xi : rule.points) shapes.push_back(shape_eval(displacement, xi));
    const int n = displacement.count();
    for (const Cell& cell : mesh.cells) {
      Eigen::Matrix<double, Eigen::Dynamic, 3> X(n, 3);
      for (int a = 0; a < n; ++a) X.row(a) = mesh.nodes[cell.nodes[a]].transpose();
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const double det = (X.transpose() * shapes[q].gradients).determinant();
        const double dV = det * rule.weights[q];
        for (int a = 0; a < n; ++a) {
          f.segment<3>(3 * cell.nodes[a]) += shapes[q].values[a] * body_force * dV;
        }
      }
    }
  }
  return f;
}

Problem build_problem(Mesh mesh, MixedElement element, MaterialModel material,
                      FormulationKind kind, std::vector<DirichletSpec> dirichlet,
                      std::vector<NeumannSpec> neumann, const Vec3& body_force) {
  validate_mesh(mesh);
  const CellKind expected = expected_cell_kind(element.displacement);
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    if (mesh.cells[c].kind != expected) {
      throw ConfigError("build_problem: cell " + std::to_string(c) + " is " +
                        to_string(mesh.cells[c].kind) + " but the element pair needs " +
                        to_string(expected));
    }
  }
  if (kind == FormulationKind::three_field &&
      element.pressure.order != BasisOrder::constant) {
    throw ConfigError("build_problem: three_field requires element-constant pressure");
  }
  if (kind != FormulationKind::truly_incompressible &&
      !std::isfinite(material.vol.kappa)) {
    throw ConfigError(
        "build_problem: infinite bulk modulus (nu = 0.5) requires the "
        "truly_incompressible treatment");
  }

  Problem problem;
  problem.mesh = std::move(mesh);
  problem.element = std::move(element);
  problem.material = material;
  problem.kind = kind;
  problem.dirichlet = std::move(dirichlet);
  problem.neumann = std::move(neumann);
  problem.body_force = body_force;
  problem.dofs = build_dof_map(problem.mesh, problem.element, kind, problem.dirichlet);
  problem.f_ext_base = external_force(problem.mesh, problem.element.displacement,
                                      problem.neumann, body_force);
  return problem;
}

SolutionState initial_state(const Problem& problem) {
  SolutionState state;
  state.u = VecX::Zero(3 * static_cast<int>(problem.mesh.nodes.size()));
  state.p = VecX::Zero(problem.dofs.n_pressure);
  state.theta = VecX::Zero(problem.dofs.n_theta);
  const QuadHistory start = problem.kind == FormulationKind::proposed_consistent
                                ? update_history(problem.material.vol, 1.0)
                                : incompressible_history();
  state.history.assign(problem.mesh.cells.size(),
                       std::vector<QuadHistory>(problem.element.n_qp(), start));
  return state;
}

ElementState gather_element_state(const Problem& problem, const SolutionState& state,
                                  int cell_index) {
  const Cell& cell = problem.mesh.cells[cell_index];
  const int n = problem.element.n_disp();
  ElementState es;
  es.X.resize(n, 3);
  es.u.resize(3 * n);
  for (int a = 0; a < n; ++a) {
    const int node = cell.nodes[a];
    es.X.row(a) = problem.mesh.nodes[node].transpose();
    es.u.segment<3>(3 * a) = state.u.segment<3>(3 * node);
  }
  const DofMap& dofs = problem.dofs;
  if (dofs.pressure_layout == PressureLayout::per_element) {
    es.p = VecX::Constant(1, state.p[dofs.pressure_dof[cell_index]]);
  } else {
    const int np = problem.element.n_pres();
    es.p.resize(np);
    for (int a = 0; a < np; ++a) es.p[a] = state.p[dofs.pressure_dof[cell.nodes[a]]];
  }
  if (problem.kind == FormulationKind::three_field) {
    es.theta = state.theta[problem.dofs.theta_dof[cell_index]];
  }
  return es;
}

AssemblyMode default_assembly_mode(const Problem& problem) {
  if (problem.dofs.pressure_layout == PressureLayout::per_node) {
    return AssemblyMode::saddle;
  }
  if (problem.kind == FormulationKind::truly_incompressible) {
    return AssemblyMode::saddle;
  }
  return AssemblyMode::condensed;
}

MatrixStructure matrix_structure(FormulationKind kind, VolId id) {
  if (kind == FormulationKind::weak_galerkin && id != VolId::V3) {
    return MatrixStructure::unsymmetric;
  }
  return MatrixStructure::symmetric_indefinite;
}

AssembledSystem assemble(const Problem& problem, const SolutionState& state,
                         double load_factor, AssemblyMode mode,
                         const VecX* du_prescribed) {
  const DofMap& dofs = problem.dofs;
  const Mesh& mesh = problem.mesh;
  const int n_cells = static_cast<int>(mesh.cells.size());
  const bool three_field = problem.kind == FormulationKind::three_field;
  if (mode == AssemblyMode::condensed &&
      dofs.pressure_layout == PressureLayout::per_node) {
    throw CondensationError(
        "assemble: continuous pressure cannot be condensed element-wise; use the "
        "saddle-point mode");
  }

  const int n_theta_sys = (mode == AssemblyMode::saddle && three_field) ? dofs.n_theta : 0;
  const int n_pressure_sys = (mode == AssemblyMode::saddle) ? dofs.n_pressure : 0;
  const int theta_base = dofs.n_disp;
  const int pressure_base = dofs.n_disp + n_theta_sys;
  const int n_system = dofs.n_disp + n_theta_sys + n_pressure_sys;
  const int n_el_dofs = 3 * problem.element.n_disp();

  VecX Ru_full = VecX::Zero(3 * static_cast<int>(mesh.nodes.size()));
  VecX Rp_full = VecX::Zero(dofs.n_pressure);
  VecX Rt_full = VecX::Zero(dofs.n_theta);
  VecX Rhat_full;

  AssembledSystem sys;
  if (mode == AssemblyMode::condensed) {
    Rhat_full = VecX::Zero(Ru_full.size());
    sys.recovery.resize(n_cells);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n_cells) * n_el_dofs * (n_el_dofs + 8));

  std::vector<int> slot(n_el_dofs), sysidx(n_el_dofs);
  VecX del(n_el_dofs);
  for (int e = 0; e < n_cells; ++e) {
    const ElementState es = gather_element_state(problem, state, e);
    ElementBlocks blocks;
    try {
      blocks = three_field
                   ? element_blocks_three_field(problem.element, es, problem.material)
                   : element_blocks_two_field(problem.kind, problem.element, es,
                                              problem.material, state.history[e]);
    } catch (const InvertedElementError& err) {
      throw InvertedElementError("element " + std::to_string(e) + ": " + err.what(),
                                 err.jacobian);
    } catch (const MaterialLockupError& err) {
      throw MaterialLockupError("element " + std::to_string(e) + ": " + err.what());
    }

    const Cell& cell = mesh.cells[e];
    for (int a = 0; a < problem.element.n_disp(); ++a) {
      for (int c = 0; c < 3; ++c) {
        slot[3 * a + c] = 3 * cell.nodes[a] + c;
        sysidx[3 * a + c] = dofs.disp_dof[slot[3 * a + c]];
      }
    }
    const int np = static_cast<int>(blocks.Rp.size());
    std::vector<int> pslot(np);
    if (dofs.pressure_layout == PressureLayout::per_element) {
      pslot[0] = dofs.pressure_dof[e];
    } else {
      for (int a = 0; a < np; ++a) pslot[a] = dofs.pressure_dof[cell.nodes[a]];
    }

    bool has_del = false;
    if (du_prescribed != nullptr) {
      for (int i = 0; i < n_el_dofs; ++i) {
        del[i] = (*du_prescribed)[slot[i]];
        has_del = has_del || del[i] != 0.0;
      }
    }

    for (int i = 0; i < n_el_dofs; ++i) Ru_full[slot[i]] += blocks.Ru[i];
    for (int a = 0; a < np; ++a) Rp_full[pslot[a]] += blocks.Rp[a];
    if (three_field) Rt_full[dofs.theta_dof[e]] += blocks.Rt(0);
    if (has_del) {
      const VecX kud = blocks.Kuu * del;
      const VecX kpd = blocks.Kpu * del;
      for (int i = 0; i < n_el_dofs; ++i) Ru_full[slot[i]] += kud[i];
      for (int a = 0; a < np; ++a) Rp_full[pslot[a]] += kpd[a];
    }

    if (mode == AssemblyMode::condensed) {
      CondensedElement ce = condense(blocks, problem.kind);
      if (has_del) ce.Rhat.noalias() += ce.Khat * del;
      for (int i = 0; i < n_el_dofs; ++i) {
        Rhat_full[slot[i]] += ce.Rhat[i];
        if (sysidx[i] < 0) continue;
        for (int j = 0; j < n_el_dofs; ++j) {
          if (sysidx[j] >= 0) triplets.emplace_back(sysidx[i], sysidx[j], ce.Khat(i, j));
        }
      }
      sys.recovery[e] = std::move(ce);
    } else {
      for (int i = 0; i < n_el_dofs; ++i) {
        if (sysidx[i] < 0) continue;
        for (int j = 0; j < n_el_dofs; ++j) {
          if (sysidx[j] >= 0) triplets.emplace_back(sysidx[i], sysidx[j], blocks.Kuu(i, j));
        }
        for (int a = 0; a < np; ++a) {
          triplets.emplace_back(sysidx[i], pressure_base + pslot[a], blocks.Kup(i, a));
          triplets.emplace_back(pressure_base + pslot[a], sysidx[i], blocks.Kpu(a, i));
        }
      }
      for (int a = 0; a < np; ++a) {
        for (int b = 0; b < np; ++b) {
          triplets.emplace_back(pressure_base + pslot[a], pressure_base + pslot[b],
                                blocks.Kpp(a, b));
        }
      }
      if (three_field) {
        const int t = theta_base + dofs.theta_dof[e];
        triplets.emplace_back(t, t, blocks.Ktt(0, 0));
        triplets.emplace_back(t, pressure_base + pslot[0], blocks.Ktp(0, 0));
        triplets.emplace_back(pressure_base + pslot[0], t, blocks.Ktp(0, 0));
      }
    }
  }

  const VecX f_ext = load_factor * problem.f_ext_base;
  VecX Ru_sys = VecX::Zero(dofs.n_disp);
  for (int i = 0; i < static_cast<int>(Ru_full.size()); ++i) {
    const int si = dofs.disp_dof[i];
    if (si >= 0) Ru_sys[si] = Ru_full[i] - f_ext[i];
  }
  sys.full_norm = std::sqrt(Ru_sys.squaredNorm() + Rp_full.squaredNorm() +
                            Rt_full.squaredNorm());

  sys.R.resize(n_system);
  if (mode == AssemblyMode::saddle) {
    sys.R.head(dofs.n_disp) = Ru_sys;
    if (n_theta_sys > 0) sys.R.segment(theta_base, n_theta_sys) = Rt_full;
    if (n_pressure_sys > 0) sys.R.tail(n_pressure_sys) = Rp_full;
  } else {
    for (int i = 0; i < static_cast<int>(Rhat_full.size()); ++i) {
      const int si = dofs.disp_dof[i];
      if (si >= 0) sys.R[si] = Rhat_full[i] - f_ext[i];
    }
  }

  sys.K.resize(n_system, n_system);
  sys.K.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

VecX linear_solve(const Eigen::SparseMatrix<double>& A, const VecX& b,
                  MatrixStructure structure) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw SolverError("linear_solve: dimension mismatch");
  }
  if (b.size() == 0) return VecX();
  const double b_norm = b.norm();
  if (b_norm == 0.0) return VecX::Zero(b.size());

  const auto relative_residual = [&](const VecX& x) {
    return (A * x - b).norm() / b_norm;
  };
  // One step of iterative refinement recovers the last digits when the
  // factorisation alone lands short of the backward-error contract.
  const auto polish = [&](const auto& solver, VecX x) {
    if (x.allFinite() && relative_residual(x) > 1e-13) {
      x += solver.solve((b - A * x).eval());
    }
    return x;
  };

  std::string diagnostics;
  if (structure == MatrixStructure::spd) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() == Eigen::Success) {
      const VecX x = polish(llt, llt.solve(b));
      if (x.allFinite() && relative_residual(x) <= 1e-10) return x;
    }
    diagnostics = "Cholesky pass rejected; ";
  } else if (structure == MatrixStructure::symmetric_indefinite) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() == Eigen::Success) {
      const VecX x = polish(ldlt, ldlt.solve(b));
      if (x.allFinite() && relative_residual(x) <= 1e-10) return x;
      diagnostics = "LDLT pass rejected (" + pivot_diagnostic(ldlt.vectorD()) + "); ";
    } else {
      diagnostics = "LDLT factorisation failed; ";
    }
  }

  // Pivoted LU: the fallback for indefinite patterns that defeat the
  // Cholesky-type factorisations, and the primary path for unsymmetric
  // systems.
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success) {
    throw SolverError("linear_solve: " + diagnostics + "LU factorisation failed (" +
                      lu.lastErrorMessage() + ")");
  }
  const VecX x = polish(lu, lu.solve(b));
  const double rel = x.allFinite() ? relative_residual(x)
                                   : std::numeric_limits<double>::infinity();
  if (!(rel <= 1e-10)) {
    throw SolverError("linear_solve: " + diagnostics + "relative residual " +
                      std::to_string(rel) +
                      " exceeds 1e-10; matrix judged numerically singular");
  }
  return x;
}

LoadProgram LoadProgram::uniform(int n_steps) {
  LoadProgram program;
  program.n_steps = n_steps;
  return program;
}

double LoadProgram::factor(int step) const {
  if (n_steps < 1) throw ConfigError("load program: need at least one step");
  if (step < 0 || step >= n_steps) {
    throw DomainError("load program: step index out of range");
  }
  if (factors.empty()) {
    return static_cast<double>(step + 1) / static_cast<double>(n_steps);
  }
  if (static_cast<int>(factors.size()) != n_steps) {
    throw ConfigError("load program: expected " + std::to_string(n_steps) +
                      " factors, got " + std::to_string(factors.size()));
  }
  return factors[step];
}

NewtonResult newton_solve(const Problem& problem, const LoadProgram& program,
                          const NewtonOptions& options, AssemblyMode mode) {
  if (!program.dead_loads) {
    throw CapabilityError("newton_solve: follower loads are not implemented");
  }
  if (program.n_steps < 1) {
    throw ConfigError("newton_solve: need at least one load step");
  }

  const DofMap& dofs = problem.dofs;
  const MatrixStructure structure =
      matrix_structure(problem.kind, problem.material.vol.id);
  const int n_cells = static_cast<int>(problem.mesh.cells.size());
  const int n_theta_sys =
      (mode == AssemblyMode::saddle && problem.kind == FormulationKind::three_field)
          ? dofs.n_theta
          : 0;

  NewtonResult result;
  SolutionState state = initial_state(problem);

  for (int step = 0; step < program.n_steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lf = program.factor(step);
    StepRecord rec;
    rec.step = step;
    rec.load_factor = lf;

    // The Dirichlet increment of this step enters through the stiffness in
    // the first linear solve (assemble adds K * du_presc to the residual);
    // imposing it directly on the state would hand the whole increment to
    // the boundary layer of elements and can push materials with finite
    // extensibility past their limits before equilibrium redistributes it.
    VecX du_presc = VecX::Zero(state.u.size());
    bool pending = false;
    for (size_t i = 0; i < dofs.disp_dof.size(); ++i) {
      if (dofs.disp_dof[i] < 0) {
        du_presc[i] = lf * dofs.prescribed[i] - state.u[i];
        pending = pending || du_presc[i] != 0.0;
      }
    }

    bool converged = false;
    std::string failure;
    while (true) {
      const int iteration = static_cast<int>(rec.residual_norms.size());
      AssembledSystem sys;
      try {
        sys = assemble(problem, state, lf, mode, pending ? &du_presc : nullptr);
      } catch (const InvertedElementError& err) {
        throw InvertedElementError("step " + std::to_string(step + 1) +
                                       " iteration " + std::to_string(iteration) +
                                       ": " + err.what(),
                                   err.jacobian);
      } catch (const MaterialLockupError& err) {
        throw MaterialLockupError("step " + std::to_string(step + 1) + " iteration " +
                                  std::to_string(iteration) + ": " + err.what());
      }

      const double norm = sys.full_norm;
      rec.residual_norms.push_back(norm);
      if (!std::isfinite(norm)) {
        failure = "residual norm is not finite";
        break;
      }
      if (!pending && (norm <= options.tol_abs ||
                       norm <= options.tol_rel * rec.residual_norms.front())) {
        converged = true;
        break;
      }
      if (iteration >= options.max_iterations) {
        failure = "no convergence within " + std::to_string(options.max_iterations) +
                  " iterations (residual " + std::to_string(norm) + ")";
        break;
      }

      VecX dx;
      try {
        dx = linear_solve(sys.K, VecX(-sys.R), structure);
      } catch (const SolverError& err) {
        throw SolverError("step " + std::to_string(step + 1) + " iteration " +
                          std::to_string(iteration + 1) + ": " + err.what());
      }

      for (size_t i = 0; i < dofs.disp_dof.size(); ++i) {
        const int si = dofs.disp_dof[i];
        if (si >= 0) {
          state.u[i] += dx[si];
        } else if (pending) {
          state.u[i] = lf * dofs.prescribed[i];
        }
      }
      if (mode == AssemblyMode::saddle) {
        if (n_theta_sys > 0) state.theta += dx.segment(dofs.n_disp, n_theta_sys);
        if (dofs.n_pressure > 0) state.p += dx.tail(dofs.n_pressure);
      } else {
        for (int e = 0; e < n_cells; ++e) {
          const CondensedElement& ce = sys.recovery[e];
          const Cell& cell = problem.mesh.cells[e];
          VecX du(3 * problem.element.n_disp());
          for (int a = 0; a < problem.element.n_disp(); ++a) {
            for (int c = 0; c < 3; ++c) {
              const int full = 3 * cell.nodes[a] + c;
              const int si = dofs.disp_dof[full];
              du[3 * a + c] = si >= 0 ? dx[si] : (pending ? du_presc[full] : 0.0);
            }
          }
          const double dp = (ce.dp_du * du + ce.dp_c)(0);
          state.p[dofs.pressure_dof[e]] += dp;
          if (ce.has_theta) {
            state.theta[dofs.theta_dof[e]] += ce.dth_dp * dp + ce.dth_c;
          }
        }
      }
      pending = false;
    }

    rec.iterations = static_cast<int>(rec.residual_norms.size()) - 1;
    rec.converged = converged;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.u = state.u;
    rec.p = state.p;
    rec.theta = state.theta;
    result.log.steps.push_back(std::move(rec));

    if (!converged) {
      result.success = false;
      result.failed_step = step;
      result.message = "load step " + std::to_string(step + 1) + " of " +
                       std::to_string(program.n_steps) + ": " + failure;
      result.state = std::move(state);
      return result;
    }

    if (problem.kind == FormulationKind::proposed_consistent) {
      for (int e = 0; e < n_cells; ++e) {
        const ElementState es = gather_element_state(problem, state, e);
        const VolumeRatios ratios = element_volume_ratios(problem.element, es);
        for (int q = 0; q < problem.element.n_qp(); ++q) {
          state.history[e][q] = update_history(problem.material.vol, ratios.at_qp[q]);
        }
      }
    }
  }

  result.success = true;
  result.failed_step = -1;
  result.state = std::move(state);
  return result;
}

NewtonResult newton_solve(const Problem& problem, const LoadProgram& program,
                          const NewtonOptions& options) {
  return newton_solve(problem, program, options, default_assembly_mode(problem));
}

}  // namespace hyperfem
