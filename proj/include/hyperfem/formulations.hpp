#pragma once

#include "hyperfem/elements.hpp"
#include "hyperfem/kinematics.hpp"
#include "hyperfem/materials.hpp"
#include "hyperfem/types.hpp"

#include <span>
#include <vector>

namespace hyperfem {

// The mixed displacement-pressure treatments implemented here:
//  - perturbed_lagrangian:  pressure equation J - 1 - p/kappa, fixed
//    compliance 1/kappa regardless of the volumetric function;
//  - weak_galerkin:         pressure equation (1/kappa)[Psi'(J) - p] tested
//    directly, consistent tangent, generally unsymmetric;
//  - proposed_consistent:   the pressure equation linearised about the last
//    converged load step (Jhat, theta_hat frozen per quadrature point),
//    giving a symmetric tangent for every volumetric function;
//  - three_field:           independent volume-change field per element plus
//    pressure, element-constant both;
//  - truly_incompressible:  exact constraint J = 1, the nu = 0.5 limit of
//    proposed_consistent (Jhat = 1, theta_hat = 0).
enum class FormulationKind {
  perturbed_lagrangian,
  weak_galerkin,
  proposed_consistent,
  three_field,
  truly_incompressible,
};

const char* to_string(FormulationKind kind);

// Per-quadrature-point linearisation history of proposed_consistent, frozen
// at the last converged load step: the pressure equation of the next step is
// J - Jhat - theta_hat * p with Jhat = J_prev - p(J_prev)/Psi''(J_prev) and
// theta_hat = 1/Psi''(J_prev).
struct QuadHistory {
  double J_prev = 1.0;
  double Jhat = 1.0;
  double theta_hat = 0.0;
};

// Rebuild the history from the volume ratio at the previous converged step.
// Throws HistoryError when Psi''(J_prev) <= 0 (the linearisation point is not
// convex; V8 reaches this at J_prev >= e).
QuadHistory update_history(const VolumetricModel& vol, double J_prev);

// The exact-constraint limit: Jhat = 1, theta_hat = 0.
QuadHistory incompressible_history();

struct ConstraintEval {
  double C;
  double dC_dJ;
  double vartheta;  // minus the p-derivative of C
};

// Constraint function of the weak Galerkin treatment.  The truly
// incompressible branch enforces C = J - 1; otherwise C = (1/kappa) *
// [Psi'(J) - p] with dC/dJ = Psi''(J)/kappa and vartheta = 1/kappa.
ConstraintEval constraint_eval(FormulationKind kind, const VolumetricModel& vol,
                               double J, double p);

// A displacement/pressure basis pair with its quadrature rule and the shape
// data pretabulated at every quadrature point.  Shared read-only by all
// elements of one kind.
struct MixedElement {
  BasisFamily displacement;
  BasisFamily pressure;
  QuadratureRule rule;
  std::vector<ShapeEval> disp_shape;  // per quadrature point
  std::vector<VecX> pres_values;      // per quadrature point

  int n_disp() const { return displacement.count(); }
  int n_pres() const { return pressure.count(); }
  int n_qp() const { return static_cast<int>(rule.points.size()); }

  // Trilinear displacement with element-constant pressure, degree-3 Gauss.
  static MixedElement hex8_p0();
  // Quadratic displacement with linear vertex-continuous pressure on
  // tetrahedra, degree-4 rule; Lagrange or Bernstein flavour.
  static MixedElement tet10_p1(BasisKind kind);
};

// Per-element unknowns: reference coordinates of the displacement nodes
// (row per node), the stacked nodal displacements, the element pressure
// dofs, and the element volume-change dof (three-field only).
struct ElementState {
  Eigen::Matrix<double, Eigen::Dynamic, 3> X;
  VecX u;
  VecX p;
  double theta = 0.0;
};

// Dense element tangent blocks and residuals.  The theta blocks are sized
// only by element_blocks_three_field; Kut is identically zero there because
// the energy splits additively into deviatoric and volumetric parts.
struct ElementBlocks {
  MatX Kuu, Kup, Kpu, Kpp;
  VecX Ru, Rp;
  MatX Kut, Ktt, Ktp;
  VecX Rt;
};

// Tangent blocks and residuals of the two-field treatments.  External loads
// are not subtracted here; the assembly owns them.  history must hold one
// entry per quadrature point for proposed_consistent and is ignored by the
// other kinds.
ElementBlocks element_blocks_two_field(FormulationKind kind,
                                       const MixedElement& element,
                                       const ElementState& state,
                                       const MaterialModel& material,
                                       std::span<const QuadHistory> history);

// Tangent blocks and residuals of the three-field treatment (element-constant
// theta and pressure).
ElementBlocks element_blocks_three_field(const MixedElement& element,
                                         const ElementState& state,
                                         const MaterialModel& material);

// Statically condensed element system.  For the two-field kinds the pressure
// dofs are eliminated through Kpp; for three_field theta is eliminated
// through Ktt first, then pressure through the resulting Kpp_tilde.  The
// affine recovery maps reproduce the eliminated increments exactly:
//   dp = dp_du * du + dp_c,   dtheta = dth_dp * dp + dth_c.
struct CondensedElement {
  MatX Khat;
  VecX Rhat;
  MatX dp_du;
  VecX dp_c;
  double dth_dp = 0.0;
  double dth_c = 0.0;
  bool has_theta = false;
};

CondensedElement condense(const ElementBlocks& blocks, FormulationKind kind);

// Volume ratio at every quadrature point together with the reference-volume
// weighted element average.
struct VolumeRatios {
  std::vector<double> at_qp;
  double average = 1.0;
  double reference_volume = 0.0;
};

VolumeRatios element_volume_ratios(const MixedElement& element,
                                   const ElementState& state);

}  // namespace hyperfem
