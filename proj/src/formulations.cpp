#include "hyperfem/formulations.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace hyperfem {

namespace {

// Kinematic quantities of one quadrature point: reference measure, current
// deformation state, pressure-basis values, and the displacement-basis
// gradients pushed to the current configuration.
struct QpKinematics {
  double dV;            // reference measure times quadrature weight
  DeformationState<double> state;
  Eigen::Matrix<double, Eigen::Dynamic, 3> dN_dx;
  VecX Np;
};

QpKinematics qp_kinematics(const MixedElement& element, const ElementState& state,
                           int q) {
  const ShapeEval& shape = element.disp_shape[q];
  const Mat3 Jref = state.X.transpose() * shape.gradients;
  const double detJref = Jref.determinant();
  if (!(detJref > 0.0)) {
    throw InvertedElementError(
        "element geometry map has non-positive Jacobian " +
            std::to_string(detJref) + " at quadrature point " + std::to_string(q),
        detJref);
  }
  const Mat3 Jref_inv = Jref.inverse();
  const Eigen::Matrix<double, Eigen::Dynamic, 3> dN_dX = shape.gradients * Jref_inv;

  const int n = element.n_disp();
  const auto U = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3,
                                                Eigen::RowMajor>>(state.u.data(), n, 3);
  const Mat3 grad_u_ref = U.transpose() * dN_dX;

  QpKinematics qp;
  try {
    qp.state = deformation_gradient(grad_u_ref);
  } catch (const InvertedElementError& err) {
    throw InvertedElementError(std::string(err.what()) + " at quadrature point " +
                                   std::to_string(q),
                               err.jacobian);
  }
  qp.dN_dx = dN_dX * qp.state.F.inverse();
  qp.dV = detJref * element.rule.weights[q];
  qp.Np = element.pres_values[q];
  return qp;
}

// Shared displacement-row accumulation: Kuu, Kup, and the internal part of
// Ru, all integrated over the current configuration (dv = J dV).
void accumulate_displacement_row(const QpKinematics& qp, const DeviatoricModel& dev,
                                 double p, ElementBlocks& blocks) {
  const auto dev_state = dev_eval(dev, qp.state);
  const Mat3 sigma = effective_cauchy(dev_state.Pdev, qp.state.F, qp.state.J, p);
  const Mat9 e = elasticity_tensor(dev_state.Adev, qp.state.F, qp.state.J, p);
  const OperatorMatrices op = operator_matrices(qp.dN_dx);

  const double dv = qp.state.J * qp.dV;
  blocks.Ru += op.G.transpose() * flatten(sigma) * dv;
  blocks.Kuu += op.G.transpose() * e * op.G * dv;
  blocks.Kup += op.D.transpose() * qp.Np.transpose() * dv;
}

void check_two_field_kind(FormulationKind kind) {
  if (kind == FormulationKind::three_field) {
    throw CapabilityError(
        "element_blocks_two_field: three_field has its own block routine");
  }
}

MixedElement make_element(BasisFamily disp, BasisFamily pres, int degree) {
  MixedElement element;
  element.displacement = disp;
  element.pressure = pres;
  element.rule = quadrature_rule(disp.cell_shape, degree);
  element.disp_shape.reserve(element.rule.points.size());
  element.pres_values.reserve(element.rule.points.size());
  for (const Vec3& xi : element.rule.points) {
    element.disp_shape.push_back(shape_eval(disp, xi));
    element.pres_values.push_back(shape_eval(pres, xi).values);
  }
  return element;
}

}  // namespace

const char* to_string(FormulationKind kind) {
  switch (kind) {
    case FormulationKind::perturbed_lagrangian: return "perturbed_lagrangian";
    case FormulationKind::weak_galerkin: return "weak_galerkin";
    case FormulationKind::proposed_consistent: return "proposed_consistent";
    case FormulationKind::three_field: return "three_field";
    case FormulationKind::truly_incompressible: return "truly_incompressible";
  }
  return "unknown";
}

QuadHistory update_history(const VolumetricModel& vol, double J_prev) {
  const auto v = vol_eval(vol, J_prev);
  if (!(v.d2psi > 0.0)) {
    throw HistoryError(
        "update_history: non-convex volumetric energy at J_prev = " +
        std::to_string(J_prev) + " (Psi'' = " + std::to_string(v.d2psi) + ")");
  }
  QuadHistory h;
  h.J_prev = J_prev;
  h.Jhat = J_prev - v.dpsi / v.d2psi;
  h.theta_hat = 1.0 / v.d2psi;
  return h;
}

QuadHistory incompressible_history() { return QuadHistory{1.0, 1.0, 0.0}; }

ConstraintEval constraint_eval(FormulationKind kind, const VolumetricModel& vol,
                               double J, double p) {
  if (kind == FormulationKind::truly_incompressible) {
    return ConstraintEval{J - 1.0, 1.0, 0.0};
  }
  const auto v = vol_eval(vol, J);
  const double inv_kappa = 1.0 / vol.kappa;
  return ConstraintEval{inv_kappa * (v.dpsi - p), inv_kappa * v.d2psi, inv_kappa};
}

MixedElement MixedElement::hex8_p0() {
  const BasisFamily disp{CellShape::hexahedron, FieldRole::displacement,
                         BasisOrder::linear, BasisKind::lagrange};
  const BasisFamily pres{CellShape::hexahedron, FieldRole::pressure,
                         BasisOrder::constant, BasisKind::lagrange};
  return make_element(disp, pres, 3);
}

MixedElement MixedElement::tet10_p1(BasisKind kind) {
  const BasisFamily disp{CellShape::tetrahedron, FieldRole::displacement,
                         BasisOrder::quadratic, kind};
  const BasisFamily pres{CellShape::tetrahedron, FieldRole::pressure,
                         BasisOrder::linear, kind};
  return make_element(disp, pres, 4);
}

ElementBlocks element_blocks_two_field(FormulationKind kind,
                                       const MixedElement& element,
                                       const ElementState& state,
                                       const MaterialModel& material,
                                       std::span<const QuadHistory> history) {
  check_two_field_kind(kind);
  const int nu_dofs = 3 * element.n_disp();
  const int np = element.n_pres();

  ElementBlocks blocks;
  blocks.Kuu = MatX::Zero(nu_dofs, nu_dofs);
  blocks.Kup = MatX::Zero(nu_dofs, np);
  blocks.Kpu = MatX::Zero(np, nu_dofs);
  blocks.Kpp = MatX::Zero(np, np);
  blocks.Ru = VecX::Zero(nu_dofs);
  blocks.Rp = VecX::Zero(np);

  for (int q = 0; q < element.n_qp(); ++q) {
    const QpKinematics qp = qp_kinematics(element, state, q);
    const double p = qp.Np.dot(state.p);
    accumulate_displacement_row(qp, material.dev, p, blocks);

    const double J = qp.state.J;
    const double dv = J * qp.dV;
    switch (kind) {
      case FormulationKind::weak_galerkin: {
        const ConstraintEval c = constraint_eval(kind, material.vol, J, p);
        const OperatorMatrices op = operator_matrices(qp.dN_dx);
        blocks.Kpu += c.dC_dJ * qp.Np * op.D * dv;
        blocks.Kpp -= c.vartheta * qp.Np * qp.Np.transpose() * qp.dV;
        blocks.Rp += qp.Np * c.C * qp.dV;
        break;
      }
      case FormulationKind::perturbed_lagrangian:
      case FormulationKind::proposed_consistent:
      case FormulationKind::truly_incompressible: {
        QuadHistory h;
        if (kind == FormulationKind::perturbed_lagrangian) {
          h = QuadHistory{1.0, 1.0, 1.0 / material.vol.kappa};
        } else if (kind == FormulationKind::truly_incompressible) {
          h = incompressible_history();
        } else {
          h = history[q];
        }
        const OperatorMatrices op = operator_matrices(qp.dN_dx);
        blocks.Kpu += qp.Np * op.D * dv;
        blocks.Kpp -= h.theta_hat * qp.Np * qp.Np.transpose() * qp.dV;
        blocks.Rp += qp.Np * (J - h.Jhat - h.theta_hat * p) * qp.dV;
        break;
      }
      case FormulationKind::three_field:
        break;  // rejected above
    }
  }
  return blocks;
}

ElementBlocks element_blocks_three_field(const MixedElement& element,
                                         const ElementState& state,
                                         const MaterialModel& material) {
  if (element.pressure.order != BasisOrder::constant) {
    throw CapabilityError(
        "element_blocks_three_field: requires element-constant pressure");
  }
  const double Jbar = 1.0 + state.theta;
  if (!(Jbar > 0.0)) {
    throw DomainError("element_blocks_three_field: non-positive Jbar = " +
                      std::to_string(Jbar));
  }
  const int nu_dofs = 3 * element.n_disp();

  ElementBlocks blocks;
  blocks.Kuu = MatX::Zero(nu_dofs, nu_dofs);
  blocks.Kup = MatX::Zero(nu_dofs, 1);
  blocks.Kpu = MatX::Zero(1, nu_dofs);
  blocks.Kpp = MatX::Zero(1, 1);
  blocks.Ru = VecX::Zero(nu_dofs);
  blocks.Rp = VecX::Zero(1);
  blocks.Kut = MatX::Zero(nu_dofs, 1);
  blocks.Ktt = MatX::Zero(1, 1);
  blocks.Ktp = MatX::Zero(1, 1);
  blocks.Rt = VecX::Zero(1);

  const auto vol_bar = vol_eval(material.vol, Jbar);
  const double p = state.p(0);

  for (int q = 0; q < element.n_qp(); ++q) {
    const QpKinematics qp = qp_kinematics(element, state, q);
    accumulate_displacement_row(qp, material.dev, p, blocks);

    blocks.Kpu += qp.Np * operator_matrices(qp.dN_dx).D * (qp.state.J * qp.dV);
    blocks.Rp(0) += (qp.state.J - Jbar) * qp.dV;
    blocks.Rt(0) += (vol_bar.dpsi - p) * qp.dV;
    blocks.Ktt(0, 0) += vol_bar.d2psi * qp.dV;
    blocks.Ktp(0, 0) -= qp.dV;
  }
  return blocks;
}

VolumeRatios element_volume_ratios(const MixedElement& element,
                                   const ElementState& state) {
  VolumeRatios out;
  out.at_qp.reserve(element.n_qp());
  double current_volume = 0.0;
  for (int q = 0; q < element.n_qp(); ++q) {
    const QpKinematics qp = qp_kinematics(element, state, q);
    out.at_qp.push_back(qp.state.J);
    out.reference_volume += qp.dV;
    current_volume += qp.state.J * qp.dV;
  }
  out.average = current_volume / out.reference_volume;
  return out;
}

CondensedElement condense(const ElementBlocks& blocks, FormulationKind kind) {
  CondensedElement out;
  MatX Kpp = blocks.Kpp;
  VecX Rp = blocks.Rp;

  if (kind == FormulationKind::three_field) {
    // Eliminate theta first; the element-constant dof makes Ktt scalar.
    const double Ktt = blocks.Ktt(0, 0);
    if (Ktt == 0.0 || !std::isfinite(1.0 / Ktt)) {
      throw CondensationError("condense: singular volume-change block Ktt");
    }
    const double Ktp = blocks.Ktp(0, 0);
    Kpp = blocks.Kpp - MatX::Constant(1, 1, Ktp * Ktp / Ktt);
    Rp = blocks.Rp - VecX::Constant(1, Ktp * blocks.Rt(0) / Ktt);
    out.dth_dp = -Ktp / Ktt;
    out.dth_c = -blocks.Rt(0) / Ktt;
    out.has_theta = true;
  }

  Eigen::FullPivLU<MatX> lu(Kpp);
  if (!lu.isInvertible()) {
    throw CondensationError(
        "condense: singular pressure block (use the full saddle-point solve)");
  }
  out.dp_du = -lu.solve(blocks.Kpu);
  out.dp_c = -lu.solve(Rp);
  out.Khat = blocks.Kuu + blocks.Kup * out.dp_du;
  out.Rhat = blocks.Ru + blocks.Kup * out.dp_c;
  return out;
}

}  // namespace hyperfem
