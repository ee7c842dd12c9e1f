#pragma once

#include "hyperfem/formulations.hpp"

#include <span>
#include <vector>

namespace hyperfem {

// The complementary potential has no finite minimiser for this pressure (or
// none inside the searched volume-ratio range).
struct UnboundedTransformError : DomainError {
  using DomainError::DomainError;
};

// Relative Frobenius error of every analytic tangent block against a central
// finite difference of the element residual.  Blocks that are analytically
// zero are measured against the largest block norm instead of their own.
struct TangentCheckResult {
  double worst = 0.0;
  double Kuu = 0.0;
  double Kup = 0.0;
  double Kpu = 0.0;
  double Kpp = 0.0;
  double Kut = 0.0;
  double Ktu = 0.0;
  double Ktp = 0.0;
  double Ktt = 0.0;
};

// Differentiates the stacked element residual [Ru, Rp, Rt] with respect to
// [u, p, theta] by central differences (step h scaled by the perturbed
// entry) and compares block by block.  h must lie in [1e-8, 1e-4]; history
// feeds proposed_consistent and is ignored by the other kinds.
TangentCheckResult fd_tangent_check(FormulationKind kind, const MixedElement& element,
                                    const ElementState& state,
                                    const MaterialModel& material,
                                    std::span<const QuadHistory> history,
                                    double h = 1e-6);

// Complementary volumetric potential Gamma(p) = inf_{J>0} [Psi(J) - p J].
struct LegendreResult {
  double p = 0.0;
  double Gamma = 0.0;
  double J_star = 1.0;
  enum class Method { closed_form, grid_newton } method = Method::grid_newton;
  // Every root of Psi'(J) = p located in the searched range; more than one
  // entry flags the multi-root hazard of a blind Newton iteration.
  std::vector<double> stationary_points;
};

// The quadratic function (V3) inverts in closed form:
// J(p) = 1 + p/kappa, Gamma(p) = -p [1 + p/(2 kappa)].  Everything else is
// bracketed by a 200-point logarithmic scan of J in [1e-3, 50] and polished
// by a safeguarded Newton iteration; force_grid routes V3 through the same
// machinery for cross-checking.  Throws UnboundedTransformError when the
// minimum sits on the range boundary or provably does not exist.
LegendreResult legendre_transform(const VolumetricModel& vol, double p,
                                  bool force_grid = false);

// Homogeneous uniaxial stress state F = diag(lambda, lambda_t, lambda_t)
// with traction-free lateral faces and the constitutive pressure
// p = Psi'(J).  nu = 0.5 takes the exact incompressible branch
// lambda_t = lambda^{-1/2} with p acting as the Lagrange multiplier.
struct UniaxialResult {
  double lambda = 1.0;
  double lambda_t = 1.0;
  double sigma_axial = 0.0;
  double pressure = 0.0;
  double J = 1.0;
};

UniaxialResult uniaxial_oracle(const MaterialModel& material, double lambda);

// Pressure-versus-volume-ratio table across volumetric models.
struct VolumetricSweep {
  std::vector<VolId> ids;
  std::vector<double> J;
  MatX p;  // row = J sample, column = id
};

VolumetricSweep volumetric_sweep(const std::vector<VolId>& ids, double kappa,
                                 double J_min, double J_max, int samples);

}  // namespace hyperfem
