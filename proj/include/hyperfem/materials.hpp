#pragma once

#include "hyperfem/kinematics.hpp"
#include "hyperfem/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hyperfem {

// Catalog of volumetric energy functions Psi_vol(J).  All entries vanish at
// J = 1 with p(1) = 0 and Psi''(1) = kappa, but differ strongly away from
// J = 1 (V1 stiffens fastest in expansion, V8 softest).
enum class VolId { V1 = 1, V2, V3, V4, V5, V6, V7, V8 };

struct VolumetricModel {
  VolId id;
  double kappa;
};

template <class Scalar>
struct VolDerivs {
  Scalar psi;
  Scalar dpsi;    // the volumetric pressure p(J)
  Scalar d2psi;
};

template <class Scalar>
VolDerivs<Scalar> vol_eval(VolId id, Scalar kappa, Scalar J) {
  if (!(J > Scalar(0))) {
    throw DomainError("vol_eval: J must be positive, got " + std::to_string(double(J)));
  }
  using std::log;
  using std::pow;
  const Scalar k = kappa;
  VolDerivs<Scalar> out{};
  switch (id) {
    case VolId::V1:
      out.psi = k / 50 * (pow(J, 5) + pow(J, -5) - 2);
      out.dpsi = k / 10 * (pow(J, 4) - pow(J, -6));
      out.d2psi = k / 5 * (2 * pow(J, 3) + 3 * pow(J, -7));
      break;
    case VolId::V2: {
      const Scalar g = J * J - pow(J, -2);
      out.psi = k / 32 * g * g;
      out.dpsi = k / 8 * g * (J + pow(J, -3));
      out.d2psi = k / 8 * (3 * J * J + 5 * pow(J, -6));
      break;
    }
    case VolId::V3:
      out.psi = k / 2 * (J - 1) * (J - 1);
      out.dpsi = k * (J - 1);
      out.d2psi = k;
      break;
    case VolId::V4:
      out.psi = k / 4 * (J * J - 1 - 2 * log(J));
      out.dpsi = k / 2 * (J - 1 / J);
      out.d2psi = k / 2 * (1 + 1 / (J * J));
      break;
    case VolId::V5:
      out.psi = k / 4 * ((J - 1) * (J - 1) + log(J) * log(J));
      out.dpsi = k / 2 * (J - 1 + log(J) / J);
      out.d2psi = k / (2 * J * J) * (J * J + 1 - log(J));
      break;
    case VolId::V6:
      out.psi = k * (J * log(J) - J + 1);
      out.dpsi = k * log(J);
      out.d2psi = k / J;
      break;
    case VolId::V7:
      out.psi = k * (J - log(J) - 1);
      out.dpsi = k * (1 - 1 / J);
      out.d2psi = k / (J * J);
      break;
    case VolId::V8:
      out.psi = k / 2 * log(J) * log(J);
      out.dpsi = k * log(J) / J;
      out.d2psi = k / (J * J) * (1 - log(J));
      break;
  }
  return out;
}

inline VolDerivs<double> vol_eval(const VolumetricModel& model, double J) {
  return vol_eval(model.id, model.kappa, J);
}

enum class DevKind { neo_hookean, gent };

// Deviatoric energy as a function of the isochoric invariant:
// neo_hookean  Psi = mu/2 (I1bar - 3);
// gent         Psi = -(mu Im / 2) ln(1 - (I1bar - 3)/Im), valid while
//              I1bar - 3 < Im (limited chain extensibility).
struct DeviatoricModel {
  DevKind kind;
  double mu;
  double Im = 0.0;  // gent only
};

template <class Scalar>
struct DevEval {
  Scalar psi;
  Mat3T<Scalar> Pdev;   // first Piola-Kirchhoff stress of the deviatoric part
  Mat9T<Scalar> Adev;   // d Pdev / d F, row i+3J, column k+3L
};

template <class Scalar>
DevEval<Scalar> dev_eval(const DeviatoricModel& model,
                         const DeformationState<Scalar>& state) {
  using std::log;
  using std::pow;
  const Scalar mu = Scalar(model.mu);
  const Scalar stretch = state.I1bar - Scalar(3);

  // First and second derivatives of the energy with respect to I1bar.
  Scalar fp, fpp;
  DevEval<Scalar> out{};
  if (model.kind == DevKind::neo_hookean) {
    out.psi = mu / 2 * stretch;
    fp = mu / 2;
    fpp = Scalar(0);
  } else {
    const Scalar Im = Scalar(model.Im);
    const Scalar gap = Im - stretch;
    if (!(gap > Scalar(0))) {
      throw MaterialLockupError(
          "dev_eval: gent extensibility limit reached, I1bar - 3 = " +
          std::to_string(double(stretch)) + " >= Im = " + std::to_string(model.Im));
    }
    out.psi = -(mu * Im / 2) * log(gap / Im);
    fp = (mu / 2) * Im / gap;
    fpp = (mu / 2) * Im / (gap * gap);
  }

  const Scalar J23 = pow(state.J, Scalar(-2.0 / 3.0));
  const Scalar I1 = state.F.squaredNorm();
  const Mat3T<Scalar> Finv = state.F.inverse();
  // H = d(I1bar)/dF up to the factor 2 J^{-2/3}.
  const Mat3T<Scalar> H = state.F - (I1 / 3) * Finv.transpose();

  out.Pdev = 2 * fp * J23 * H;

  const Scalar t_hh = 4 * fpp * J23 * J23;     // H (x) H
  const Scalar t_mix = -(Scalar(4) / 3) * fp * J23;  // the two rank-one J-terms
  const Scalar t_id = 2 * fp * J23;            // identity part
  const Scalar t_inv = t_id * I1 / 3;          // Finv (x) Finv part
  for (int i = 0; i < 3; ++i) {
    for (int Jm = 0; Jm < 3; ++Jm) {
      for (int k = 0; k < 3; ++k) {
        for (int L = 0; L < 3; ++L) {
          Scalar value = t_hh * H(i, Jm) * H(k, L)
                       + t_mix * (Finv(L, k) * H(i, Jm) + state.F(k, L) * Finv(Jm, i))
                       + t_inv * Finv(Jm, k) * Finv(L, i);
          if (i == k && Jm == L) value += t_id;
          out.Adev(tensor_index(i, Jm), tensor_index(k, L)) = value;
        }
      }
    }
  }
  return out;
}

// Effective Cauchy stress of the mixed formulations: the deviatoric
// push-forward plus the independent pressure field.
template <class Scalar>
Mat3T<Scalar> effective_cauchy(const Mat3T<Scalar>& Pdev, const Mat3T<Scalar>& F,
                               Scalar J, Scalar p) {
  return (Pdev * F.transpose()) / J + p * Mat3T<Scalar>::Identity();
}

struct StressState {
  Mat3 Pdev;
  Mat3 sigma_eff;
  double p;
};

// Spatial elasticity tensor in the 9x9 flattening of tensor_index:
// e_{ijkl} = (1/J) F_{jJ} Adev_{iJkL} F_{lL} + p (d_ij d_kl - d_il d_jk),
// so that Kuu = integral of G^T e G over the current configuration.
template <class Scalar>
Mat9T<Scalar> elasticity_tensor(const Mat9T<Scalar>& Adev, const Mat3T<Scalar>& F,
                                Scalar J, Scalar p) {
  Mat9T<Scalar> e;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      Mat3T<Scalar> M;
      for (int Jm = 0; Jm < 3; ++Jm) {
        for (int L = 0; L < 3; ++L) {
          M(Jm, L) = Adev(tensor_index(i, Jm), tensor_index(k, L));
        }
      }
      const Mat3T<Scalar> pushed = F * M * F.transpose() / J;
      for (int j = 0; j < 3; ++j) {
        for (int l = 0; l < 3; ++l) {
          Scalar value = pushed(j, l);
          if (i == j && k == l) value += p;
          if (i == l && j == k) value -= p;
          e(tensor_index(i, j), tensor_index(k, l)) = value;
        }
      }
    }
  }
  return e;
}

inline double shear_modulus(double E, double nu) { return E / (2.0 * (1.0 + nu)); }

inline double bulk_modulus(double E, double nu) {
  if (nu >= 0.5) return std::numeric_limits<double>::infinity();
  return E / (3.0 * (1.0 - 2.0 * nu));
}

struct MaterialModel {
  DeviatoricModel dev;
  VolumetricModel vol;
  double nu;  // drives the incompressible-limit dispatch
};

}  // namespace hyperfem
