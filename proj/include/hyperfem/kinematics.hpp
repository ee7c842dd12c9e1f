#pragma once

#include "hyperfem/types.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace hyperfem {

// Deformation measures built from the reference displacement gradient:
// F = I + grad(u), J = det F, and the isochoric split Fbar = J^{-1/3} F with
// Cbar = Fbar^T Fbar and I1bar = tr(Cbar).
template <class Scalar>
struct DeformationState {
  Mat3T<Scalar> F;
  Scalar J;
  Mat3T<Scalar> Fbar;
  Mat3T<Scalar> Cbar;
  Scalar I1bar;
};

template <class Scalar>
DeformationState<Scalar> deformation_gradient(const Mat3T<Scalar>& grad_u_ref) {
  DeformationState<Scalar> state;
  state.F = Mat3T<Scalar>::Identity() + grad_u_ref;
  state.J = state.F.determinant();
  if (!(state.J > Scalar(0))) {
    throw InvertedElementError(
        "deformation_gradient: non-positive volume ratio J = " +
            std::to_string(double(state.J)),
        double(state.J));
  }
  state.Fbar = std::pow(double(state.J), -1.0 / 3.0) * state.F;
  state.Cbar = state.Fbar.transpose() * state.Fbar;
  state.I1bar = state.Cbar.trace();
  return state;
}

// Discrete gradient and divergence operators in the current configuration.
// Column 3a+c of G holds the 9-vector of grad(basis a, component c); D is the
// row such that D*u = div(u).  Layout follows tensor_index.
struct OperatorMatrices {
  Eigen::Matrix<double, 9, Eigen::Dynamic> G;
  Eigen::Matrix<double, 1, Eigen::Dynamic> D;
};

inline OperatorMatrices operator_matrices(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& grad_current) {
  const int n = static_cast<int>(grad_current.rows());
  OperatorMatrices op;
  op.G = Eigen::Matrix<double, 9, Eigen::Dynamic>::Zero(9, 3 * n);
  op.D = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(1, 3 * n);
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < 3; ++c) {
      for (int j = 0; j < 3; ++j) {
        op.G(tensor_index(c, j), 3 * a + c) = grad_current(a, j);
      }
      op.D(0, 3 * a + c) = grad_current(a, c);
    }
  }
  return op;
}

}  // namespace hyperfem
