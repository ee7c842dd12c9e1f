#include "hyperfem/kinematics.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <random>

using namespace hyperfem;

namespace {

Mat3 random_small_gradient(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Mat3 g;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g(i, j) = d(rng);
  }
  return g;
}

}  // namespace

TEST_CASE("deformation measures for a pure stretch") {
  Mat3 grad = Mat3::Zero();
  grad(0, 0) = 1.0;  // lambda_x = 2
  const auto state = deformation_gradient<double>(grad);
  CHECK(state.J == doctest::Approx(2.0));
  CHECK(state.F(0, 0) == doctest::Approx(2.0));
  CHECK(state.Fbar.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  const double s = std::pow(2.0, -1.0 / 3.0);
  CHECK(state.I1bar ==
        doctest::Approx(s * s * (4.0 + 1.0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("volume ratio matches the cofactor expansion") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Mat3 grad = random_small_gradient(rng, 0.2);
    const auto state = deformation_gradient<double>(grad);
    const Mat3& F = state.F;
    const double cofactor =
        F(0, 0) * (F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1)) -
        F(0, 1) * (F(1, 0) * F(2, 2) - F(1, 2) * F(2, 0)) +
        F(0, 2) * (F(1, 0) * F(2, 1) - F(1, 1) * F(2, 0));
    CHECK(state.J == doctest::Approx(cofactor).epsilon(1e-13));
    CHECK(state.Fbar.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(state.Cbar.isApprox(state.Cbar.transpose(), 1e-13));
    Eigen::SelfAdjointEigenSolver<Mat3> eig(state.Cbar);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("inverted configurations are rejected") {
  Mat3 grad = Mat3::Zero();
  grad(0, 0) = -1.5;  // F_00 = -0.5
  try {
    deformation_gradient<double>(grad);
    FAIL("expected InvertedElementError");
  } catch (const InvertedElementError& err) {
    CHECK(err.jacobian == doctest::Approx(-0.5));
  }
}

TEST_CASE("gradient operator reproduces the interpolated gradient") {
  // One 4-node patch with invented current-configuration gradients.
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const int n = 4;
  Eigen::Matrix<double, Eigen::Dynamic, 3> grads(n, 3);
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < 3; ++j) grads(a, j) = d(rng);
  }
  VecX u(3 * n);
  for (int i = 0; i < u.size(); ++i) u[i] = d(rng);

  const OperatorMatrices op = operator_matrices(grads);
  CHECK(op.G.rows() == 9);
  CHECK(op.G.cols() == 3 * n);

  // Direct gradient of the interpolated field: sum_a u_a (x) grad N_a.
  Mat3 direct = Mat3::Zero();
  for (int a = 0; a < n; ++a) {
    direct += u.segment<3>(3 * a) * grads.row(a);
  }
  const Mat3 via_g = unflatten(op.G * u);
  CHECK((via_g - direct).norm() < 1e-13);
  CHECK((op.D * u)(0, 0) == doctest::Approx(direct.trace()).epsilon(1e-13));
}

TEST_CASE("flatten layout pairs component with derivative direction") {
  Eigen::Matrix<double, Eigen::Dynamic, 3> grads(1, 3);
  grads << 2.0, 3.0, 5.0;
  const OperatorMatrices op = operator_matrices(grads);
  // Function 0, component 1 (u_y): grad contributes to entries (1, j).
  CHECK(op.G(tensor_index(1, 0), 1) == 2.0);
  CHECK(op.G(tensor_index(1, 1), 1) == 3.0);
  CHECK(op.G(tensor_index(1, 2), 1) == 5.0);
  CHECK(op.G(tensor_index(0, 0), 1) == 0.0);
  CHECK(op.D(0, 1) == 3.0);

  Mat3 t;
  t << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Vec9 flat = flatten(t);
  CHECK(flat[tensor_index(0, 1)] == 2.0);
  CHECK(flat[tensor_index(2, 0)] == 7.0);
  CHECK(unflatten(flat).isApprox(t));
}
