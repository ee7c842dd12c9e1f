#include "hyperfem/materials.hpp"

#include "hyperfem/kinematics.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace hyperfem;

namespace {

const VolId kAllIds[] = {VolId::V1, VolId::V2, VolId::V3, VolId::V4,
                         VolId::V5, VolId::V6, VolId::V7, VolId::V8};

Mat3 random_gradient(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Mat3 g;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) g(i, j) = d(rng);
  }
  return g;
}

}  // namespace

TEST_CASE("volumetric derivatives match finite differences of the energy") {
  const double kappa = 3.7;
  const double h = 1e-6;
  for (VolId id : kAllIds) {
    for (double J : {0.2, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0}) {
      const auto at = [&](double x) { return vol_eval(id, kappa, x); };
      const double fd_p = (at(J + h).psi - at(J - h).psi) / (2.0 * h);
      const double fd_pp = (at(J + h).dpsi - at(J - h).dpsi) / (2.0 * h);
      const auto v = at(J);
      const double scale_p = std::max(kappa, std::abs(v.dpsi));
      const double scale_pp = std::max(kappa, std::abs(v.d2psi));
      CHECK(std::abs(fd_p - v.dpsi) / scale_p < 1e-6);
      CHECK(std::abs(fd_pp - v.d2psi) / scale_pp < 1e-6);
    }
  }
}

TEST_CASE("volumetric catalog at the stress-free state") {
  const double kappa = 11.25;
  for (VolId id : kAllIds) {
    const auto v = vol_eval(id, kappa, 1.0);
    CHECK(std::abs(v.psi) <= 1e-12 * kappa);
    CHECK(std::abs(v.dpsi) <= 1e-12 * kappa);
    CHECK(std::abs(v.d2psi - kappa) <= 1e-12 * kappa);
  }
}

TEST_CASE("volumetric catalog pinned values") {
  const double kappa = 2.0;
  // Quadratic model at J = 2: psi = kappa/2, p = kappa, psi'' = kappa.
  const auto v3 = vol_eval(VolId::V3, kappa, 2.0);
  CHECK(v3.psi == doctest::Approx(kappa / 2.0));
  CHECK(v3.dpsi == doctest::Approx(kappa));
  CHECK(v3.d2psi == doctest::Approx(kappa));
  // Logarithmic model at J = e: psi = kappa/2, p = kappa/e.
  const double e = std::exp(1.0);
  const auto v8 = vol_eval(VolId::V8, kappa, e);
  CHECK(v8.psi == doctest::Approx(kappa / 2.0));
  CHECK(v8.dpsi == doctest::Approx(kappa / e));
  CHECK(v8.d2psi == doctest::Approx(0.0).epsilon(1e-14));
  // psi'' turns non-positive past J = e.
  CHECK(vol_eval(VolId::V8, kappa, e + 0.1).d2psi < 0.0);
  const auto v6 = vol_eval(VolId::V6, kappa, 2.0);
  CHECK(v6.psi == doctest::Approx(kappa * (2.0 * std::log(2.0) - 1.0)));
  CHECK(v6.dpsi == doctest::Approx(kappa * std::log(2.0)));
  CHECK(v6.d2psi == doctest::Approx(kappa / 2.0));
}

TEST_CASE("volumetric pressures spread apart at large stretch and agree near J = 1") {
  const double kappa = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (VolId id : kAllIds) {
    const double p = vol_eval(id, kappa, 5.0).dpsi;
    CHECK(p < previous);
    previous = p;
  }
  for (VolId id : kAllIds) {
    for (double J : {0.97, 1.0, 1.03}) {
      const double p = vol_eval(id, kappa, J).dpsi;
      CHECK(std::abs(p - kappa * (J - 1.0)) <= 0.01 * kappa);
    }
  }
}

TEST_CASE("non-positive volume ratios are rejected") {
  CHECK_THROWS_AS(vol_eval(VolId::V1, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(vol_eval(VolId::V8, 1.0, -0.5), DomainError);
}

TEST_CASE("deviatoric stress and tangent match finite differences") {
  std::mt19937 rng(23);
  const double h = 1e-6;
  const DeviatoricModel models[] = {
      {DevKind::neo_hookean, 7.0, 0.0},
      {DevKind::gent, 7.0, 30.0},
  };
  for (const DeviatoricModel& model : models) {
    for (int trial = 0; trial < 8; ++trial) {
      const Mat3 grad = random_gradient(rng, 0.3);
      const auto state = deformation_gradient<double>(grad);
      const auto dev = dev_eval(model, state);

      // dPsi/dF against the energy.
      Mat3 fd_P;
      Mat9 fd_A;
      for (int k = 0; k < 3; ++k) {
        for (int L = 0; L < 3; ++L) {
          Mat3 plus = grad, minus = grad;
          plus(k, L) += h;
          minus(k, L) -= h;
          const auto dev_plus = dev_eval(model, deformation_gradient<double>(plus));
          const auto dev_minus = dev_eval(model, deformation_gradient<double>(minus));
          fd_P(k, L) = (dev_plus.psi - dev_minus.psi) / (2.0 * h);
          fd_A.col(tensor_index(k, L)) =
              (flatten(dev_plus.Pdev) - flatten(dev_minus.Pdev)) / (2.0 * h);
        }
      }
      CHECK((fd_P - dev.Pdev).norm() / dev.Pdev.norm() < 1e-7);
      CHECK((fd_A - dev.Adev).norm() / dev.Adev.norm() < 1e-6);

      // The isochoric energy produces a purely deviatoric Kirchhoff stress.
      const Mat3 kirchhoff = dev.Pdev * state.F.transpose();
      CHECK(std::abs(kirchhoff.trace()) < 1e-10 * model.mu);
      CHECK(kirchhoff.isApprox(kirchhoff.transpose(), 1e-10));
    }
  }
}

TEST_CASE("gent approaches neo-hookean as the extensibility limit grows") {
  std::mt19937 rng(29);
  const Mat3 grad = random_gradient(rng, 0.2);
  const auto state = deformation_gradient<double>(grad);
  const auto nh = dev_eval({DevKind::neo_hookean, 3.0, 0.0}, state);
  const auto gent = dev_eval({DevKind::gent, 3.0, 1e8}, state);
  CHECK((nh.Pdev - gent.Pdev).norm() / nh.Pdev.norm() < 1e-6);
  CHECK((nh.Adev - gent.Adev).norm() / nh.Adev.norm() < 1e-6);
}

TEST_CASE("gent locks up at its extensibility limit") {
  Mat3 grad = Mat3::Zero();
  grad(0, 0) = 9.0;  // lambda = 10 uniaxially: I1bar - 3 far beyond Im = 30
  grad(1, 1) = -1.0 + std::pow(10.0, -0.5);
  grad(2, 2) = grad(1, 1);
  const auto state = deformation_gradient<double>(grad);
  CHECK(state.I1bar - 3.0 > 30.0);
  CHECK_THROWS_AS(dev_eval({DevKind::gent, 1.0, 30.0}, state), MaterialLockupError);
}

TEST_CASE("effective stress splits into deviator and pressure") {
  std::mt19937 rng(31);
  const Mat3 grad = random_gradient(rng, 0.25);
  const auto state = deformation_gradient<double>(grad);
  const auto dev = dev_eval({DevKind::neo_hookean, 2.5, 0.0}, state);
  const double p = 0.8;
  const Mat3 sigma = effective_cauchy(dev.Pdev, state.F, state.J, p);
  CHECK(sigma.trace() / 3.0 == doctest::Approx(p).epsilon(1e-12));
  CHECK(sigma.isApprox(sigma.transpose(), 1e-10));
}

TEST_CASE("spatial elasticity tensor at the reference state") {
  const double mu = 4.2;
  const auto state = deformation_gradient<double>(Mat3::Zero());
  const auto dev = dev_eval({DevKind::neo_hookean, mu, 0.0}, state);
  const Mat9 e = elasticity_tensor(dev.Adev, state.F, state.J, 0.0);
  CHECK(e(tensor_index(0, 1), tensor_index(0, 1)) == doctest::Approx(mu));
  CHECK(e(tensor_index(0, 0), tensor_index(0, 0)) ==
        doctest::Approx(4.0 * mu / 3.0));
  CHECK(e(tensor_index(0, 0), tensor_index(1, 1)) ==
        doctest::Approx(-2.0 * mu / 3.0));
  CHECK(e(tensor_index(0, 1), tensor_index(1, 0)) == doctest::Approx(mu));
}

TEST_CASE("elastic moduli conversions") {
  CHECK(shear_modulus(100.0, 0.3) == doctest::Approx(100.0 / 2.6));
  CHECK(bulk_modulus(100.0, 0.3) == doctest::Approx(100.0 / 1.2));
  CHECK(std::isinf(bulk_modulus(100.0, 0.5)));
  CHECK(bulk_modulus(240.565, 0.4999) ==
        doctest::Approx(240.565 / (3.0 * 0.0002)));
}
