#include "hyperfem/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hyperfem {

namespace {

constexpr double kGridLow = 1e-3;
constexpr double kGridHigh = 50.0;
constexpr int kGridPoints = 200;

double objective(const VolumetricModel& vol, double p, double J) {
  return vol_eval(vol, J).psi - p * J;
}

// Newton on Psi'(J) = p, kept inside a sign-change bracket with bisection
// as the safeguard.
double polish_root(const VolumetricModel& vol, double p, double lo, double hi) {
  double f_lo = vol_eval(vol, lo).dpsi - p;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto v = vol_eval(vol, x);
    const double f = v.dpsi - p;
    if (f == 0.0) return x;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = x;
      f_lo = f;
    } else {
      hi = x;
    }
    double next = v.d2psi != 0.0 ? x - f / v.d2psi : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

DeformationState<double> diagonal_state(double axial, double lateral) {
  Mat3 grad_u = Mat3::Zero();
  grad_u(0, 0) = axial - 1.0;
  grad_u(1, 1) = lateral - 1.0;
  grad_u(2, 2) = lateral - 1.0;
  return deformation_gradient(grad_u);
}

Mat3 deviatoric_cauchy(const DeviatoricModel& dev, const DeformationState<double>& st) {
  const auto d = dev_eval(dev, st);
  return (d.Pdev * st.F.transpose()) / st.J;
}

double lateral_stress(const MaterialModel& material, double axial, double lateral) {
  const auto st = diagonal_state(axial, lateral);
  return deviatoric_cauchy(material.dev, st)(1, 1) + vol_eval(material.vol, st.J).dpsi;
}

}  // namespace

TangentCheckResult fd_tangent_check(FormulationKind kind, const MixedElement& element,
                                    const ElementState& state,
                                    const MaterialModel& material,
                                    std::span<const QuadHistory> history, double h) {
  if (!(h >= 1e-8 && h <= 1e-4)) {
    throw DomainError("fd_tangent_check: h must lie in [1e-8, 1e-4]");
  }
  const bool three = kind == FormulationKind::three_field;
  const int nu = 3 * element.n_disp();
  const int np = three ? 1 : element.n_pres();
  const int nt = three ? 1 : 0;
  const int nx = nu + np + nt;

  const auto blocks_at = [&](const ElementState& s) {
    return three ? element_blocks_three_field(element, s, material)
                 : element_blocks_two_field(kind, element, s, material, history);
  };
  const auto residual_at = [&](const ElementState& s) {
    const ElementBlocks b = blocks_at(s);
    VecX r(nx);
    r.head(nu) = b.Ru;
    r.segment(nu, np) = b.Rp;
    if (three) r(nu + np) = b.Rt(0);
    return r;
  };
  const auto entry = [&](ElementState& s, int j) -> double& {
    if (j < nu) return s.u[j];
    if (j < nu + np) return s.p[j - nu];
    return s.theta;
  };

  const ElementBlocks base = blocks_at(state);

  MatX fd(nx, nx);
  for (int j = 0; j < nx; ++j) {
    ElementState plus = state;
    ElementState minus = state;
    const double hj = h * std::max(1.0, std::abs(entry(plus, j)));
    entry(plus, j) += hj;
    entry(minus, j) -= hj;
    fd.col(j) = (residual_at(plus) - residual_at(minus)) / (2.0 * hj);
  }

  MatX an = MatX::Zero(nx, nx);
  an.block(0, 0, nu, nu) = base.Kuu;
  an.block(0, nu, nu, np) = base.Kup;
  an.block(nu, 0, np, nu) = base.Kpu;
  an.block(nu, nu, np, np) = base.Kpp;
  if (three) {
    an.block(0, nu + np, nu, 1) = base.Kut;      // identically zero
    an(nu, nu + np) = base.Ktp(0, 0);            // d Rp / d theta
    an(nu + np, nu) = base.Ktp(0, 0);            // d Rt / d p
    an(nu + np, nu + np) = base.Ktt(0, 0);       // d Rt / d theta
  }

  struct BlockRef {
    int row, col, rows, cols;
    double TangentCheckResult::* slot;
  };
  std::vector<BlockRef> refs = {
      {0, 0, nu, nu, &TangentCheckResult::Kuu},
      {0, nu, nu, np, &TangentCheckResult::Kup},
      {nu, 0, np, nu, &TangentCheckResult::Kpu},
      {nu, nu, np, np, &TangentCheckResult::Kpp},
  };
  if (three) {
    refs.push_back({0, nu + np, nu, nt, &TangentCheckResult::Kut});
    refs.push_back({nu + np, 0, nt, nu, &TangentCheckResult::Ktu});
    refs.push_back({nu + np, nu, nt, np, &TangentCheckResult::Ktp});
    refs.push_back({nu + np, nu + np, nt, nt, &TangentCheckResult::Ktt});
  }

  double scale = 0.0;
  for (const BlockRef& ref : refs) {
    scale = std::max(scale, an.block(ref.row, ref.col, ref.rows, ref.cols).norm());
  }

  TangentCheckResult result;
  if (scale == 0.0) return result;
  for (const BlockRef& ref : refs) {
    const MatX an_b = an.block(ref.row, ref.col, ref.rows, ref.cols);
    const MatX fd_b = fd.block(ref.row, ref.col, ref.rows, ref.cols);
    const double norm_a = an_b.norm();
    const double denom = norm_a >= 1e-8 * scale ? norm_a : scale;
    const double error = (fd_b - an_b).norm() / denom;
    result.*(ref.slot) = error;
    result.worst = std::max(result.worst, error);
  }
  return result;
}

LegendreResult legendre_transform(const VolumetricModel& vol, double p,
                                  bool force_grid) {
  if (!(vol.kappa > 0.0) || !std::isfinite(vol.kappa)) {
    throw DomainError("legendre_transform: kappa must be positive and finite");
  }
  const double k = vol.kappa;

  // Directions in which the objective provably has no minimum.
  if (vol.id == VolId::V8 && p > 0.0) {
    throw UnboundedTransformError(
        "legendre_transform: V8 grows only logarithmically, so Psi - pJ is "
        "unbounded below for every p > 0");
  }
  if (vol.id == VolId::V7 && p >= k) {
    throw UnboundedTransformError(
        "legendre_transform: V7 has Psi' < kappa everywhere, so Psi - pJ is "
        "unbounded below for p >= kappa");
  }

  if (vol.id == VolId::V3 && !force_grid) {
    const double J_star = 1.0 + p / k;
    if (!(J_star > 0.0)) {
      throw UnboundedTransformError(
          "legendre_transform: V3 has no positive minimiser for p <= -kappa");
    }
    LegendreResult out;
    out.p = p;
    out.J_star = J_star;
    out.Gamma = -p * (1.0 + p / (2.0 * k));
    out.method = LegendreResult::Method::closed_form;
    out.stationary_points = {J_star};
    return out;
  }

  std::vector<double> J(kGridPoints), g(kGridPoints), f(kGridPoints);
  const double log_lo = std::log(kGridLow);
  const double log_hi = std::log(kGridHigh);
  for (int i = 0; i < kGridPoints; ++i) {
    J[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
    const auto v = vol_eval(vol, J[i]);
    g[i] = v.psi - p * J[i];
    f[i] = v.dpsi - p;
  }

  LegendreResult out;
  out.p = p;
  out.method = LegendreResult::Method::grid_newton;
  const auto push_unique = [&](double root) {
    if (out.stationary_points.empty() ||
        std::abs(root - out.stationary_points.back()) >
            1e-10 * std::max(1.0, std::abs(root))) {
      out.stationary_points.push_back(root);
    }
  };
  for (int i = 0; i < kGridPoints; ++i) {
    if (f[i] == 0.0) {
      push_unique(J[i]);
    } else if (i + 1 < kGridPoints && f[i + 1] != 0.0 &&
               (f[i] < 0.0) != (f[i + 1] < 0.0)) {
      push_unique(polish_root(vol, p, J[i], J[i + 1]));
    }
  }
  if (out.stationary_points.empty()) {
    throw UnboundedTransformError(
        "legendre_transform: no stationary point of Psi(J) - pJ with J in "
        "[1e-3, 50] for p = " + std::to_string(p));
  }

  double best_g = std::numeric_limits<double>::infinity();
  double best_J = out.stationary_points.front();
  for (double root : out.stationary_points) {
    const double value = objective(vol, p, root);
    if (value < best_g) {
      best_g = value;
      best_J = root;
    }
  }
  if (g.front() < best_g || g.back() < best_g) {
    throw UnboundedTransformError(
        "legendre_transform: the objective is lower at the search boundary than "
        "at any interior stationary point; no minimiser in [1e-3, 50]");
  }
  out.J_star = best_J;
  out.Gamma = best_g;
  return out;
}

UniaxialResult uniaxial_oracle(const MaterialModel& material, double lambda) {
  if (!(lambda > 0.0)) {
    throw DomainError("uniaxial_oracle: lambda must be positive");
  }

  UniaxialResult out;
  out.lambda = lambda;

  if (material.nu >= 0.5) {
    const double lt = 1.0 / std::sqrt(lambda);
    const auto st = diagonal_state(lambda, lt);
    const Mat3 sigma_dev = deviatoric_cauchy(material.dev, st);
    out.lambda_t = lt;
    out.pressure = -sigma_dev(1, 1);
    out.sigma_axial = sigma_dev(0, 0) + out.pressure;
    out.J = st.J;
    return out;
  }

  // Scan lateral stretches for a sign change of the lateral stress, skipping
  // samples beyond the extensibility limit.
  const auto stress = [&](double lt) { return lateral_stress(material, lambda, lt); };
  constexpr int n_scan = 400;
  const double scan_lo = std::log(0.02);
  const double scan_hi = std::log(20.0);
  double a = 0.0, b = 0.0, fa = 0.0, fb = 0.0;
  bool have_prev = false, have_bracket = false;
  double prev_lt = 0.0, prev_f = 0.0;
  for (int i = 0; i < n_scan; ++i) {
    const double lt = std::exp(scan_lo + (scan_hi - scan_lo) * i / (n_scan - 1));
    double value;
    try {
      value = stress(lt);
    } catch (const MaterialLockupError&) {
      have_prev = false;
      continue;
    }
    if (!std::isfinite(value)) {
      have_prev = false;
      continue;
    }
    if (have_prev && (prev_f < 0.0) != (value < 0.0)) {
      a = prev_lt;
      b = lt;
      fa = prev_f;
      fb = value;
      have_bracket = true;
      break;
    }
    if (value == 0.0) {
      a = b = lt;
      fa = fb = 0.0;
      have_bracket = true;
      break;
    }
    prev_lt = lt;
    prev_f = value;
    have_prev = true;
  }
  if (!have_bracket) {
    throw DomainError(
        "uniaxial_oracle: no lateral equilibrium found for lambda = " +
        std::to_string(lambda) + " (outside the material's admissible range)");
  }

  double root = 0.5 * (a + b);
  if (a != b) {
    // Secant steps clamped to the bracket, bisection otherwise.
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
      double next = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
      if (!(next > a) || !(next < b)) next = 0.5 * (a + b);
      const double f_next = stress(next);
      if (f_next == 0.0) {
        a = b = next;
        break;
      }
      if ((f_next < 0.0) == (fa < 0.0)) {
        a = next;
        fa = f_next;
      } else {
        b = next;
        fb = f_next;
      }
    }
    root = 0.5 * (a + b);
  }

  const auto st = diagonal_state(lambda, root);
  const Mat3 sigma_dev = deviatoric_cauchy(material.dev, st);
  out.lambda_t = root;
  out.pressure = vol_eval(material.vol, st.J).dpsi;
  out.sigma_axial = sigma_dev(0, 0) + out.pressure;
  out.J = st.J;
  return out;
}

VolumetricSweep volumetric_sweep(const std::vector<VolId>& ids, double kappa,
                                 double J_min, double J_max, int samples) {
  if (!(J_min > 0.0) || !(J_max > J_min)) {
    throw DomainError("volumetric_sweep: need 0 < J_min < J_max");
  }
  if (samples < 2) throw DomainError("volumetric_sweep: need at least 2 samples");
  if (ids.empty()) throw DomainError("volumetric_sweep: need at least one id");

  VolumetricSweep out;
  out.ids = ids;
  out.J.resize(samples);
  out.p.resize(samples, static_cast<int>(ids.size()));
  for (int i = 0; i < samples; ++i) {
    out.J[i] = J_min + (J_max - J_min) * i / (samples - 1);
    for (size_t j = 0; j < ids.size(); ++j) {
      out.p(i, static_cast<int>(j)) = vol_eval(ids[j], kappa, out.J[i]).dpsi;
    }
  }
  return out;
}

}  // namespace hyperfem
