#include "hyperfem/elements.hpp"

#include <array>
#include <cmath>

namespace hyperfem {

namespace {

// Corner sign pattern of the reference hexahedron, VTK order.
constexpr std::array<std::array<double, 3>, 8> kHexCorners = {{
    {-1, -1, -1},
    {+1, -1, -1},
    {+1, +1, -1},
    {-1, +1, -1},
    {-1, -1, +1},
    {+1, -1, +1},
    {+1, +1, +1},
    {-1, +1, +1},
}};

// Tetrahedron edges in VTK order; edge e connects vertices kTetEdges[e].
constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{
    {0, 1},
    {1, 2},
    {0, 2},
    {0, 3},
    {1, 3},
    {2, 3},
}};

std::string family_label(const BasisFamily& family) {
  std::string s;
  s += (family.cell_shape == CellShape::hexahedron) ? "hexahedron" : "tetrahedron";
  s += '/';
  switch (family.order) {
    case BasisOrder::constant: s += "constant"; break;
    case BasisOrder::linear: s += "linear"; break;
    case BasisOrder::quadratic: s += "quadratic"; break;
  }
  s += (family.basis_kind == BasisKind::lagrange) ? "/lagrange" : "/bernstein";
  return s;
}

ShapeEval hex_trilinear(const Vec3& xi) {
  ShapeEval out;
  out.values.resize(8);
  out.gradients.resize(8, 3);
  for (int a = 0; a < 8; ++a) {
    const auto& c = kHexCorners[a];
    const double fx = 1.0 + c[0] * xi[0];
    const double fy = 1.0 + c[1] * xi[1];
    const double fz = 1.0 + c[2] * xi[2];
    out.values[a] = 0.125 * fx * fy * fz;
    out.gradients(a, 0) = 0.125 * c[0] * fy * fz;
    out.gradients(a, 1) = 0.125 * fx * c[1] * fz;
    out.gradients(a, 2) = 0.125 * fx * fy * c[2];
  }
  return out;
}

// Barycentric coordinates of the reference tetrahedron and their constant
// gradients with respect to (xi, eta, zeta).
void tet_barycentric(const Vec3& xi, Eigen::Vector4d& lambda,
                     Eigen::Matrix<double, 4, 3>& grad) {
  lambda << 1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2];
  grad << -1, -1, -1,
           1,  0,  0,
           0,  1,  0,
           0,  0,  1;
}

ShapeEval tet_linear(const Vec3& xi) {
  Eigen::Vector4d lambda;
  Eigen::Matrix<double, 4, 3> grad;
  tet_barycentric(xi, lambda, grad);
  ShapeEval out;
  out.values = lambda;
  out.gradients = grad;
  return out;
}

ShapeEval tet_quadratic(const Vec3& xi, BasisKind kind) {
  Eigen::Vector4d lambda;
  Eigen::Matrix<double, 4, 3> grad;
  tet_barycentric(xi, lambda, grad);
  ShapeEval out;
  out.values.resize(10);
  out.gradients.resize(10, 3);
  for (int a = 0; a < 4; ++a) {
    if (kind == BasisKind::lagrange) {
      out.values[a] = lambda[a] * (2.0 * lambda[a] - 1.0);
      out.gradients.row(a) = (4.0 * lambda[a] - 1.0) * grad.row(a);
    } else {
      out.values[a] = lambda[a] * lambda[a];
      out.gradients.row(a) = 2.0 * lambda[a] * grad.row(a);
    }
  }
  const double edge_scale = (kind == BasisKind::lagrange) ? 4.0 : 2.0;
  for (int e = 0; e < 6; ++e) {
    const int a = kTetEdges[e][0];
    const int b = kTetEdges[e][1];
    out.values[4 + e] = edge_scale * lambda[a] * lambda[b];
    out.gradients.row(4 + e) =
        edge_scale * (lambda[b] * grad.row(a) + lambda[a] * grad.row(b));
  }
  return out;
}

ShapeEval constant_basis() {
  ShapeEval out;
  out.values = VecX::Ones(1);
  out.gradients = Eigen::Matrix<double, 1, 3>::Zero();
  return out;
}

// 1d Gauss-Legendre nodes/weights on [-1,1].
void gauss_1d(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      return;
    case 2: {
      const double g = 1.0 / std::sqrt(3.0);
      x = {-g, g};
      w = {1.0, 1.0};
      return;
    }
    case 3: {
      const double g = std::sqrt(0.6);
      x = {-g, 0.0, g};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      return;
    }
    default:
      throw CapabilityError("gauss_1d: unsupported point count " + std::to_string(n));
  }
}

void append_tet_point(QuadratureRule& rule, const Eigen::Vector4d& lambda,
                      double barycentric_weight) {
  rule.points.push_back(Vec3(lambda[1], lambda[2], lambda[3]));
  rule.weights.push_back(barycentric_weight / 6.0);
}

QuadratureRule tet_rule(int degree) {
  QuadratureRule rule;
  if (degree <= 1) {
    append_tet_point(rule, Eigen::Vector4d::Constant(0.25), 1.0);
    return rule;
  }
  if (degree == 2) {
    const double a = 0.585410196624969;
    const double b = 0.138196601125011;
    for (int major = 0; major < 4; ++major) {
      Eigen::Vector4d lambda = Eigen::Vector4d::Constant(b);
      lambda[major] = a;
      append_tet_point(rule, lambda, 0.25);
    }
    return rule;
  }
  // 14-point symmetric rule, exact to degree 5 (two vertex-type orbits and
  // one edge-type orbit).
  const double a1 = 0.0673422422100983, b1 = 0.3108859192633005,
               w1 = 0.1126879257180162;
  const double a2 = 0.7217942490673264, b2 = 0.0927352503108912,
               w2 = 0.0734930431163619;
  const double e3 = 0.0455037041256497, f3 = 0.4544962958743503,
               w3 = 0.0425460207770815;
  for (int major = 0; major < 4; ++major) {
    Eigen::Vector4d lambda = Eigen::Vector4d::Constant(b1);
    lambda[major] = a1;
    append_tet_point(rule, lambda, w1);
  }
  for (int major = 0; major < 4; ++major) {
    Eigen::Vector4d lambda = Eigen::Vector4d::Constant(b2);
    lambda[major] = a2;
    append_tet_point(rule, lambda, w2);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      Eigen::Vector4d lambda = Eigen::Vector4d::Constant(f3);
      lambda[i] = e3;
      lambda[j] = e3;
      append_tet_point(rule, lambda, w3);
    }
  }
  return rule;
}

FacetShapeEval quad4_shape(const Eigen::Vector2d& s) {
  constexpr std::array<std::array<double, 2>, 4> corners = {{
      {-1, -1},
      {+1, -1},
      {+1, +1},
      {-1, +1},
  }};
  FacetShapeEval out;
  out.values.resize(4);
  out.gradients.resize(4, 2);
  for (int a = 0; a < 4; ++a) {
    const double fx = 1.0 + corners[a][0] * s[0];
    const double fy = 1.0 + corners[a][1] * s[1];
    out.values[a] = 0.25 * fx * fy;
    out.gradients(a, 0) = 0.25 * corners[a][0] * fy;
    out.gradients(a, 1) = 0.25 * fx * corners[a][1];
  }
  return out;
}

FacetShapeEval tri_shape(const Eigen::Vector2d& s, bool quadratic, BasisKind basis_kind) {
  Eigen::Vector3d lambda(1.0 - s[0] - s[1], s[0], s[1]);
  Eigen::Matrix<double, 3, 2> grad;
  grad << -1, -1,
           1,  0,
           0,  1;
  FacetShapeEval out;
  if (!quadratic) {
    out.values = lambda;
    out.gradients = grad;
    return out;
  }
  constexpr std::array<std::array<int, 2>, 3> edges = {{{0, 1}, {1, 2}, {0, 2}}};
  out.values.resize(6);
  out.gradients.resize(6, 2);
  if (basis_kind == BasisKind::lagrange) {
    for (int a = 0; a < 3; ++a) {
      out.values[a] = lambda[a] * (2.0 * lambda[a] - 1.0);
      out.gradients.row(a) = (4.0 * lambda[a] - 1.0) * grad.row(a);
    }
    for (int e = 0; e < 3; ++e) {
      const int a = edges[e][0];
      const int b = edges[e][1];
      out.values[3 + e] = 4.0 * lambda[a] * lambda[b];
      out.gradients.row(3 + e) = 4.0 * (lambda[b] * grad.row(a) + lambda[a] * grad.row(b));
    }
  } else {
    for (int a = 0; a < 3; ++a) {
      out.values[a] = lambda[a] * lambda[a];
      out.gradients.row(a) = 2.0 * lambda[a] * grad.row(a);
    }
    for (int e = 0; e < 3; ++e) {
      const int a = edges[e][0];
      const int b = edges[e][1];
      out.values[3 + e] = 2.0 * lambda[a] * lambda[b];
      out.gradients.row(3 + e) = 2.0 * (lambda[b] * grad.row(a) + lambda[a] * grad.row(b));
    }
  }
  return out;
}

}  // namespace

int BasisFamily::count() const {
  if (order == BasisOrder::constant) return 1;
  if (cell_shape == CellShape::hexahedron) {
    if (order == BasisOrder::linear) return 8;
    throw CapabilityError("basis not implemented: " + family_label(*this));
  }
  return (order == BasisOrder::linear) ? 4 : 10;
}

ShapeEval shape_eval(const BasisFamily& family, const Vec3& xi) {
  if (!inside_reference_cell(family.cell_shape, xi)) {
    throw DomainError("shape_eval: point outside the reference cell");
  }
  if (family.order == BasisOrder::constant) return constant_basis();
  if (family.cell_shape == CellShape::hexahedron) {
    if (family.order != BasisOrder::linear) {
      throw CapabilityError("basis not implemented: " + family_label(family));
    }
    // Linear Bernstein and Lagrange functions coincide.
    return hex_trilinear(xi);
  }
  if (family.order == BasisOrder::linear) return tet_linear(xi);
  return tet_quadratic(xi, family.basis_kind);
}

QuadratureRule quadrature_rule(CellShape shape, int polynomial_degree) {
  if (polynomial_degree < 0) {
    throw CapabilityError("quadrature_rule: negative degree");
  }
  if (shape == CellShape::hexahedron) {
    if (polynomial_degree > 5) {
      throw CapabilityError("quadrature_rule: hexahedron degree " +
                            std::to_string(polynomial_degree) + " unsupported (max 5)");
    }
    const int n = polynomial_degree / 2 + 1;
    std::vector<double> x, w;
    gauss_1d(n, x, w);
    QuadratureRule rule;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          rule.points.push_back(Vec3(x[i], x[j], x[k]));
          rule.weights.push_back(w[i] * w[j] * w[k]);
        }
      }
    }
    return rule;
  }
  if (polynomial_degree > 4) {
    throw CapabilityError("quadrature_rule: tetrahedron degree " +
                          std::to_string(polynomial_degree) + " unsupported (max 4)");
  }
  return tet_rule(polynomial_degree);
}

double reference_volume(CellShape shape) {
  return shape == CellShape::hexahedron ? 8.0 : 1.0 / 6.0;
}

bool inside_reference_cell(CellShape shape, const Vec3& xi, double tol) {
  if (shape == CellShape::hexahedron) {
    return xi.cwiseAbs().maxCoeff() <= 1.0 + tol;
  }
  return xi.minCoeff() >= -tol && xi.sum() <= 1.0 + tol;
}

FacetShapeEval facet_shape_eval(FacetKind kind, const Eigen::Vector2d& s,
                                BasisKind basis_kind) {
  switch (kind) {
    case FacetKind::quad4: return quad4_shape(s);
    case FacetKind::tri3: return tri_shape(s, false, basis_kind);
    case FacetKind::tri6: return tri_shape(s, true, basis_kind);
  }
  throw CapabilityError("facet_shape_eval: unknown facet kind");
}

FacetRule facet_rule(FacetKind kind) {
  FacetRule rule;
  if (kind == FacetKind::quad4) {
    std::vector<double> x, w;
    gauss_1d(2, x, w);
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        rule.points.push_back(Eigen::Vector2d(x[i], x[j]));
        rule.weights.push_back(w[i] * w[j]);
      }
    }
    return rule;
  }
  // Symmetric 6-point triangle rule, exact to degree 4.
  const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  for (double a : {a1, a2}) {
    const double w = (a == a1) ? w1 : w2;
    const double c = 1.0 - 2.0 * a;
    rule.points.push_back(Eigen::Vector2d(a, a));
    rule.points.push_back(Eigen::Vector2d(c, a));
    rule.points.push_back(Eigen::Vector2d(a, c));
    for (int k = 0; k < 3; ++k) rule.weights.push_back(w / 2.0);
  }
  return rule;
}

}  // namespace hyperfem
