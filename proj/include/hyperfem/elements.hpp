#pragma once

#include "hyperfem/types.hpp"

#include <vector>

namespace hyperfem {

enum class CellShape { hexahedron, tetrahedron };
enum class FieldRole { displacement, pressure, jacobian };
enum class BasisOrder { constant, linear, quadratic };
enum class BasisKind { lagrange, bernstein };

// A scalar basis on one reference cell.  The reference hexahedron is
// [-1,1]^3 with trilinear nodes in the usual VTK corner order; the reference
// tetrahedron is {xi,eta,zeta >= 0, xi+eta+zeta <= 1} with vertices at the
// origin and the three unit points, quadratic edge nodes in VTK order
// (01, 12, 02, 03, 13, 23).  Linear Bernstein and Lagrange functions
// coincide; quadratic Bernstein functions are the degree-2 multinomials in
// the barycentric coordinates (control values at the same node locations).
struct BasisFamily {
  CellShape cell_shape;
  FieldRole field_role;
  BasisOrder order;
  BasisKind basis_kind = BasisKind::lagrange;

  int count() const;
};

struct ShapeEval {
  VecX values;
  Eigen::Matrix<double, Eigen::Dynamic, 3> gradients;  // row a = grad of function a
};

// Values and reference-coordinate gradients of every function of the family
// at the point xi.  Throws DomainError when xi lies outside the reference
// cell and CapabilityError for unsupported shape/order combinations.
ShapeEval shape_eval(const BasisFamily& family, const Vec3& xi);

struct QuadratureRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

// A rule exact for complete polynomials of the requested total degree.
// Hexahedra use tensor Gauss rules (degree <= 5); tetrahedra use symmetric
// rules exact to degree 4 (realised by centroid, 4-point, and 14-point
// rules).  Unsupported degrees throw CapabilityError.
QuadratureRule quadrature_rule(CellShape shape, int polynomial_degree);

double reference_volume(CellShape shape);
bool inside_reference_cell(CellShape shape, const Vec3& xi, double tol = 1e-12);

// Boundary facets carry their own 2d bases for surface-load integration.
enum class FacetKind { quad4, tri3, tri6 };

struct FacetShapeEval {
  VecX values;
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradients;
};

FacetShapeEval facet_shape_eval(FacetKind kind, const Eigen::Vector2d& s,
                                BasisKind basis_kind = BasisKind::lagrange);

struct FacetRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
};

// Quadrilateral facets: tensor Gauss on [-1,1]^2, exact to degree 3.
// Triangular facets: symmetric 6-point rule on the unit triangle, exact to
// degree 4.
FacetRule facet_rule(FacetKind kind);

}  // namespace hyperfem
