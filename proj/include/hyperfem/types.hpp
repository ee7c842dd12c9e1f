#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace hyperfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

template <class Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
template <class Scalar>
using Mat9T = Eigen::Matrix<Scalar, 9, 9>;

// Flattening convention for second-order tensors and displacement gradients:
// a 3x3 tensor T is stored column-major as a 9-vector, entry T(i,j) at slot
// i + 3*j.  Spatial gradients pair the vector component i with the derivative
// direction j, so the 9-vector of grad(u) reads
//   [u_x,x  u_y,x  u_z,x  u_x,y  u_y,y  u_z,y  u_x,z  u_y,z  u_z,z]^T.
// Eigen's default storage is column-major, hence Mat3::reshaped() produces
// exactly this layout.
constexpr int tensor_index(int i, int j) { return i + 3 * j; }

inline Vec9 flatten(const Mat3& t) { return t.reshaped(); }
inline Mat3 unflatten(const Vec9& v) { return v.reshaped(3, 3); }

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A value left the mathematical domain of an operation (J <= 0, a reference
// coordinate outside the cell, a transform evaluated where it does not exist).
struct DomainError : Error {
  using Error::Error;
};

// A supported entity was asked for beyond its implemented range (quadrature
// degree, basis family, element pair).
struct CapabilityError : Error {
  using Error::Error;
};

// Deformation state with non-positive volume ratio.
struct InvertedElementError : Error {
  explicit InvertedElementError(const std::string& what, double jacobian_value)
      : Error(what), jacobian(jacobian_value) {}
  double jacobian;
};

// Strain-energy evaluation outside the admissible invariant range
// (limited-extensibility lockup).
struct MaterialLockupError : Error {
  using Error::Error;
};

// Linearisation history could not be rebuilt (non-convex energy at the
// converged state of the previous step).
struct HistoryError : Error {
  using Error::Error;
};

// Static condensation requested where the eliminated block is singular.
struct CondensationError : Error {
  using Error::Error;
};

// Linear solve failed (structural singularity, factorisation breakdown, or a
// solution whose residual is unacceptably large).
struct SolverError : Error {
  using Error::Error;
};

// A load step exhausted its iteration budget without meeting the tolerance.
struct StepFailureError : Error {
  explicit StepFailureError(const std::string& what, int step_index)
      : Error(what), step(step_index) {}
  int step;
};

// Malformed input file; the message carries the file name and line number.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that asks for an unsupported or inconsistent run.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace hyperfem
