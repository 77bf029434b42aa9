#pragma once

// Semi-Riemannian structure on R^3 over a diagonal +-1 base metric g0: raised
// gradients, Christoffel symbols of conformal metrics e^{2 rho} g0, curvature and
// the coefficient matrix of the Jacobi equation.
//
// Curvature follows the convention R(X,Y)Z = -D_X D_Y Z + D_Y D_X Z + D_[X,Y] Z,
// i.e. the negative of the usual one, so the Jacobi equation reads
// xi'' + R(gamma', xi) gamma' = 0.

#include <array>

#include <Eigen/Core>

#include "conjlab/fields.hpp"
#include "conjlab/trajectory.hpp"

namespace conjlab {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

/// Diagonal (eps_x, eps_y, eps_z) of the flat base metric, each exactly +1 or -1.
class Signature {
 public:
  Signature(int ex, int ey, int ez);

  int operator[](int i) const { return eps_[static_cast<std::size_t>(i)]; }
  int operator[](Axis a) const { return (*this)[index(a)]; }
  const std::array<int, 3>& eps() const { return eps_; }
  Vector3 diagonal() const { return {double(eps_[0]), double(eps_[1]), double(eps_[2])}; }

  /// g0(u, v)
  double inner(const Vector3& u, const Vector3& v) const;

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::array<int, 3> eps_;
};

/// Index-raised gradient with respect to g0: component i is eps_i * d_i f.
std::array<ScalarField, 3> metric_gradient(const Signature& sig, const ScalarField& f);

/// Flat metric plus time-independent potential V. The equation of motion is q'' = -grad V(q).
class MechanicalSystem {
 public:
  MechanicalSystem(Signature signature, ScalarField potential);

  const Signature& signature() const { return signature_; }
  const ScalarField& potential() const { return potential_; }
  /// Raised gradient components as fields.
  const std::array<ScalarField, 3>& gradient() const { return gradient_; }

  double potential_at(const Point& q) const;
  /// grad V(q), raised.
  Vector3 gradient_at(const Point& q) const;
  /// A_ij = eps_i d_i d_j V(q), the matrix of the linearized equation xi'' + A xi = 0.
  Matrix3 hessian_at(const Point& q) const;
  /// Gradient and raised Hessian in one evaluation.
  void gradient_and_hessian(const Point& q, Vector3& grad, Matrix3& hess) const;

 private:
  Signature signature_;
  ScalarField potential_;
  std::array<ScalarField, 3> gradient_;
  FieldBundle potential_eval_;
  FieldBundle gradient_eval_;
  FieldBundle hessian_eval_;  // gradient (3) followed by raised Hessian (9, row-major)
};

/// Conformally flat metric g = e^{2 rho} g0.
class ConformalMetric {
 public:
  ConformalMetric(Signature signature, ScalarField rho);

  const Signature& signature() const { return signature_; }
  const ScalarField& rho() const { return rho_; }
  /// e^{2 rho} as a field.
  const ScalarField& conformal_factor() const { return factor_; }

  double factor_at(const Point& q) const;
  /// Ordinary partials d_i rho.
  Vector3 rho_gradient(const Point& q) const;
  /// Ordinary second partials d_i d_j rho.
  Matrix3 rho_hessian(const Point& q) const;
  /// g(u, v) at q.
  double inner(const Point& q, const Vector3& u, const Vector3& v) const;

 private:
  Signature signature_;
  ScalarField rho_;
  ScalarField factor_;
  FieldBundle derivative_eval_;  // d rho (3) followed by d^2 rho (9, row-major)
  FieldBundle factor_eval_;
};

/// Gamma[i](j, k) = Gamma^i_{jk}.
using Christoffel = std::array<Matrix3, 3>;

/// Gamma^i_{jk} = delta^i_j d_k rho + delta^i_k d_j rho - (g0)_{jk} eps_i d_i rho.
Christoffel christoffel(const ConformalMetric& metric, const Point& q);

/// dGamma[l][i](j, k) = d_l Gamma^i_{jk}, exact.
std::array<Christoffel, 3> christoffel_derivative(const ConformalMetric& metric, const Point& q);

/// Gamma(q)(u, w): component i is Gamma^i_{jk} u^j w^k.
Vector3 contract(const Christoffel& gamma, const Vector3& u, const Vector3& w);

/// R(X, Y) Z in the sign convention documented at the top of this header.
Vector3 curvature(const ConformalMetric& metric, const Point& q, const Vector3& X, const Vector3& Y,
                  const Vector3& Z);

/// Coefficient matrix A(t) of xi'' + A xi = 0 along a p-geodesic of a flat mechanical system.
Matrix3 jacobi_coefficients(const MechanicalSystem& system, const Trajectory& base, double t);

/// A(t) xi = R(gamma', xi) gamma' along a geodesic on which all Christoffel symbols vanish
/// (to 1e-12). Throws GeometryError("axis condition violated") otherwise.
Matrix3 jacobi_coefficients(const ConformalMetric& metric, const Trajectory& base, double t);

}  // namespace conjlab
