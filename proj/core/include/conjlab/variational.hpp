#pragma once

// Linearized flow along a base solution and conjugate-point detection.
//
// M(t) = d q(t) / d v0 and Mdot(t) = d v(t) / d v0 solve the variational
// equations with M(a) = 0, Mdot(a) = I. Column j of M is the Jacobi field
// that starts with velocity e_j; t* is conjugate when M(t*) is singular.

#include <vector>

#include "conjlab/geometry.hpp"
#include "conjlab/trajectory.hpp"

namespace conjlab {

class VariationalFlow {
 public:
  explicit VariationalFlow(std::shared_ptr<const DenseOutput<24>> solution, Tolerance tol);

  const Trajectory& base() const { return base_; }
  Interval interval() const { return base_.interval(); }

  Matrix3 M(double t) const;
  Matrix3 Mdot(double t) const;
  /// M and Mdot in one interpolation.
  void matrices(double t, Matrix3& m, Matrix3& mdot) const;

 private:
  std::shared_ptr<const DenseOutput<24>> solution_;
  Trajectory base_;
};

VariationalFlow variational_flow(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                                 Interval interval, Tolerance tol = {});
VariationalFlow variational_flow(const ConformalMetric& metric, const Point& q0, const Vector3& v0,
                                 Interval interval, Tolerance tol = {});

struct ConjugatePoint {
  double t_star = 0.0;
  int multiplicity = 0;  // dim ker M(t_star), in {1, 2, 3}
  Point position = Point::Zero();
};

struct ConjugateSearch {
  int grid = 2048;
  int refinement = 16;           // sub-samples per coarse cell
  double bisection_tol = 1e-10;
  double rank_tol = 1e-7;         // relative to the largest singular value
  double double_root_floor = 1e-12;  // |det M| / |M|^3 at an even-order root
};

/// det M(t) / |M(t)|_F^3, the quantity scanned for zeros.
double scaled_determinant(const Matrix3& m);

/// All conjugate parameters strictly inside the flow's interval, sorted by t_star.
/// Throws GridTooCoarse when two sign changes of det M share a grid cell after refinement.
std::vector<ConjugatePoint> conjugate_points(const VariationalFlow& flow, const ConjugateSearch& search = {});

std::vector<ConjugatePoint> conjugate_points(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                                             Interval interval, Tolerance tol = {});
std::vector<ConjugatePoint> conjugate_points(const ConformalMetric& metric, const Point& q0, const Vector3& v0,
                                             Interval interval, Tolerance tol = {});

/// Conjugate parameters of the constant-coefficient system xi'' + A xi = 0 (eigenvalues of A
/// must be real); used as an independent check of the curvature-form Jacobi equation.
std::vector<ConjugatePoint> conjugate_points_constant(const Matrix3& A, Interval interval);

}  // namespace conjlab
