#pragma once

#include <functional>
#include <vector>

#include "conjlab/geometry.hpp"
#include "conjlab/trajectory.hpp"

namespace conjlab {

/// Integrates q'' = -grad V(q) from (q0, v0) over `interval`.
Trajectory integrate_pgeodesic(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                               Interval interval, Tolerance tol = {});

/// Integrates the geodesic equation q''^i + Gamma^i_{jk} q'^j q'^k = 0.
Trajectory integrate_geodesic(const ConformalMetric& metric, const Point& q0, const Vector3& v0, Interval interval,
                              Tolerance tol = {});

/// Right-hand sides in first-order form, state = (q, v).
void pgeodesic_rhs(const MechanicalSystem& system, const StateVec<6>& y, StateVec<6>& dy);
void geodesic_rhs(const ConformalMetric& metric, const StateVec<6>& y, StateVec<6>& dy);

/// Composite Simpson rule; `panels` is rounded up to an even number.
double simpson(const std::function<double(double)>& f, double a, double b, int panels);

/// Panel count used for trajectory quadratures: at least 2048 per 2*pi, even.
int quadrature_panels(double length);

/// E = 1/2 int e^{2 rho} g0(q', q') dt over the trajectory's interval.
double energy(const ConformalMetric& metric, const Trajectory& traj);

/// 1/2 sum_i eps_i (q'^i)^2 + V(q) at parameter t.
double mechanical_energy(const MechanicalSystem& system, const Trajectory& traj, double t);

/// Analytic curve given by samples of position and acceleration.
struct SampledCurve {
  std::vector<double> t;
  std::vector<Point> q;
  std::vector<Vector3> qdd;
};

SampledCurve sample_curve(const std::function<Point(double)>& q, const std::function<Vector3(double)>& qdd,
                          Interval interval, int n);

/// sup over samples of |q'' + grad V(q)|.
double residual_pgeodesic(const MechanicalSystem& system, const SampledCurve& curve);

/// Inverse of Jacobi's theorem: V = c - e^{2 rho}, so that (c - V) g0 = e^{2 rho} g0.
MechanicalSystem mechanical_from_conformal(const ConformalMetric& metric, double c);

struct ReparametrizedSample {
  double t;  // p-geodesic parameter
  double s;  // geodesic parameter
  Point q;
  Vector3 velocity;  // d sigma / ds
};

struct CorrespondenceReport {
  std::vector<ReparametrizedSample> samples;  // s strictly increasing
  double max_residual = 0.0;                  // sup |sigma'' + Gamma(sigma', sigma')|
  double energy_deviation = 0.0;              // sup |mechanical energy - c|
  double time_at(double t) const;             // s(t) by linear interpolation of the time map
};

/// Reparametrizes a p-geodesic of mechanical_from_conformal(metric, c) with energy c by
/// ds/dt = sqrt(2) (c - V(gamma(t))) and reports the geodesic residual of the result.
/// Throws GeometryError("energy mismatch") when the mechanical energy differs from c by more than tol.
CorrespondenceReport verify_correspondence(const ConformalMetric& metric, double c, const Trajectory& ptraj,
                                           double tol);

}  // namespace conjlab
