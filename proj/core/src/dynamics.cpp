#include "conjlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conjlab/error.hpp"

namespace conjlab {

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::shared_ptr<const BaseOutput> solution, Tolerance tol)
    : solution_(std::move(solution)), tol_(tol) {}

Trajectory::Trajectory(std::shared_ptr<const FlowOutput> solution, Tolerance tol)
    : solution_(std::move(solution)), tol_(tol) {}

double Trajectory::start() const {
  return std::visit([](const auto& s) { return s->start(); }, solution_);
}

double Trajectory::end() const {
  return std::visit([](const auto& s) { return s->end(); }, solution_);
}

std::size_t Trajectory::steps() const {
  return std::visit([](const auto& s) { return s->steps(); }, solution_);
}

StateVec<6> Trajectory::state(double t) const {
  return std::visit([t](const auto& s) -> StateVec<6> { return (*s)(t).template head<6>(); }, solution_);
}

Point Trajectory::position(double t) const { return state(t).head<3>(); }

Eigen::Vector3d Trajectory::velocity(double t) const { return state(t).tail<3>(); }

std::vector<TrajectorySample> Trajectory::samples() const {
  return std::visit(
      [](const auto& s) {
        std::vector<TrajectorySample> out;
        out.reserve(s->times().size());
        for (std::size_t k = 0; k < s->times().size(); ++k) {
          const auto& y = s->nodes()[k];
          out.push_back({s->times()[k], y.template head<3>(), y.template segment<3>(3)});
        }
        return out;
      },
      solution_);
}

// ---------------------------------------------------------------------------
// Equations of motion

void pgeodesic_rhs(const MechanicalSystem& system, const StateVec<6>& y, StateVec<6>& dy) {
  const Vector3 g = system.gradient_at(y.head<3>());
  dy.head<3>() = y.tail<3>();
  dy.tail<3>() = -g;
}

void geodesic_rhs(const ConformalMetric& metric, const StateVec<6>& y, StateVec<6>& dy) {
  // Gamma(v, v)^i = 2 v^i d rho(v) - g0(v, v) eps_i d_i rho
  const Vector3 v = y.tail<3>();
  const Vector3 d = metric.rho_gradient(y.head<3>());
  const double drho_v = d.dot(v);
  const double vv = metric.signature().inner(v, v);
  const Vector3 raised = metric.signature().diagonal().cwiseProduct(d);
  dy.head<3>() = v;
  dy.tail<3>() = -(2.0 * drho_v * v - vv * raised);
}

namespace {

StateVec<6> initial_state(const Point& q0, const Vector3& v0) {
  StateVec<6> y;
  y << q0, v0;
  return y;
}

OdeOptions options_for(Tolerance tol) {
  if (!(tol.rtol > 0.0) || !(tol.atol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  OdeOptions opt;
  opt.tol = tol;
  return opt;
}

}  // namespace

Trajectory integrate_pgeodesic(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                               Interval interval, Tolerance tol) {
  auto rhs = [&system](double, const StateVec<6>& y, StateVec<6>& dy) { pgeodesic_rhs(system, y, dy); };
  auto sol = std::make_shared<DenseOutput<6>>(
      integrate_dense<6>(rhs, interval.a, initial_state(q0, v0), interval.b, options_for(tol)));
  return Trajectory(std::shared_ptr<const DenseOutput<6>>(std::move(sol)), tol);
}

Trajectory integrate_geodesic(const ConformalMetric& metric, const Point& q0, const Vector3& v0, Interval interval,
                              Tolerance tol) {
  auto rhs = [&metric](double, const StateVec<6>& y, StateVec<6>& dy) { geodesic_rhs(metric, y, dy); };
  auto sol = std::make_shared<DenseOutput<6>>(
      integrate_dense<6>(rhs, interval.a, initial_state(q0, v0), interval.b, options_for(tol)));
  return Trajectory(std::shared_ptr<const DenseOutput<6>>(std::move(sol)), tol);
}

// ---------------------------------------------------------------------------
// Quadrature and energies

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (b == a) return 0.0;
  int n = std::max(2, panels);
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double odd = 0.0;
  double even = 0.0;
  for (int k = 1; k < n; ++k) (k % 2 ? odd : even) += f(a + k * h);
  return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

int quadrature_panels(double length) {
  const int n = static_cast<int>(std::ceil(2048.0 * std::abs(length) / (2.0 * std::numbers::pi)));
  const int m = std::max(2048, n);
  return m % 2 ? m + 1 : m;
}

double energy(const ConformalMetric& metric, const Trajectory& traj) {
  auto density = [&](double t) {
    const StateVec<6> y = traj.state(t);
    return metric.inner(y.head<3>(), y.tail<3>(), y.tail<3>());
  };
  const Interval I = traj.interval();
  return 0.5 * simpson(density, I.a, I.b, quadrature_panels(I.length()));
}

double mechanical_energy(const MechanicalSystem& system, const Trajectory& traj, double t) {
  const StateVec<6> y = traj.state(t);
  const Vector3 v = y.tail<3>();
  return 0.5 * system.signature().inner(v, v) + system.potential_at(y.head<3>());
}

// ---------------------------------------------------------------------------
// Residuals of analytic curves

SampledCurve sample_curve(const std::function<Point(double)>& q, const std::function<Vector3(double)>& qdd,
                          Interval interval, int n) {
  if (n < 2) throw std::invalid_argument("sample_curve needs at least two samples");
  SampledCurve c;
  for (int k = 0; k < n; ++k) {
    const double t = interval.a + interval.length() * k / (n - 1);
    c.t.push_back(t);
    c.q.push_back(q(t));
    c.qdd.push_back(qdd(t));
  }
  return c;
}

double residual_pgeodesic(const MechanicalSystem& system, const SampledCurve& curve) {
  double worst = 0.0;
  for (std::size_t k = 0; k < curve.t.size(); ++k) {
    worst = std::max(worst, (curve.qdd[k] + system.gradient_at(curve.q[k])).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Jacobi's theorem

MechanicalSystem mechanical_from_conformal(const ConformalMetric& metric, double c) {
  return MechanicalSystem(metric.signature(), ScalarField(c) - metric.conformal_factor());
}

double CorrespondenceReport::time_at(double t) const {
  if (samples.empty()) return 0.0;
  if (t <= samples.front().t) return samples.front().s;
  if (t >= samples.back().t) return samples.back().s;
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const ReparametrizedSample& s, double v) { return s.t < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return lo.s + w * (hi.s - lo.s);
}

CorrespondenceReport verify_correspondence(const ConformalMetric& metric, double c, const Trajectory& ptraj,
                                           double tol) {
  const MechanicalSystem system = mechanical_from_conformal(metric, c);
  const Signature& sig = system.signature();
  const Interval I = ptraj.interval();
  const int n = quadrature_panels(I.length());
  const double h = I.length() / n;
  const double root2 = std::numbers::sqrt2;

  CorrespondenceReport report;
  for (int k = 0; k <= n; ++k) {
    report.energy_deviation =
        std::max(report.energy_deviation, std::abs(mechanical_energy(system, ptraj, I.a + k * h) - c));
  }
  if (report.energy_deviation > tol) {
    throw GeometryError("energy mismatch: mechanical energy deviates from c by " +
                        std::to_string(report.energy_deviation));
  }

  auto speed = [&](double t) { return root2 * (c - system.potential_at(ptraj.position(t))); };

  report.samples.reserve(static_cast<std::size_t>(n) + 1);
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = I.a + k * h;
    if (k > 0) {
      const double t0 = t - h;
      s += h / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * h) + speed(t));
    }
    const StateVec<6> y = ptraj.state(t);
    const Point q = y.head<3>();
    const Vector3 v = y.tail<3>();

    Vector3 grad;  // raised
    Matrix3 unused;
    system.gradient_and_hessian(q, grad, unused);
    const Vector3 lowered = sig.diagonal().cwiseProduct(grad);
    const double phi = root2 * (c - system.potential_at(q));
    const double dphi = -root2 * lowered.dot(v);
    const Vector3 accel = -grad;

    const Vector3 sigma1 = v / phi;
    const Vector3 sigma2 = (accel / phi - v * dphi / (phi * phi)) / phi;
    const Vector3 residual = sigma2 + contract(christoffel(metric, q), sigma1, sigma1);
    report.max_residual = std::max(report.max_residual, residual.norm());
    report.samples.push_back({t, s, q, sigma1});
  }
  return report;
}

}  // namespace conjlab
