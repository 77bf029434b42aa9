#include "conjlab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "conjlab/dynamics.hpp"
#include "conjlab/error.hpp"

namespace conjlab {

namespace {

using Flow = StateVec<24>;

StateVec<24> initial_flow_state(const Point& q0, const Vector3& v0) {
  Flow y = Flow::Zero();
  y.head<3>() = q0;
  y.segment<3>(3) = v0;
  Eigen::Map<Matrix3> md(y.data() + 15);
  md.setIdentity();
  return y;
}

OdeOptions flow_options(Tolerance tol) {
  if (!(tol.rtol > 0.0) || !(tol.atol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  OdeOptions opt;
  opt.tol = tol;
  return opt;
}

Matrix3 adjugate(const Matrix3& m) {
  Matrix3 adj;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  }
  return adj;
}

}  // namespace

// ---------------------------------------------------------------------------

VariationalFlow::VariationalFlow(std::shared_ptr<const DenseOutput<24>> solution, Tolerance tol)
    : solution_(solution), base_(std::move(solution), tol) {}

void VariationalFlow::matrices(double t, Matrix3& m, Matrix3& mdot) const {
  const Flow y = (*solution_)(t);
  m = Eigen::Map<const Matrix3>(y.data() + 6);
  mdot = Eigen::Map<const Matrix3>(y.data() + 15);
}

Matrix3 VariationalFlow::M(double t) const {
  Matrix3 m, md;
  matrices(t, m, md);
  return m;
}

Matrix3 VariationalFlow::Mdot(double t) const {
  Matrix3 m, md;
  matrices(t, m, md);
  return md;
}

VariationalFlow variational_flow(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                                 Interval interval, Tolerance tol) {
  auto rhs = [&system](double, const Flow& y, Flow& dy) {
    Vector3 grad;
    Matrix3 A;
    system.gradient_and_hessian(y.head<3>(), grad, A);
    dy.head<3>() = y.segment<3>(3);
    dy.segment<3>(3) = -grad;
    Eigen::Map<const Matrix3> m(y.data() + 6);
    Eigen::Map<const Matrix3> md(y.data() + 15);
    Eigen::Map<Matrix3>(dy.data() + 6) = md;
    Eigen::Map<Matrix3>(dy.data() + 15) = -A * m;
  };
  auto sol = std::make_shared<DenseOutput<24>>(
      integrate_dense<24>(rhs, interval.a, initial_flow_state(q0, v0), interval.b, flow_options(tol)));
  return VariationalFlow(std::move(sol), tol);
}

VariationalFlow variational_flow(const ConformalMetric& metric, const Point& q0, const Vector3& v0,
                                 Interval interval, Tolerance tol) {
  const Vector3 eps = metric.signature().diagonal();
  auto rhs = [&metric, eps](double, const Flow& y, Flow& dy) {
    const Point q = y.head<3>();
    const Vector3 v = y.segment<3>(3);
    const Vector3 d = metric.rho_gradient(q);
    const Matrix3 H = metric.rho_hessian(q);
    const double dv = d.dot(v);
    const double vv = metric.signature().inner(v, v);
    const Vector3 raised = eps.cwiseProduct(d);

    // G(q, v) = Gamma(q)(v, v) = 2 v (d.v) - g0(v, v) eps*d
    const Vector3 G = 2.0 * dv * v - vv * raised;
    // dG/dq = 2 v (H v)^T - g0(v, v) eps*H
    const Matrix3 Gq = 2.0 * v * (H * v).transpose() - vv * eps.asDiagonal() * H;
    // dG/dv = 2 (d.v) I + 2 v d^T - 2 (eps*d)(eps*v)^T
    const Matrix3 Gv =
        2.0 * dv * Matrix3::Identity() + 2.0 * v * d.transpose() - 2.0 * raised * eps.cwiseProduct(v).transpose();

    dy.head<3>() = v;
    dy.segment<3>(3) = -G;
    Eigen::Map<const Matrix3> m(y.data() + 6);
    Eigen::Map<const Matrix3> md(y.data() + 15);
    Eigen::Map<Matrix3>(dy.data() + 6) = md;
    Eigen::Map<Matrix3>(dy.data() + 15) = -(Gq * m + Gv * md);
  };
  auto sol = std::make_shared<DenseOutput<24>>(
      integrate_dense<24>(rhs, interval.a, initial_flow_state(q0, v0), interval.b, flow_options(tol)));
  return VariationalFlow(std::move(sol), tol);
}

// ---------------------------------------------------------------------------
// Conjugate points

double scaled_determinant(const Matrix3& m) {
  const double n = m.norm();
  if (n == 0.0) return 0.0;
  return m.determinant() / (n * n * n);
}

namespace {

struct Scanner {
  const VariationalFlow& flow;
  const ConjugateSearch& opt;

  double sdet(double t) const { return scaled_determinant(flow.M(t)); }

  /// d/dt det M = tr(adj(M) Mdot), Jacobi's formula.
  double ddet(double t) const {
    Matrix3 m, md;
    flow.matrices(t, m, md);
    return (adjugate(m) * md).trace();
  }

  template <class F>
  double bisect(F&& f, double lo, double hi) const {
    double flo = f(lo);
    while (hi - lo > opt.bisection_tol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  /// Sign changes of det on a refined cell [lo, hi].
  std::vector<std::pair<double, double>> refined_brackets(double lo, double hi) const {
    std::vector<std::pair<double, double>> out;
    const int n = opt.refinement;
    double t_prev = lo;
    double f_prev = sdet(lo);
    for (int k = 1; k <= n; ++k) {
      const double t = lo + (hi - lo) * k / n;
      const double f = sdet(t);
      if ((f < 0.0) != (f_prev < 0.0)) out.emplace_back(t_prev, t);
      t_prev = t;
      f_prev = f;
    }
    return out;
  }

  ConjugatePoint make_point(double t) const {
    Matrix3 m = flow.M(t);
    Eigen::JacobiSVD<Matrix3> svd(m);
    const Vector3 s = svd.singularValues();
    int mult = 0;
    for (int i = 0; i < 3; ++i) {
      if (s[i] <= opt.rank_tol * s[0]) ++mult;
    }
    return {t, std::max(mult, 1), flow.base().position(t)};
  }
};

}  // namespace

std::vector<ConjugatePoint> conjugate_points(const VariationalFlow& flow, const ConjugateSearch& opt) {
  const Interval I = flow.interval();
  if (!(I.b > I.a)) return {};
  const Scanner sc{flow, opt};
  const int n = opt.grid;
  std::vector<double> ts(static_cast<std::size_t>(n) + 1);
  std::vector<double> fs(ts.size());
  for (int k = 0; k <= n; ++k) {
    ts[k] = I.a + I.length() * k / n;
    fs[k] = (k == 0 || k == n) ? std::numeric_limits<double>::quiet_NaN() : sc.sdet(ts[k]);
  }

  std::vector<double> roots;
  auto simple_root = [&](double lo, double hi) {
    roots.push_back(sc.bisect([&](double t) { return sc.sdet(t); }, lo, hi));
  };

  // interior grid points only; the endpoints are excluded from the open interval
  for (int k = 1; k + 1 < n; ++k) {
    if ((fs[k] < 0.0) != (fs[k + 1] < 0.0)) {
      const auto br = sc.refined_brackets(ts[k], ts[k + 1]);
      if (br.size() > 1) {
        throw GridTooCoarse("two sign changes of det M share the grid cell [" + std::to_string(ts[k]) + ", " +
                            std::to_string(ts[k + 1]) + "]");
      }
      if (br.size() == 1) simple_root(br.front().first, br.front().second);
    }
  }

  // even-order roots: local minima of |det| without a sign change, located as zeros of d/dt det
  for (int k = 2; k + 2 < n; ++k) {
    const bool same_sign = (fs[k - 1] < 0.0) == (fs[k] < 0.0) && (fs[k] < 0.0) == (fs[k + 1] < 0.0);
    if (!same_sign) continue;
    if (std::abs(fs[k]) > std::abs(fs[k - 1]) || std::abs(fs[k]) > std::abs(fs[k + 1])) continue;

    std::vector<std::pair<double, double>> br = sc.refined_brackets(ts[k - 1], ts[k]);
    const auto right = sc.refined_brackets(ts[k], ts[k + 1]);
    if (br.size() > 1 || right.size() > 1) {
      throw GridTooCoarse("two sign changes of det M share a grid cell near t=" + std::to_string(ts[k]));
    }
    br.insert(br.end(), right.begin(), right.end());
    if (!br.empty()) {
      for (const auto& [lo, hi] : br) simple_root(lo, hi);
      continue;
    }
    const double dlo = sc.ddet(ts[k - 1]);
    const double dhi = sc.ddet(ts[k + 1]);
    if ((dlo < 0.0) == (dhi < 0.0)) continue;
    const double t = sc.bisect([&](double s) { return sc.ddet(s); }, ts[k - 1], ts[k + 1]);
    const double at_min = sc.sdet(t);
    if (std::abs(at_min) <= opt.double_root_floor) {
      roots.push_back(t);
    } else if ((at_min < 0.0) != (fs[k] < 0.0)) {
      // the dip crosses zero twice inside one refined cell
      throw GridTooCoarse("two sign changes of det M share a refined cell near t=" + std::to_string(t));
    }
  }

  std::sort(roots.begin(), roots.end());
  std::vector<ConjugatePoint> out;
  for (double t : roots) {
    if (t <= I.a + 1e-9 || t >= I.b - 1e-9) continue;
    if (!out.empty() && t - out.back().t_star < 1e-8) continue;
    out.push_back(sc.make_point(t));
  }
  return out;
}

std::vector<ConjugatePoint> conjugate_points(const MechanicalSystem& system, const Point& q0, const Vector3& v0,
                                             Interval interval, Tolerance tol) {
  return conjugate_points(variational_flow(system, q0, v0, interval, tol));
}

std::vector<ConjugatePoint> conjugate_points(const ConformalMetric& metric, const Point& q0, const Vector3& v0,
                                             Interval interval, Tolerance tol) {
  return conjugate_points(variational_flow(metric, q0, v0, interval, tol));
}

std::vector<ConjugatePoint> conjugate_points_constant(const Matrix3& A, Interval interval) {
  Eigen::EigenSolver<Matrix3> es(A);
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) > 1e-12 * (1.0 + std::abs(ev.real()))) {
      throw GeometryError("constant Jacobi system with complex spectrum");
    }
    if (ev.real() <= 0.0) continue;
    const double period = std::numbers::pi / std::sqrt(ev.real());
    for (int k = 1;; ++k) {
      const double t = interval.a + k * period;
      if (t >= interval.b) break;
      roots.push_back(t);
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<ConjugatePoint> out;
  for (double t : roots) {
    if (!out.empty() && std::abs(t - out.back().t_star) <= 1e-12 * (1.0 + t)) {
      ++out.back().multiplicity;
      continue;
    }
    out.push_back({t, 1, Point::Zero()});
  }
  return out;
}

}  // namespace conjlab
