#include "conjlab/geometry.hpp"

#include <stdexcept>
#include <vector>

#include "conjlab/error.hpp"

namespace conjlab {

namespace {

constexpr double kAxisConditionTol = 1e-12;

std::vector<ScalarField> gradient_and_hessian_fields(const Signature& sig, const ScalarField& f, bool raise) {
  std::vector<ScalarField> out;
  out.reserve(12);
  std::array<ScalarField, 3> first;
  for (Axis a : kAxes) first[index(a)] = f.partial(a);
  for (int i = 0; i < 3; ++i) out.push_back(raise ? double(sig[i]) * first[i] : first[i]);
  for (int i = 0; i < 3; ++i) {
    for (Axis b : kAxes) {
      ScalarField d = first[i].partial(b);
      out.push_back(raise ? double(sig[i]) * d : d);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Signature::Signature(int ex, int ey, int ez) : eps_{ex, ey, ez} {
  for (int e : eps_) {
    if (e != 1 && e != -1) throw std::invalid_argument("signature components must be +1 or -1");
  }
}

double Signature::inner(const Vector3& u, const Vector3& v) const {
  return eps_[0] * u[0] * v[0] + eps_[1] * u[1] * v[1] + eps_[2] * u[2] * v[2];
}

std::array<ScalarField, 3> metric_gradient(const Signature& sig, const ScalarField& f) {
  std::array<ScalarField, 3> g;
  for (Axis a : kAxes) g[index(a)] = double(sig[a]) * f.partial(a);
  return g;
}

// ---------------------------------------------------------------------------

MechanicalSystem::MechanicalSystem(Signature signature, ScalarField potential)
    : signature_(signature), potential_(std::move(potential)), gradient_(metric_gradient(signature_, potential_)) {
  potential_eval_ = FieldBundle(std::span<const ScalarField>(&potential_, 1));
  gradient_eval_ = FieldBundle(gradient_);
  const auto both = gradient_and_hessian_fields(signature_, potential_, true);
  hessian_eval_ = FieldBundle(both);
}

double MechanicalSystem::potential_at(const Point& q) const {
  double v = 0.0;
  potential_eval_.eval(q, std::span<double>(&v, 1));
  return v;
}

Vector3 MechanicalSystem::gradient_at(const Point& q) const {
  Vector3 g;
  gradient_eval_.eval(q, std::span<double>(g.data(), 3));
  return g;
}

void MechanicalSystem::gradient_and_hessian(const Point& q, Vector3& grad, Matrix3& hess) const {
  std::array<double, 12> buf;
  hessian_eval_.eval(q, buf);
  grad = Vector3(buf[0], buf[1], buf[2]);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) hess(i, j) = buf[3 + 3 * i + j];
  }
}

Matrix3 MechanicalSystem::hessian_at(const Point& q) const {
  Vector3 g;
  Matrix3 h;
  gradient_and_hessian(q, g, h);
  return h;
}

// ---------------------------------------------------------------------------

ConformalMetric::ConformalMetric(Signature signature, ScalarField rho)
    : signature_(signature), rho_(std::move(rho)) {
  if (!rho_.is_polynomial()) throw std::invalid_argument("conformal exponent rho must be a polynomial");
  factor_ = ScalarField::exp2(rho_.as_polynomial());
  const auto fields = gradient_and_hessian_fields(signature_, rho_, false);
  derivative_eval_ = FieldBundle(fields);
  factor_eval_ = FieldBundle(std::span<const ScalarField>(&factor_, 1));
}

double ConformalMetric::factor_at(const Point& q) const {
  double v = 0.0;
  factor_eval_.eval(q, std::span<double>(&v, 1));
  return v;
}

Vector3 ConformalMetric::rho_gradient(const Point& q) const {
  std::array<double, 12> buf;
  derivative_eval_.eval(q, buf);
  return {buf[0], buf[1], buf[2]};
}

Matrix3 ConformalMetric::rho_hessian(const Point& q) const {
  std::array<double, 12> buf;
  derivative_eval_.eval(q, buf);
  Matrix3 h;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) h(i, j) = buf[3 + 3 * i + j];
  }
  return h;
}

double ConformalMetric::inner(const Point& q, const Vector3& u, const Vector3& v) const {
  return factor_at(q) * signature_.inner(u, v);
}

// ---------------------------------------------------------------------------

Christoffel christoffel(const ConformalMetric& metric, const Point& q) {
  const Vector3 d = metric.rho_gradient(q);
  const Signature& sig = metric.signature();
  Christoffel gamma;
  for (int i = 0; i < 3; ++i) {
    Matrix3& G = gamma[i];
    G.setZero();
    for (int j = 0; j < 3; ++j) {
      G(i, j) += d[j];  // delta^i_j d_k rho, with k = j here written as G(i, k)
      G(j, i) += d[j];  // delta^i_k d_j rho
    }
    for (int j = 0; j < 3; ++j) G(j, j) -= sig[j] * sig[i] * d[i];
  }
  return gamma;
}

std::array<Christoffel, 3> christoffel_derivative(const ConformalMetric& metric, const Point& q) {
  const Matrix3 H = metric.rho_hessian(q);
  const Signature& sig = metric.signature();
  std::array<Christoffel, 3> dgamma;
  for (int l = 0; l < 3; ++l) {
    for (int i = 0; i < 3; ++i) {
      Matrix3& G = dgamma[l][i];
      G.setZero();
      for (int j = 0; j < 3; ++j) {
        G(i, j) += H(j, l);
        G(j, i) += H(j, l);
      }
      for (int j = 0; j < 3; ++j) G(j, j) -= sig[j] * sig[i] * H(i, l);
    }
  }
  return dgamma;
}

Vector3 contract(const Christoffel& gamma, const Vector3& u, const Vector3& w) {
  return {u.dot(gamma[0] * w), u.dot(gamma[1] * w), u.dot(gamma[2] * w)};
}

Vector3 curvature(const ConformalMetric& metric, const Point& q, const Vector3& X, const Vector3& Y,
                  const Vector3& Z) {
  // Standard components R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj},
  // with R_std(e_k, e_l) e_j = R^i_{jkl} e_i; the result is -R_std(X, Y) Z.
  const Christoffel G = christoffel(metric, q);
  const auto dG = christoffel_derivative(metric, q);
  Vector3 out = Vector3::Zero();
  for (int i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const double w = Z[j] * X[k] * Y[l];
          if (w == 0.0) continue;
          double r = dG[k][i](l, j) - dG[l][i](k, j);
          for (int m = 0; m < 3; ++m) r += G[i](k, m) * G[m](l, j) - G[i](l, m) * G[m](k, j);
          acc += r * w;
        }
      }
    }
    out[i] = -acc;
  }
  return out;
}

Matrix3 jacobi_coefficients(const MechanicalSystem& system, const Trajectory& base, double t) {
  return system.hessian_at(base.position(t));
}

Matrix3 jacobi_coefficients(const ConformalMetric& metric, const Trajectory& base, double t) {
  const Point q = base.position(t);
  const Christoffel G = christoffel(metric, q);
  double worst = 0.0;
  for (const auto& m : G) worst = std::max(worst, m.cwiseAbs().maxCoeff());
  if (worst > kAxisConditionTol) {
    throw GeometryError("axis condition violated: Christoffel symbols do not vanish along the base (max |Gamma| = " +
                        std::to_string(worst) + ")");
  }
  const Vector3 v = base.velocity(t);
  Matrix3 A;
  for (int j = 0; j < 3; ++j) A.col(j) = curvature(metric, q, v, Vector3::Unit(j), v);
  return A;
}

}  // namespace conjlab
