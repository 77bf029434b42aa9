#pragma once

// Dormand-Prince 5(4) with the 4th-order continuous extension, plus a classical
// fixed-step RK4 used for order checks. States are fixed-size Eigen vectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "conjlab/error.hpp"

namespace conjlab {

template <int N>
using StateVec = Eigen::Matrix<double, N, 1>;

/// Error control for the adaptive integrator.
struct Tolerance {
  double rtol = 1e-10;
  double atol = 1e-12;

  constexpr Tolerance() = default;
  constexpr Tolerance(double rel, double abs) : rtol(rel), atol(abs) {}
  /// A single number sets both the relative and the absolute tolerance.
  constexpr Tolerance(double tol) : rtol(tol), atol(tol) {}  // NOLINT(google-explicit-constructor)
};

struct OdeOptions {
  Tolerance tol;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

/// Piecewise dense output of an accepted integration. Immutable once built.
template <int N>
class DenseOutput {
 public:
  using State = StateVec<N>;

  double start() const { return t_.front(); }
  double end() const { return t_.back(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<State>& nodes() const { return y_; }
  std::size_t steps() const { return t_.size() - 1; }

  /// Interpolated state; t is clamped into [start, end].
  State operator()(double t) const {
    if (t <= t_.front()) return y_.front();
    if (t >= t_.back()) return y_.back();
    const std::size_t k = segment(t);
    const double h = t_[k + 1] - t_[k];
    const double s = (t - t_[k]) / h;
    const double s1 = 1.0 - s;
    const auto& c = cont_[k];
    return y_[k] + s * (c[0] + s1 * (c[1] + s * (c[2] + s1 * c[3])));
  }

  /// Index of the step whose closed interval contains t.
  std::size_t segment(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - t_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, t_.size() - 2);
  }

  void reserve(std::size_t n) {
    t_.reserve(n);
    y_.reserve(n);
    cont_.reserve(n);
  }
  void push_node(double t, const State& y) {
    t_.push_back(t);
    y_.push_back(y);
  }
  void push_segment(const std::array<State, 4>& c) { cont_.push_back(c); }

 private:
  std::vector<double> t_;
  std::vector<State> y_;
  std::vector<std::array<State, 4>> cont_;  // rcont2..rcont5 of the Hairer extension
};

namespace detail {

template <int N>
double error_norm(const StateVec<N>& err, const StateVec<N>& y0, const StateVec<N>& y1, const Tolerance& tol) {
  const auto scale = (tol.atol + tol.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return std::sqrt((err.array() / scale).square().mean());
}

template <int N, class Rhs>
double initial_step(Rhs& f, double t0, const StateVec<N>& y0, const StateVec<N>& k0, double span,
                    const Tolerance& tol) {
  const auto scale = (tol.atol + tol.rtol * y0.cwiseAbs().array());
  const double d0 = std::sqrt((y0.array() / scale).square().mean());
  const double d1 = std::sqrt((k0.array() / scale).square().mean());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const StateVec<N> y1 = y0 + h0 * k0;
  StateVec<N> k1;
  f(t0 + h0, y1, k1);
  const double d2 = std::sqrt(((k1 - k0).array() / scale).square().mean()) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

/// Core stepping loop; `Store` receives accepted steps.
template <int N, class Rhs, class Store>
StateVec<N> dopri5_loop(Rhs& f, double t0, const StateVec<N>& y0, double t1, const OdeOptions& opt, Store&& store) {
  using namespace dopri;
  using State = StateVec<N>;
  constexpr double safety = 0.9;
  constexpr double fac_min = 0.2;
  constexpr double fac_max = 10.0;
  constexpr double beta = 0.04;
  constexpr double expo = 0.2 - beta * 0.75;

  State y = y0;
  if (!(t1 > t0)) return y;
  const double span = t1 - t0;

  State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  f(t0, y, k1);
  double h = opt.initial_step > 0.0 ? opt.initial_step : initial_step<N>(f, t0, y, k1, span, opt.tol);
  h = std::min(h, opt.max_step);
  double t = t0;
  double err_old = 1e-4;
  bool rejected = false;
  std::size_t n = 0;

  while (t < t1) {
    if (++n > opt.max_steps) throw IntegrationError("step budget exhausted", t);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw IntegrationError("step-size underflow", t);
    }
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, ynew, k7);

    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm<N>(err, y, ynew, opt.tol);
    if (!std::isfinite(en)) {
      h *= 0.25;
      rejected = true;
      continue;
    }

    if (en <= 1.0) {
      const double t_new = last ? t1 : t + h;
      const State dy = ynew - y;
      const State bspl = h * k1 - dy;
      store(t_new, ynew,
            std::array<State, 4>{dy, bspl, dy - h * k7 - bspl,
                                 h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)});
      y = ynew;
      k1 = k7;
      t = t_new;
      double fac = std::pow(std::max(en, 1e-16), expo) * std::pow(err_old, -beta) / safety;
      fac = std::clamp(fac, 1.0 / fac_max, 1.0 / fac_min);
      if (rejected) fac = std::max(fac, 1.0);
      err_old = std::max(en, 1e-4);
      h = std::min(h / fac, opt.max_step);
      rejected = false;
      if (last) break;
    } else {
      const double fac = std::min(1.0 / fac_min, std::pow(en, 0.2) / safety);
      h /= fac;
      rejected = true;
    }
  }
  return y;
}

}  // namespace detail

/// Integrates y' = f(t, y) on [t0, t1] and keeps the dense output.
/// `f` is callable as f(double t, const State& y, State& dydt).
template <int N, class Rhs>
DenseOutput<N> integrate_dense(Rhs&& f, double t0, const StateVec<N>& y0, double t1, const OdeOptions& opt = {}) {
  DenseOutput<N> out;
  out.reserve(256);
  out.push_node(t0, y0);
  if (!(t1 > t0)) {
    // degenerate interval: a single zero-length segment
    out.push_node(t0, y0);
    out.push_segment({StateVec<N>::Zero(), StateVec<N>::Zero(), StateVec<N>::Zero(), StateVec<N>::Zero()});
    return out;
  }
  detail::dopri5_loop<N>(f, t0, y0, t1, opt, [&out](double t, const StateVec<N>& y, const auto& c) {
    out.push_node(t, y);
    out.push_segment(c);
  });
  return out;
}

/// Same stepping as integrate_dense but only the final state is kept.
template <int N, class Rhs>
StateVec<N> integrate_endpoint(Rhs&& f, double t0, const StateVec<N>& y0, double t1, const OdeOptions& opt = {}) {
  return detail::dopri5_loop<N>(f, t0, y0, t1, opt, [](double, const StateVec<N>&, const auto&) {});
}

/// Classical fixed-step 4th-order Runge-Kutta.
template <int N, class Rhs>
StateVec<N> integrate_rk4(Rhs&& f, double t0, StateVec<N> y, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  StateVec<N> k1, k2, k3, k4;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    f(t, y, k1);
    f(t + 0.5 * h, StateVec<N>(y + 0.5 * h * k1), k2);
    f(t + 0.5 * h, StateVec<N>(y + 0.5 * h * k2), k3);
    f(t + h, StateVec<N>(y + h * k3), k4);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace conjlab
