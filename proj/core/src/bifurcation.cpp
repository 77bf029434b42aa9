#include "conjlab/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/SVD>

#include "conjlab/error.hpp"
#include "conjlab/expression.hpp"

namespace conjlab {

namespace {

constexpr double kPlaneInvarianceTol = 1e-10;
constexpr double kReturnBisectionTol = 1e-10;

OdeOptions shot_options(const ShotSetup& setup) {
  OdeOptions opt;
  opt.tol = setup.tol;
  return opt;
}

StateVec<6> shot_state(const ShotSetup& setup, const Vector2& w) {
  StateVec<6> y;
  y << setup.q0, setup.initial_velocity(w);
  return y;
}

auto rhs_for(const MechanicalSystem& system) {
  return [&system](double, const StateVec<6>& y, StateVec<6>& dy) { pgeodesic_rhs(system, y, dy); };
}

}  // namespace

Vector2 miss_map(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("miss_map: lambda must be non-negative");
  const StateVec<6> y = integrate_endpoint<6>(rhs_for(system), 0.0, shot_state(setup, w), lambda, shot_options(setup));
  return y.head<2>() - setup.q0.head<2>();
}

Trajectory shoot(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w, double t_end) {
  return integrate_pgeodesic(system, setup.q0, setup.initial_velocity(w), {0.0, t_end}, setup.tol);
}

// ---------------------------------------------------------------------------
// Newton shooting

std::string_view to_string(ShootStatus s) {
  switch (s) {
    case ShootStatus::converged: return "converged";
    case ShootStatus::singular_family: return "singular-family";
    case ShootStatus::no_convergence: return "no-convergence";
  }
  return "?";
}

Eigen::Matrix2d miss_jacobian(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w,
                              double lambda, double h) {
  Eigen::Matrix2d J;
  for (int j = 0; j < 2; ++j) {
    Vector2 dw = Vector2::Zero();
    dw[j] = h;
    J.col(j) = (miss_map(system, setup, w + dw, lambda) - miss_map(system, setup, w - dw, lambda)) / (2.0 * h);
  }
  return J;
}

namespace {

/// Runs f(0..n-1) on the available hardware threads.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double condition_of(const Eigen::JacobiSVD<Eigen::Matrix2d>& svd) {
  const auto& s = svd.singularValues();
  if (s[1] == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(s[0], 1.0) / s[1];
}

}  // namespace

ShootResult newton_shoot(const MechanicalSystem& system, const ShotSetup& setup, double lambda,
                         const Vector2& w_guess, const NewtonOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("newton_shoot: tol must be positive");

  // shots that blow up before lambda count as failed evaluations, not as errors
  auto try_miss = [&](const Vector2& w, Vector2& out) {
    try {
      out = miss_map(system, setup, w, lambda);
      return true;
    } catch (const IntegrationError&) {
      return false;
    }
  };
  auto try_jacobian = [&](const Vector2& w, Eigen::Matrix2d& out) {
    try {
      out = miss_jacobian(system, setup, w, lambda, opt.fd_step);
      return true;
    } catch (const IntegrationError&) {
      return false;
    }
  };

  ShootResult r;
  r.w = w_guess;
  Vector2 m;
  if (!try_miss(r.w, m)) {
    r.miss = std::numeric_limits<double>::infinity();
    return r;
  }
  r.miss = m.norm();

  auto finish = [&](ShootStatus status) {
    r.status = status;
    Eigen::Matrix2d J;
    if (status != ShootStatus::no_convergence && try_jacobian(r.w, J)) {
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(J);
      r.condition = condition_of(svd);
      if (r.condition > opt.condition_limit) r.status = ShootStatus::singular_family;
    }
    return r;
  };

  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    if (r.miss <= opt.tol) return finish(ShootStatus::converged);

    Eigen::Matrix2d J;
    if (!try_jacobian(r.w, J)) return finish(ShootStatus::no_convergence);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    r.condition = condition_of(svd);
    if (s[0] == 0.0) return finish(ShootStatus::no_convergence);

    // pseudo-inverse step; ill-conditioned directions are dropped
    Vector2 step = Vector2::Zero();
    const Vector2 um = svd.matrixU().transpose() * m;
    for (int i = 0; i < 2; ++i) {
      if (s[i] == 0.0) continue;
      if (i > 0 && r.condition > opt.condition_limit) continue;
      step -= svd.matrixV().col(i) * (um[i] / s[i]);
    }

    double scale = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, scale *= 0.5) {
      const Vector2 trial = r.w + scale * step;
      Vector2 mt;
      if (try_miss(trial, mt) && mt.norm() < r.miss) {
        r.w = trial;
        m = mt;
        r.miss = mt.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) return finish(ShootStatus::no_convergence);
  }
  return finish(r.miss <= opt.tol ? ShootStatus::converged : ShootStatus::no_convergence);
}

// ---------------------------------------------------------------------------
// Branch tracing

Branch trace_branch(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& ray,
                    const std::vector<double>& alphas, Interval window) {
  if (alphas.empty()) throw std::invalid_argument("trace_branch: no amplitudes");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 0.0) || (k > 0 && !(alphas[k] < alphas[k - 1]))) {
      throw std::invalid_argument("trace_branch: amplitudes must be positive and strictly decreasing");
    }
  }
  if (!(window.b > window.a) || window.a < 0.0) throw std::invalid_argument("trace_branch: bad window");
  if (ray.norm() == 0.0) throw std::invalid_argument("trace_branch: zero ray");

  Branch branch;
  branch.ray = ray.normalized();
  const Vector2 normal(-branch.ray.y(), branch.ray.x());

  {
    const Trajectory probe = shoot(system, setup, alphas.front() * branch.ray, window.b);
    double drift = 0.0;
    for (const auto& s : probe.samples()) {
      drift = std::max({drift, std::abs(normal.dot(s.q.head<2>() - setup.q0.head<2>())),
                        std::abs(normal.dot(s.v.head<2>()))});
    }
    if (drift > kPlaneInvarianceTol) {
      throw BranchError("plane not invariant: off-plane drift " + std::to_string(drift) + " along ray (" +
                        std::to_string(branch.ray.x()) + ", " + std::to_string(branch.ray.y()) + ")");
    }
  }

  for (double alpha : alphas) {
    const Vector2 w = alpha * branch.ray;
    const Trajectory traj = shoot(system, setup, w, window.b);
    auto transverse = [&](double t) { return branch.ray.dot(traj.position(t).head<2>() - setup.q0.head<2>()); };

    const auto nodes = traj.samples();
    double T = -1.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      if (transverse(nodes[k].t) > 0.0) continue;
      double lo = nodes[k - 1].t;
      double hi = nodes[k].t;
      while (hi - lo > kReturnBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        (transverse(mid) > 0.0 ? lo : hi) = mid;
      }
      T = 0.5 * (lo + hi);
      break;
    }
    if (T < 0.0 || !window.contains(T)) {
      throw BranchError("no return in window [" + std::to_string(window.a) + ", " + std::to_string(window.b) +
                        "] for alpha=" + std::to_string(alpha));
    }
    branch.points.push_back({alpha, T, w});
  }
  return branch;
}

// ---------------------------------------------------------------------------
// Certificates

std::string_view to_string(CertificateVariant v) {
  return v == CertificateVariant::mixed_sextic ? "mpp" : "new";
}

CertificateVariant certificate_variant_from_string(std::string_view s) {
  if (s == "mpp") return CertificateVariant::mixed_sextic;
  if (s == "new") return CertificateVariant::definite_quartic;
  throw std::invalid_argument("unknown certificate variant '" + std::string(s) + "' (expected mpp or new)");
}

ScalarField certificate_density(CertificateVariant v) {
  const ScalarField x = ScalarField::variable(Axis::x);
  const ScalarField y = ScalarField::variable(Axis::y);
  if (v == CertificateVariant::mixed_sextic) return x.pow(2) * y.pow(4) + x.pow(4) * y.pow(2);
  return x.pow(4) + y.pow(4) + 6.0 * (x.pow(2) * y.pow(2));
}

Certificate certificate_integral(CertificateVariant variant, const ScalarField& weight, const Trajectory& traj,
                                 double lambda) {
  if (lambda < traj.start() || lambda > traj.end() + 1e-12) {
    throw std::invalid_argument("certificate_integral: lambda outside the trajectory");
  }
  const ScalarField integrand = weight * certificate_density(variant);
  const FieldBundle eval(std::span<const ScalarField>(&integrand, 1));

  Certificate c;
  c.variant = variant;
  c.lambda = lambda;
  c.integrand_min = std::numeric_limits<double>::infinity();
  auto f = [&](double t) {
    double v = 0.0;
    eval.eval(traj.position(t), std::span<double>(&v, 1));
    c.integrand_min = std::min(c.integrand_min, v);
    return v;
  };
  c.value = simpson(f, traj.start(), lambda, quadrature_panels(lambda - traj.start()));
  return c;
}

CertificateReduction reduce_certificate(const MechanicalSystem& system) {
  const auto& F = system.gradient();
  const ScalarField x = ScalarField::variable(Axis::x);
  const ScalarField y = ScalarField::variable(Axis::y);

  CertificateReduction r;
  r.reduction = x * F[1] - y * F[0];
  if (r.reduction.is_zero()) return r;

  int sign = 0;
  bool even = true;
  bool pure_x = false;
  bool pure_y = false;
  for (const auto& [expo, coef] : r.reduction.terms()) {
    for (const auto& [e, c] : coef.terms()) {
      if (e[0] % 2 || e[1] % 2 || e[2] % 2) even = false;
      const int s = c > 0.0 ? 1 : -1;
      if (sign == 0) sign = s;
      if (s != sign) even = false;
      if (e[0] > 0 && e[1] == 0 && e[2] == 0) pure_x = true;
      if (e[1] > 0 && e[0] == 0 && e[2] == 0) pure_y = true;
    }
  }
  r.semidefinite = even;
  r.definite = even && pure_x && pure_y;
  r.sign = even ? sign : 0;
  return r;
}

int reduction_matches(const CertificateReduction& r, const ScalarField& weight, CertificateVariant variant) {
  const ScalarField target = weight * certificate_density(variant);
  if (r.reduction == target) return 1;
  if (r.reduction == -target) return -1;
  return 0;
}

double cross_wronskian(const Trajectory& traj, double t) {
  const StateVec<6> s = traj.state(t);
  return s[0] * s[4] - s[1] * s[3];
}

// ---------------------------------------------------------------------------
// Scan

ScanEvidence nonbifurcation_scan(const MechanicalSystem& system, const ShotSetup& setup, Interval window,
                                 const ScanOptions& opt, CertificateVariant variant, const ScalarField& weight) {
  if (!(opt.radius > 0.0)) throw std::invalid_argument("nonbifurcation_scan: radius must be positive");
  if (opt.grid < 16) throw std::invalid_argument("nonbifurcation_scan: grid must be at least 16");
  if (opt.lambda_samples < 2 || opt.seeds < 1) throw std::invalid_argument("nonbifurcation_scan: bad sample counts");
  if (!(window.b > window.a) || window.a <= 0.0) throw std::invalid_argument("nonbifurcation_scan: bad window");

  ScanEvidence ev;
  ev.window = window;
  std::vector<double> lambdas;
  for (int k = 0; k < opt.lambda_samples; ++k) {
    lambdas.push_back(window.a + window.length() * k / (opt.lambda_samples - 1));
  }

  const std::size_t nl = lambdas.size();
  const std::size_t ng = static_cast<std::size_t>(opt.grid);
  std::vector<ScanSample> grid(nl * ng * ng);
  // one integration per polar grid point, read at every lambda; slots are fixed so the
  // result does not depend on scheduling
  parallel_for(ng * ng, [&](std::size_t idx) {
    const std::size_t j = idx / ng;
    const std::size_t k = idx % ng;
    const double angle = 2.0 * std::numbers::pi * double(j) / double(ng);
    const double radius = opt.radius * double(k + 1) / double(ng);
    const Vector2 w = radius * Vector2(std::cos(angle), std::sin(angle));
    try {
      const Trajectory traj = shoot(system, setup, w, window.b);
      for (std::size_t l = 0; l < nl; ++l) {
        const double miss = (traj.position(lambdas[l]).head<2>() - setup.q0.head<2>()).norm();
        grid[(l * ng + j) * ng + k] = {lambdas[l], angle, radius, miss};
      }
    } catch (const IntegrationError&) {
      // the shot escapes before the window ends; sample each lambda on its own
      for (std::size_t l = 0; l < nl; ++l) {
        double miss = std::numeric_limits<double>::infinity();
        try {
          miss = miss_map(system, setup, w, lambdas[l]).norm();
        } catch (const IntegrationError&) {
        }
        grid[(l * ng + j) * ng + k] = {lambdas[l], angle, radius, miss};
      }
    }
  });
  ev.samples = std::move(grid);
  ev.min_miss = std::numeric_limits<double>::infinity();
  for (const auto& s : ev.samples) {
    if (s.miss < ev.min_miss) {
      ev.min_miss = s.miss;
      ev.min_miss_lambda = s.lambda;
      ev.min_miss_radius = s.radius;
    }
  }
  ev.floor_met = ev.min_miss >= opt.miss_floor;

  const std::size_t ns = static_cast<std::size_t>(opt.seeds);
  std::vector<NewtonRun> runs(nl * ns);
  parallel_for(runs.size(), [&](std::size_t idx) {
    const double lambda = lambdas[idx / ns];
    const double angle = 2.0 * std::numbers::pi * double(idx % ns) / double(ns);
    const Vector2 guess = opt.seed_radius * Vector2(std::cos(angle), std::sin(angle));
    const ShootResult res = newton_shoot(system, setup, lambda, guess, opt.newton);
    const bool found = res.status != ShootStatus::no_convergence;
    runs[idx] = {lambda, angle, res, found && res.w.norm() <= opt.trivial_radius};
  });
  ev.newton = std::move(runs);
  for (const auto& run : ev.newton) {
    if (run.trivial) continue;
    ev.all_trivial = false;
    if (run.result.status == ShootStatus::no_convergence) continue;
    const Trajectory traj = shoot(system, setup, run.result.w, run.lambda);
    const Certificate cert = certificate_integral(variant, weight, traj, run.lambda);
    ev.nontrivial.push_back({run.lambda, run.result.w, cert, cert.value});
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Verdicts

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::bifurcating: return "bifurcating";
    case Classification::certified_non_bifurcating: return "certified-non-bifurcating";
    case Classification::undecided: return "undecided";
  }
  return "?";
}

bool branch_supports(const Branch& branch, double t_star, double window) {
  int close = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& p : branch.points) {
    const double d = std::abs(p.T - t_star);
    if (d > prev + 1e-9) return false;
    if (d <= window) ++close;
    prev = d;
  }
  return close >= 4;
}

Classification classify(const VerdictInput& in, std::string& note) {
  if (in.branches) {
    std::string found;
    int count = 0;
    for (const auto& b : *in.branches) {
      if (!branch_supports(b, in.t_star)) continue;
      const auto& last = b.points.back();
      found += std::string(count++ ? "; " : "") + "ray (" + format_double(b.ray.x()) + ", " + format_double(b.ray.y()) +
               ") returns at T=" + format_double(last.T) + " for alpha=" + format_double(last.alpha);
    }
    if (count) {
      note = std::to_string(count) + (count == 1 ? " branch" : " branches") + " converging to t*: " + found;
      return Classification::bifurcating;
    }
  }
  if (!in.scan) {
    note = "no scan evidence";
    return Classification::undecided;
  }
  const ScanEvidence& s = *in.scan;
  std::size_t stalled = 0;
  for (const auto& run : s.newton) stalled += run.result.status == ShootStatus::no_convergence;
  const std::string stall_note =
      stalled ? ", " + std::to_string(stalled) + " Newton runs stalled at a nonzero residual" : std::string();
  if (s.floor_met && s.nontrivial.empty()) {
    if (in.reduction && in.reduction->definite) {
      note = "scan clean (min miss " + format_double(s.min_miss) + "), no nontrivial Newton solution" + stall_note +
             ", certificate integrand definite";
      return Classification::certified_non_bifurcating;
    }
    note = "no branch found (numerical); certificate integrand not definite" + stall_note;
    return Classification::undecided;
  }
  if (!s.nontrivial.empty()) {
    note = std::to_string(s.nontrivial.size()) + " nontrivial solutions found but no branch converging to t*";
  } else {
    note = "min off-origin miss " + format_double(s.min_miss) + " below floor" + stall_note;
  }
  return Classification::undecided;
}

}  // namespace conjlab
