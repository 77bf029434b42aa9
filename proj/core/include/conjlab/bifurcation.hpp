#pragma once

// Numerical bifurcation analysis along the axis solution gamma_0(t) = q0 + t (0, 0, speed)
// of a mechanical system: the miss map, Newton shooting, branch tracing in an
// invariant plane, integral certificates and the per-conjugate-point verdict.

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "conjlab/dynamics.hpp"
#include "conjlab/variational.hpp"

namespace conjlab {

using Vector2 = Eigen::Vector2d;

/// Base solution the shots are compared against: start point and longitudinal speed.
struct ShotSetup {
  Point q0 = Point::Zero();
  double speed = 1.0;
  Tolerance tol{1e-10, 1e-12};

  Vector3 initial_velocity(const Vector2& w) const { return {w.x(), w.y(), speed}; }
};

/// Transverse position (x, y) at lambda of the p-geodesic leaving q0 with velocity (w, speed).
Vector2 miss_map(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w, double lambda);

/// The shot itself, integrated over [0, t_end].
Trajectory shoot(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w, double t_end);

// ---------------------------------------------------------------------------

enum class ShootStatus { converged, singular_family, no_convergence };

std::string_view to_string(ShootStatus s);

struct NewtonOptions {
  double tol = 1e-10;            // on |miss|
  int max_iter = 60;
  double fd_step = 1e-6;         // central differences
  double condition_limit = 1e8;
  int max_halvings = 20;
};

struct ShootResult {
  ShootStatus status = ShootStatus::no_convergence;
  Vector2 w = Vector2::Zero();
  double miss = 0.0;
  int iterations = 0;
  /// max(sigma_max, 1) / sigma_min of the miss-map Jacobian at w.
  double condition = 0.0;
};

/// Damped Newton iteration on miss_map(., lambda) = 0. Where the Jacobian is worse
/// conditioned than condition_limit the step is taken along the well-conditioned
/// directions only; a converged run whose final Jacobian is that singular is
/// reported as singular_family.
ShootResult newton_shoot(const MechanicalSystem& system, const ShotSetup& setup, double lambda,
                         const Vector2& w_guess, const NewtonOptions& opt = {});

/// Central-difference Jacobian of the miss map.
Eigen::Matrix2d miss_jacobian(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& w,
                              double lambda, double h);

// ---------------------------------------------------------------------------

struct BranchPoint {
  double alpha = 0.0;
  double T = 0.0;  // first return of the transverse coordinate to zero
  Vector2 w = Vector2::Zero();
};

struct Branch {
  Vector2 ray = Vector2::UnitX();
  std::vector<BranchPoint> points;  // alpha strictly decreasing
};

/// Default amplitudes of a traced branch.
inline const std::vector<double> kDefaultBranchAlphas{0.4, 0.2, 0.1, 0.05, 0.025};

/// Follows the shots w = alpha * ray for decreasing alpha and records their first
/// return time T(alpha) in `window`. The plane spanned by the ray and the axis must be
/// invariant (off-plane drift of a probe shot <= 1e-10); otherwise BranchError("plane not
/// invariant"). BranchError("no return in window") when a shot does not come back in time.
Branch trace_branch(const MechanicalSystem& system, const ShotSetup& setup, const Vector2& ray,
                    const std::vector<double>& alphas, Interval window);

// ---------------------------------------------------------------------------

/// mixed_sextic: x^2 y^4 + x^4 y^2, the semidefinite integrand that vanishes when y = 0.
/// definite_quartic: x^4 + y^4 + 6 x^2 y^2, positive away from x = y = 0.
enum class CertificateVariant { mixed_sextic, definite_quartic };

std::string_view to_string(CertificateVariant v);  // "mpp" / "new"
CertificateVariant certificate_variant_from_string(std::string_view s);

ScalarField certificate_density(CertificateVariant v);

struct Certificate {
  CertificateVariant variant = CertificateVariant::definite_quartic;
  double lambda = 0.0;
  double value = 0.0;          // int_0^lambda weight * density dt
  double integrand_min = 0.0;  // over the quadrature nodes
};

/// Simpson quadrature of weight(q) * density(q) along traj over [traj.start(), lambda].
Certificate certificate_integral(CertificateVariant variant, const ScalarField& weight, const Trajectory& traj,
                                 double lambda);

/// Cross-Wronskian reduction of q'' = -F(q): with W = x y' - y x', W' = -(x F_y - y F_x).
/// `reduction` is x F_y - y F_x as an exact field.
struct CertificateReduction {
  ScalarField reduction;
  bool semidefinite = false;  // every monomial even in x, y, z with coefficients of one sign
  bool definite = false;      // semidefinite and vanishing only where x = y = 0
  int sign = 0;               // sign of the coefficients when semidefinite
};

CertificateReduction reduce_certificate(const MechanicalSystem& system);

/// +1 / -1 when reduction == +-(weight * density) structurally, 0 otherwise.
int reduction_matches(const CertificateReduction& r, const ScalarField& weight, CertificateVariant variant);

/// W(t) = x y' - y x' along a trajectory.
double cross_wronskian(const Trajectory& traj, double t);

// ---------------------------------------------------------------------------

struct ScanOptions {
  double half_width = 0.3;  // lambda window is [t* - half_width, t* + half_width]
  int lambda_samples = 17;
  double radius = 0.4;
  int grid = 64;  // grid x grid polar samples: radii radius*k/grid (k >= 1) and angles 2 pi j/grid
  int seeds = 16;
  double seed_radius = 0.3;
  double miss_floor = 1e-4;
  double trivial_radius = 1e-2;  // a Newton result with |w| below this is the trivial solution
  NewtonOptions newton;
};

struct ScanSample {
  double lambda;
  double angle;
  double radius;
  double miss;
};

struct NewtonRun {
  double lambda;
  double angle;
  ShootResult result;
  bool trivial;
};

struct NontrivialSolution {
  double lambda;
  Vector2 w;
  Certificate certificate;
  /// Certificate value; the identity forces it to vanish for a genuine solution.
  double contradiction_margin;
};

struct ScanEvidence {
  Interval window;
  std::vector<ScanSample> samples;  // sorted by lambda, then angle, then radius
  double min_miss = 0.0;
  double min_miss_lambda = 0.0;
  double min_miss_radius = 0.0;
  std::vector<NewtonRun> newton;  // sorted by lambda, then seed angle
  std::vector<NontrivialSolution> nontrivial;
  bool all_trivial = true;
  bool floor_met = false;
};

/// Polar grid scan of the miss map over the lambda window plus multi-seed Newton runs.
/// Throws std::invalid_argument when radius <= 0 or grid < 16.
ScanEvidence nonbifurcation_scan(const MechanicalSystem& system, const ShotSetup& setup, Interval window,
                                 const ScanOptions& opt, CertificateVariant variant, const ScalarField& weight);

// ---------------------------------------------------------------------------

enum class Classification { bifurcating, certified_non_bifurcating, undecided };

std::string_view to_string(Classification c);

/// True when a branch has >= 4 points within `window` of t_star whose distance to
/// t_star does not increase as alpha decreases.
bool branch_supports(const Branch& branch, double t_star, double window = 0.05);

struct VerdictInput {
  double t_star = 0.0;  // conjugate parameter in the mechanical picture
  const std::vector<Branch>* branches = nullptr;
  const ScanEvidence* scan = nullptr;
  const CertificateReduction* reduction = nullptr;
};

/// Decides one conjugate point; `note` explains the decision. Bifurcating needs a supporting
/// branch; certified-non-bifurcating needs the scan floor, no converged nontrivial Newton
/// solution and a definite certificate integrand. Anything else is undecided.
Classification classify(const VerdictInput& in, std::string& note);

}  // namespace conjlab
