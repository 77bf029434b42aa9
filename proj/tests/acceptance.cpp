// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/bifurcation.hpp"
#include "conjlab/expression.hpp"
#include "conjlab/report.hpp"

using namespace conjlab;

namespace {

constexpr double pi = std::numbers::pi;
const Tolerance tight{1e-12, 1e-12};
const Interval full{0.0, 2 * pi};

ScalarField field(const char* text) { return parse_field(text); }

const ScalarField v_old = field("(+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* 1/3 (^ x 3) (^ y 3)))");
const ScalarField rho_old = field("(+ (* 1/2 (^ y 2)) (* -1/2 (^ x 2)) (* 1/3 (^ x 3) (^ y 3)))");
const ScalarField v_new = field("(+ (* -1/2 (^ x 2)) (* 1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))");
const ScalarField rho_new = field("(+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))");
const Signature sig_old{1, -1, 1};
const Signature sig_new{-1, 1, 1};

/// Collects the failed sub-checks of one criterion together with the measured values.
class Criterion {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void measure(const std::string& name, double value) {
    std::ostringstream os;
    os.precision(6);
    os << name << '=' << value;
    values_.push_back(os.str());
  }
  bool passed() const { return failures_.empty(); }

  std::string summary() const {
    std::string s;
    for (const auto& v : values_) s += (s.empty() ? "" : " ") + v;
    for (const auto& f : failures_) s += "\n    failed: " + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> values_;
};

double sup_over(double a, double b, int n, const std::function<double(double)>& f) {
  double worst = 0;
  for (int i = 0; i <= n; ++i) worst = std::max(worst, f(a + (b - a) * i / n));
  return worst;
}

const ConjugateEntry* first_conjugate(const Report& r, const std::string& picture, const std::string& variant) {
  for (const auto& c : r.conjugate_points)
    if (c.picture == picture && c.variant == variant) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------

void criterion1(Criterion& c) {
  const MechanicalSystem sys(sig_old, v_old);
  const auto cps = conjugate_points(sys, Point::Zero(), Vector3(0, 0, 1), full, tight);
  c.require(cps.size() == 1, "exactly one conjugate point in (0, 2pi)");
  if (cps.empty()) return;
  c.measure("t*", cps[0].t_star);
  c.measure("|t*-pi|", std::abs(cps[0].t_star - pi));
  c.require(std::abs(cps[0].t_star - pi) <= 1e-8, "t* = pi within 1e-8");
  c.require(cps[0].multiplicity == 2, "multiplicity 2");
  c.require((cps[0].position - Point(0, 0, pi)).norm() <= 1e-8, "position (0,0,pi)");
}

void criterion2(Criterion& c) {
  const MechanicalSystem sys(sig_old, v_old);
  const ShotSetup setup{Point::Zero(), 1.0, tight};
  const std::vector<double> alphas{1.3, 0.7, 0.1};
  double worst_res = 0, worst_miss = 0, worst_T = 0;
  for (double a : alphas) {
    const auto u = sample_curve([a](double t) { return Point(a * std::sin(t), 0, t); },
                                [a](double t) { return Vector3(-a * std::sin(t), 0, 0); }, full, 2000);
    const auto v = sample_curve([a](double t) { return Point(0, a * std::sin(t), t); },
                                [a](double t) { return Vector3(0, -a * std::sin(t), 0); }, full, 2000);
    worst_res = std::max({worst_res, residual_pgeodesic(sys, u), residual_pgeodesic(sys, v)});
    worst_miss = std::max(worst_miss, miss_map(sys, setup, Vector2(a, 0), pi).norm());
    worst_miss = std::max(worst_miss, miss_map(sys, setup, Vector2(0, a), pi).norm());
  }
  std::vector<double> branch_alphas = alphas;
  branch_alphas.insert(branch_alphas.end(), {0.05, 0.025});
  for (const Vector2& ray : {Vector2(1, 0), Vector2(0, 1)}) {
    const Branch b = trace_branch(sys, setup, ray, branch_alphas, {pi - 0.5, pi + 0.5});
    for (const auto& p : b.points) worst_T = std::max(worst_T, std::abs(p.T - pi));
    c.require(b.points.size() == branch_alphas.size(), "every alpha traced");
  }
  c.measure("residual", worst_res);
  c.measure("miss", worst_miss);
  c.measure("|T-pi|", worst_T);
  c.require(worst_res <= 1e-12, "residual of u_alpha, v_alpha <= 1e-12");
  c.require(worst_miss <= 1e-9, "miss_map on the families <= 1e-9");
  c.require(worst_T <= 1e-9, "T(alpha) = pi within 1e-9");
}

void criterion3(Criterion& c) {
  const MechanicalSystem sys = mechanical_from_conformal(ConformalMetric(sig_old, rho_old), 0.0);
  const double t0 = pi / std::sqrt(2.0);
  const auto cps = conjugate_points(sys, Point::Zero(), Vector3(0, 0, std::sqrt(2.0)), full, tight);
  c.require(!cps.empty(), "linearized conjugate point found");
  if (!cps.empty()) {
    c.measure("|t*-pi/sqrt2|", std::abs(cps[0].t_star - t0));
    c.require(std::abs(cps[0].t_star - t0) <= 1e-8, "t* = pi/sqrt(2) within 1e-8");
  }
  const ShotSetup setup{Point::Zero(), std::sqrt(2.0), tight};
  const Branch b = trace_branch(sys, setup, Vector2(1, 0), {0.4, 0.2, 0.1, 0.05}, {t0 - 0.5, t0 + 0.5});
  const auto& p = b.points;
  c.require(p.size() == 4, "four branch points");
  if (p.size() != 4) return;
  // Independent DOP853 values (rtol 1e-13) of the first return times.
  const double oracle[] = {2.291937710106609, 2.2383314991371965, 2.2256208283783594, 2.2224836519429876};
  double worst = 0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(p[i].T - oracle[i]));
  c.measure("T(0.05)", p[3].T);
  c.measure("|T(0.05)-pi/sqrt2|", std::abs(p[3].T - t0));
  c.measure("max|T-oracle|", worst);
  c.require(worst <= 1e-8, "T(alpha) matches the high-accuracy oracle within 1e-8");
  c.require(p[0].T > p[1].T && p[1].T > p[2].T && p[2].T > p[3].T && p[3].T > t0,
            "T(0.4) > T(0.2) > T(0.1) > T(0.05) > pi/sqrt(2)");
  c.require(std::abs(p[3].T - t0) <= 1e-3, "|T(0.05) - pi/sqrt(2)| <= 1e-3");
}

void criterion4(Criterion& c) {
  const MechanicalSystem sys(sig_old, v_old);
  const Trajectory u = shoot(sys, {Point::Zero(), 1.0, tight}, Vector2(0.3, 0), pi);
  const double dev = sup_over(0, pi, 1000, [&](double t) { return (u.position(t) - Point(0.3 * std::sin(t), 0, t)).norm(); });
  const Certificate cert = certificate_integral(CertificateVariant::mixed_sextic, ScalarField(1.0), u, pi);
  c.measure("certificate", cert.value);
  c.measure("|x|max", sup_over(0, pi, 1000, [&](double t) { return std::abs(u.position(t).x()); }));
  c.require(dev <= 1e-9, "trajectory is (0.3 sin t, 0, t)");
  c.require(std::abs(cert.value) <= 1e-12, "mpp certificate <= 1e-12 on a nontrivial solution");
}

void criterion5(Criterion& c, const Report& r) {
  const ConjugateEntry* cp = first_conjugate(r, "p-geodesic", "derived");
  c.require(cp != nullptr, "conjugate point found");
  if (cp) {
    c.measure("|t*-pi|", std::abs(cp->t_star - pi));
    c.require(std::abs(cp->t_star - pi) <= 1e-8, "t* = pi within 1e-8");
  }
  c.require(!r.scans.empty(), "scan ran");
  for (const auto& s : r.scans) {
    c.measure("min_miss[" + s.variant + "]", s.min_miss);
    c.measure("floor", s.miss_floor);
    c.require(s.min_miss >= s.miss_floor, "min off-origin miss >= calibrated floor (" + s.variant + ")");
    c.require(s.newton_runs == 16 * 17, "16 x 17 Newton runs (" + s.variant + ")");
    c.require(s.trivial_runs == s.newton_runs, "all Newton runs trivial (" + s.variant + ")");
  }
  for (const auto& v : r.verdicts)
    c.require(v.classification == "certified-non-bifurcating", "verdict certified (" + v.variant + ")");
}

void criterion6(Criterion& c, const Report& r) {
  const ConformalMetric m(sig_new, rho_new);
  const Trajectory g = integrate_geodesic(m, Point::Zero(), Vector3(0, 0, 1 / std::sqrt(pi)), full, tight);
  const double E = energy(m, g);
  c.measure("|E-1|", std::abs(E - 1));
  c.require(std::abs(E - 1) <= 1e-10, "E(gamma_0) = 1 within 1e-10");

  double worst = 0;
  for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const Point q(0, 0, z);
    const Vector3 ez = Vector3::UnitZ();
    worst = std::max(worst, (curvature(m, q, ez, Vector3::UnitX(), ez) - Vector3::UnitX()).norm());
    worst = std::max(worst, (curvature(m, q, ez, Vector3::UnitY(), ez) - Vector3::UnitY()).norm());
  }
  c.measure("curvature", worst);
  c.require(worst <= 1e-10, "R(e_z,e_x)e_z = e_x and R(e_z,e_y)e_z = e_y at 5 axis points");

  const ConjugateEntry* cp = first_conjugate(r, "geodesic", "none");
  c.require(cp != nullptr, "geodesic conjugate point found");
  if (cp) {
    c.measure("|t*-pi^1.5|", std::abs(cp->t_star - std::pow(pi, 1.5)));
    c.require(std::abs(cp->t_star - std::pow(pi, 1.5)) <= 1e-6, "t* = pi^{3/2} within 1e-6");
    const double dpos = std::hypot(cp->position[0], cp->position[1], cp->position[2] - pi);
    c.require(dpos <= 1e-6, "position (0,0,pi) within 1e-6");
  }
  for (const char* variant : {"derived", "printed"}) {
    bool found = false;
    for (const auto& v : r.verdicts) {
      if (v.variant != variant) continue;
      found = true;
      c.require(v.classification == "certified-non-bifurcating", std::string("verdict certified (") + variant + ")");
    }
    c.require(found, std::string("verdict present for ") + variant);
  }
}

void criterion7(Criterion& c) {
  const double r2 = std::sqrt(2.0);
  for (const auto& [name, m] : {std::pair{"new", ConformalMetric(sig_new, rho_new)},
                                std::pair{"mpp", ConformalMetric(sig_old, rho_old)}}) {
    const MechanicalSystem mech = mechanical_from_conformal(m, 0.0);
    const Trajectory p = integrate_pgeodesic(mech, Point::Zero(), Vector3(0, 0, r2), full, tight);
    const auto corr = verify_correspondence(m, 0.0, p, 1e-8);
    c.measure(std::string("residual[") + name + "]", corr.max_residual);
    c.require(corr.max_residual <= 1e-8, std::string("correspondence residual <= 1e-8 (") + name + ")");
  }
  const ConformalMetric m(sig_new, rho_new);
  const auto geo = conjugate_points(m, Point::Zero(), Vector3(0, 0, 1 / std::sqrt(pi)), full, tight);
  const auto mech =
      conjugate_points(mechanical_from_conformal(m, 0.0), Point::Zero(), Vector3(0, 0, r2), full, tight);
  c.require(!geo.empty() && !mech.empty(), "both pictures have a conjugate point");
  if (geo.empty() || mech.empty()) return;
  const double d = (geo[0].position - mech[0].position).norm();
  c.measure("position gap", d);
  c.require(d <= 1e-6, "conjugate positions agree within 1e-6");
  c.require((geo[0].position - Point(0, 0, pi)).norm() <= 1e-6, "common position (0,0,pi)");
}

void criterion8(Criterion& c) {
  const std::vector<ScalarField> catalog{v_old, v_new, rho_old, rho_new, ScalarField::exp2(rho_old.as_polynomial()),
                                         ScalarField::exp2(rho_new.as_polynomial())};
  // exact vs finite-difference partials on the 5x5x5 grid
  double fd_worst = 0;
  for (const auto& f : catalog)
    for (Axis a : kAxes) {
      const ScalarField df = partial(f, a);
      for (int i = 0; i < 125; ++i) {
        const Point q(-1 + 0.5 * (i / 25), -1 + 0.5 * (i / 5 % 5), -1 + 0.5 * (i % 5));
        Point qp = q, qm = q;
        qp[index(a)] += 1e-4;
        qm[index(a)] -= 1e-4;
        const double exact = df(q);
        fd_worst = std::max(fd_worst, std::abs(exact - (f(qp) - f(qm)) / 2e-4) / (1 + std::abs(exact)));
      }
    }
  c.measure("fd", fd_worst);
  c.require(fd_worst <= 1e-6, "partials match central differences");

  // energy conservation
  double drift = 0;
  for (const auto& sys : {MechanicalSystem(sig_old, v_old), MechanicalSystem(sig_new, v_new),
                          mechanical_from_conformal(ConformalMetric(sig_new, rho_new), 0.0)}) {
    const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), Vector3(0.15, -0.1, 1), full, tight);
    const double e0 = mechanical_energy(sys, tr, 0);
    drift = std::max(drift, sup_over(0, 2 * pi, 500, [&](double t) { return std::abs(mechanical_energy(sys, tr, t) - e0); }));
  }
  c.measure("energy drift", drift);
  c.require(drift <= 1e-9, "energy conserved within 1e-9");

  // RK4 order
  const auto rhs = [](double, const StateVec<2>& y, StateVec<2>& dy) { dy << y[1], -y[0]; };
  const auto err = [&](int n) { return std::abs(integrate_rk4<2>(rhs, 0.0, StateVec<2>(0, 1), 2 * pi, n)[0]); };
  const double factor = err(100) / err(200);
  c.measure("rk4 factor", factor);
  c.require(factor >= 12 && factor <= 20, "RK4 halving factor in [12, 20]");

  // variational flow vs finite differences
  const MechanicalSystem np(sig_new, v_new);
  const Vector3 v0(0.1, -0.05, 1.0);
  const auto flow = variational_flow(np, Point::Zero(), v0, full, tight);
  double flow_worst = 0;
  for (double t : {0.5, 1.5, 2.5, 4.0, 5.5})
    for (int j = 0; j < 3; ++j) {
      Vector3 vp = v0, vm = v0;
      vp[j] += 1e-5;
      vm[j] -= 1e-5;
      const Vector3 fd = (integrate_pgeodesic(np, Point::Zero(), vp, {0, t}, tight).position(t) -
                          integrate_pgeodesic(np, Point::Zero(), vm, {0, t}, tight).position(t)) /
                         2e-5;
      flow_worst = std::max(flow_worst, (flow.M(t).col(j) - fd).norm());
    }
  c.measure("flow", flow_worst);
  c.require(flow_worst <= 1e-6, "variational flow matches finite differences");

  // Bianchi
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto rv = [&] { return Vector3(u(gen), u(gen), u(gen)); };
  double bianchi = 0;
  for (const auto& m : {ConformalMetric(sig_new, rho_new), ConformalMetric(sig_old, rho_old)})
    for (int n = 0; n < 50; ++n) {
      const Point q = rv();
      const Vector3 X = rv(), Y = rv(), Z = rv();
      const Vector3 r = curvature(m, q, X, Y, Z);
      bianchi = std::max(bianchi, (r + curvature(m, q, Y, Z, X) + curvature(m, q, Z, X, Y)).norm() / (1 + r.norm()));
    }
  c.measure("bianchi", bianchi);
  c.require(bianchi <= 1e-10, "first Bianchi identity within 1e-10");

  // determinism
  const bool same = to_json(run_scenario("new-perturbed")) == to_json(run_scenario("new-perturbed")) &&
                    to_json(run_scenario("mpp-perturbed")) == to_json(run_scenario("mpp-perturbed"));
  c.require(same, "byte-identical reports");
}

}  // namespace

int main() {
  const Report new_perturbed = run_scenario("new-perturbed");
  const Report new_conformal = run_scenario("new-conformal");

  const std::vector<std::pair<const char*, std::function<void(Criterion&)>>> criteria{
      {"conjugate point of mpp-perturbed at pi, multiplicity 2", criterion1},
      {"explicit families u_alpha, v_alpha and isochronous branches", criterion2},
      {"reduced mpp-conformal equation: t* and branch toward pi/sqrt(2)", criterion3},
      {"flaw witness: mpp certificate vanishes on (0.3 sin t, 0, t)", criterion4},
      {"new-perturbed certified non-bifurcating", [&](Criterion& c) { criterion5(c, new_perturbed); }},
      {"new-conformal energy, curvature, conjugate point, verdicts", [&](Criterion& c) { criterion6(c, new_conformal); }},
      {"cross-formulation coherence", criterion7},
      {"numerical hygiene", criterion8},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Criterion c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    failed += !c.passed();
    std::printf("criterion %zu: %s  %s  [%s]\n", i + 1, c.passed() ? "PASS" : "FAIL", criteria[i].first,
                c.summary().c_str());
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
