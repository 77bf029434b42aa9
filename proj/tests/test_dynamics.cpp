#include <cmath>

#include "conjlab/dynamics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace conjlab;
using namespace fixtures;

namespace {

const Tolerance tight{1e-12, 1e-12};
const Interval full{0.0, 2 * pi};

double sup_over(const Trajectory& tr, int n, const std::function<double(double)>& f) {
  double worst = 0;
  for (int i = 0; i <= n; ++i) worst = std::max(worst, f(tr.start() + tr.interval().length() * i / n));
  return worst;
}

}  // namespace

TEST_CASE("trajectory sampling invariants") {
  const Trajectory tr = integrate_pgeodesic(new_perturbed(), Point::Zero(), Vector3(0.2, -0.1, 1), full, tight);
  CHECK(tr.start() == 0.0);
  CHECK(tr.end() == 2 * pi);
  const auto s = tr.samples();
  REQUIRE(s.size() == tr.steps() + 1);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t > s[i - 1].t);
  // Dense output between nodes agrees with a direct integration to that time.
  for (double t : {0.37, 1.91, 4.4}) {
    const Trajectory direct = integrate_pgeodesic(new_perturbed(), Point::Zero(), Vector3(0.2, -0.1, 1), {0, t}, tight);
    CHECK((tr.position(t) - direct.position(t)).norm() <= 1e-9);
    CHECK((tr.velocity(t) - direct.velocity(t)).norm() <= 1e-9);
  }
}

TEST_CASE("p-geodesic examples") {
  const auto sys = mpp_perturbed();
  SUBCASE("explicit family u_alpha") {
    const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), Vector3(0.3, 0, 1), full, tight);
    CHECK(sup_over(tr, 2000, [&](double t) { return (tr.position(t) - Point(0.3 * std::sin(t), 0, t)).norm(); }) <=
          1e-9);
  }
  SUBCASE("axis solution") {
    const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), Vector3(0, 0, 1), full, tight);
    CHECK(sup_over(tr, 500, [&](double t) { return (tr.position(t) - Point(0, 0, t)).norm(); }) <= 1e-12);
  }
  SUBCASE("energy drift on the new potential") {
    const auto np = new_perturbed();
    const Trajectory tr = integrate_pgeodesic(np, Point::Zero(), Vector3(0, 0, 1), full, tight);
    const double e0 = mechanical_energy(np, tr, 0);
    CHECK(sup_over(tr, 500, [&](double t) { return std::abs(mechanical_energy(np, tr, t) - e0); }) <= 1e-10);
  }
}

TEST_CASE("energy is conserved along random p-geodesics") {
  Rng rng(41);
  const std::vector<MechanicalSystem> systems{mpp_perturbed(), new_perturbed(),
                                              mechanical_from_conformal(mpp_metric(), 0.0),
                                              mechanical_from_conformal(new_metric(), 0.0)};
  for (const auto& sys : systems) {
    for (int n = 0; n < 4; ++n) {
      const Vector3 v0(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.5, 1.5));
      const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), v0, full, tight);
      const double e0 = mechanical_energy(sys, tr, 0);
      CHECK(sup_over(tr, 400, [&](double t) { return std::abs(mechanical_energy(sys, tr, t) - e0); }) <= 1e-9);
    }
  }
}

TEST_CASE("geodesic examples") {
  const auto m = new_metric();
  SUBCASE("axis geodesic of the new conformal metric") {
    const double c = 1 / std::sqrt(pi);
    const Trajectory tr = integrate_geodesic(m, Point::Zero(), Vector3(0, 0, c), full, tight);
    CHECK(sup_over(tr, 500, [&](double t) { return (tr.position(t) - Point(0, 0, c * t)).norm(); }) <= 1e-10);
    CHECK((tr.position(2 * pi) - Point(0, 0, 2 * std::sqrt(pi))).norm() <= 1e-10);
    CHECK(energy(m, tr) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("flat metric gives straight lines") {
    const ConformalMetric flat(sig_new(), ScalarField());
    const Vector3 v(0.4, -1.0, 0.3);
    const Trajectory tr = integrate_geodesic(flat, Point(1, 2, 3), v, {0, 3}, tight);
    CHECK(sup_over(tr, 100, [&](double t) { return (tr.position(t) - (Point(1, 2, 3) + t * v)).norm(); }) <= 1e-12);
    // Flat energy of a straight line: 1/2 g0(v, v) L.
    CHECK(energy(flat, tr) == doctest::Approx(0.5 * sig_new().inner(v, v) * 3).epsilon(1e-12));
  }
}

TEST_CASE("g-speed is constant along random conformal geodesics") {
  Rng rng(43);
  for (const auto& m : {new_metric(), mpp_metric()}) {
    for (int n = 0; n < 4; ++n) {
      const Vector3 v0(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.3, 1.0));
      const Trajectory tr = integrate_geodesic(m, Point::Zero(), v0, full, tight);
      const auto speed = [&](double t) { return m.inner(tr.position(t), tr.velocity(t), tr.velocity(t)); };
      const double s0 = speed(0);
      CHECK(sup_over(tr, 400, [&](double t) { return std::abs(speed(t) - s0); }) <= 1e-9);
    }
  }
}

TEST_CASE("mechanical energy of the conformal axis") {
  const auto sys = mechanical_from_conformal(new_metric(), 0.0);
  const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), Vector3(0, 0, std::sqrt(2.0)), full, tight);
  for (double t : {0.0, 1.0, 2.2, 6.0}) CHECK(std::abs(mechanical_energy(sys, tr, t)) <= 1e-12);
  const MechanicalSystem free(sig_old(), ScalarField());
  const Trajectory line = integrate_pgeodesic(free, Point::Zero(), Vector3(1, 2, 3), {0, 1}, tight);
  CHECK(mechanical_energy(free, line, 0.5) == doctest::Approx(0.5 * (1 - 4 + 9)));
}

TEST_CASE("residuals of analytic curves") {
  const auto sys = mpp_perturbed();
  const auto u = [](double a) {
    return sample_curve([a](double t) { return Point(a * std::sin(t), 0, t); },
                        [a](double t) { return Vector3(-a * std::sin(t), 0, 0); }, full, 1000);
  };
  const auto v = [](double a) {
    return sample_curve([a](double t) { return Point(0, a * std::sin(t), t); },
                        [a](double t) { return Vector3(0, -a * std::sin(t), 0); }, full, 1000);
  };
  CHECK(residual_pgeodesic(sys, u(0.7)) <= 1e-12);
  CHECK(residual_pgeodesic(sys, v(1.3)) <= 1e-12);
  // A non-solution is detected.
  const auto bent = sample_curve([](double t) { return Point(0.5 * std::sin(2 * t), 0, t); },
                                 [](double t) { return Vector3(-2 * std::sin(2 * t), 0, 0); }, full, 1000);
  CHECK(residual_pgeodesic(sys, bent) > 0.1);
  const MechanicalSystem free(sig_new(), ScalarField());
  const auto line = sample_curve([](double t) { return Point(t, 2 * t, -t); }, [](double) { return Vector3::Zero(); },
                                 full, 50);
  CHECK(residual_pgeodesic(free, line) == 0.0);
}

TEST_CASE("mechanical_from_conformal") {
  const auto m = new_metric();
  const auto sys = mechanical_from_conformal(m, 0.0);
  CHECK(sys.potential() == -ScalarField::exp2(rho_new().as_polynomial()));
  CHECK(sys.signature() == m.signature());
  const auto flat = mechanical_from_conformal(ConformalMetric(sig_new(), ScalarField()), 0.0);
  CHECK(flat.potential() == ScalarField(-1.0));
  const auto shifted = mechanical_from_conformal(m, 2.5);
  for_grid([&](const Point& q) {
    CHECK(sys.potential_at(q) < 0.0);
    CHECK(shifted.potential_at(q) < 2.5);
    CHECK(2.5 - shifted.potential_at(q) == doctest::Approx(m.factor_at(q)).epsilon(1e-14));
  });
}

TEST_CASE("verify_correspondence") {
  const double r2 = std::sqrt(2.0);
  SUBCASE("flat") {
    const ConformalMetric flat(sig_new(), ScalarField());
    const auto sys = mechanical_from_conformal(flat, 0.0);
    const Trajectory p = integrate_pgeodesic(sys, Point::Zero(), Vector3(0, 0, r2), full, tight);
    const auto rep = verify_correspondence(flat, 0.0, p, 1e-8);
    CHECK(rep.max_residual == 0.0);
    for (std::size_t i = 1; i < rep.samples.size(); ++i) CHECK(rep.samples[i].s > rep.samples[i - 1].s);
    for (const auto& s : rep.samples) CHECK(std::abs(s.q.z() - s.s) <= 1e-10);
  }
  SUBCASE("axis p-geodesics of both conformal metrics") {
    for (const auto& m : {new_metric(), mpp_metric()}) {
      const auto sys = mechanical_from_conformal(m, 0.0);
      const Trajectory p = integrate_pgeodesic(sys, Point::Zero(), Vector3(0, 0, r2), full, tight);
      const auto rep = verify_correspondence(m, 0.0, p, 1e-8);
      CHECK(rep.max_residual <= 1e-8);
      CHECK(rep.time_at(pi / r2) == doctest::Approx(pi).epsilon(1e-10));
      CHECK(p.position(pi / r2).z() == doctest::Approx(pi).epsilon(1e-10));
    }
  }
  SUBCASE("energy mismatch") {
    const auto m = new_metric();
    const auto sys = mechanical_from_conformal(m, 0.0);
    const Trajectory p = integrate_pgeodesic(sys, Point::Zero(), Vector3(0, 0, 1), full, tight);
    CHECK_THROWS_AS(verify_correspondence(m, 0.0, p, 1e-8), GeometryError);
  }
}

TEST_CASE("fixed-step RK4 is fourth order") {
  const auto f = [](double, const StateVec<2>& y, StateVec<2>& dy) { dy << y[1], -y[0]; };
  const auto sup_error = [&](int steps) {
    double worst = 0;
    const double T = 2 * pi;
    StateVec<2> y(0.0, 1.0);
    const int chunks = 16;
    for (int c = 0; c < chunks; ++c) {
      y = integrate_rk4<2>(f, T * c / chunks, y, T * (c + 1) / chunks, steps / chunks);
      worst = std::max(worst, std::abs(y[0] - std::sin(T * (c + 1) / chunks)));
    }
    return worst;
  };
  for (int n : {64, 128, 256}) {
    const double factor = sup_error(n) / sup_error(2 * n);
    CHECK(factor >= 12.0);
    CHECK(factor <= 20.0);
  }
}

TEST_CASE("adaptive integrator meets its tolerance on a linear oscillator") {
  const auto f = [](double, const StateVec<2>& y, StateVec<2>& dy) { dy << y[1], -y[0]; };
  OdeOptions opt;
  opt.tol = {1e-12, 1e-12};
  const auto out = integrate_dense<2>(f, 0.0, StateVec<2>(0.0, 1.0), 10.0, opt);
  for (double t = 0; t <= 10; t += 0.01) CHECK(std::abs(out(t)[0] - std::sin(t)) <= 1e-10);
}

TEST_CASE("blow-up raises an integration error") {
  // x'' = 4 x^3 escapes to infinity in finite time.
  const MechanicalSystem sys(Signature(1, 1, 1), parse_field("(* -1 (^ x 4))"));
  CHECK_THROWS_AS(integrate_pgeodesic(sys, Point(1, 0, 0), Vector3(1, 0, 0), {0, 10}), IntegrationError);
}

TEST_CASE("simpson quadrature") {
  CHECK(simpson([](double t) { return t * t * t; }, 0, 2, 2) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(simpson([](double t) { return std::sin(t); }, 0, pi, quadrature_panels(pi)) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(quadrature_panels(2 * pi) >= 2048);
  CHECK(quadrature_panels(0.5) % 2 == 0);
}
