#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "conjlab/bifurcation.hpp"
#include "conjlab/expression.hpp"
#include "conjlab/scenario.hpp"

using namespace conjlab;

namespace {

constexpr double pi = std::numbers::pi;

const Scenario& new_conformal() {
  static const Scenario s = builtin_scenario("new-conformal");
  return s;
}

void BM_FieldEval(benchmark::State& state) {
  const ScalarField f = new_conformal().system(SignVariant::derived).potential();
  Point q(0.1, -0.2, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(q));
    q.x() += 1e-9;
  }
}
BENCHMARK(BM_FieldEval);

void BM_GradientHessian(benchmark::State& state) {
  const MechanicalSystem sys = new_conformal().system(SignVariant::derived);
  Point q(0.1, -0.2, 0.3);
  Vector3 g;
  Matrix3 h;
  for (auto _ : state) {
    sys.gradient_and_hessian(q, g, h);
    benchmark::DoNotOptimize(h);
    q.y() += 1e-9;
  }
}
BENCHMARK(BM_GradientHessian);

void BM_Curvature(benchmark::State& state) {
  const Scenario& s = new_conformal();
  const ConformalMetric m(s.signature, s.field);
  const Vector3 X(1, 0.5, -0.2), Y(0.3, 1, 0), Z(0, 0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(curvature(m, Point(0.1, 0.2, 0.3), X, Y, Z));
}
BENCHMARK(BM_Curvature);

void BM_IntegratePGeodesic(benchmark::State& state) {
  const MechanicalSystem sys = builtin_scenario("new-perturbed").system(SignVariant::derived);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const Trajectory tr = integrate_pgeodesic(sys, Point::Zero(), Vector3(0.1, 0.1, 1), {0, 2 * pi}, {tol, tol});
    benchmark::DoNotOptimize(tr.end());
    state.counters["steps"] = static_cast<double>(tr.steps());
  }
}
BENCHMARK(BM_IntegratePGeodesic)->Arg(8)->Arg(10)->Arg(12);

void BM_VariationalFlow(benchmark::State& state) {
  const Scenario& s = new_conformal();
  const ConformalMetric m(s.signature, s.field);
  for (auto _ : state) {
    const auto flow = variational_flow(m, Point::Zero(), s.v0, s.interval, {1e-12, 1e-12});
    benchmark::DoNotOptimize(flow.M(1.0));
  }
}
BENCHMARK(BM_VariationalFlow)->Unit(benchmark::kMillisecond);

void BM_ConjugatePoints(benchmark::State& state) {
  const Scenario& s = new_conformal();
  const ConformalMetric m(s.signature, s.field);
  const auto flow = variational_flow(m, Point::Zero(), s.v0, s.interval, {1e-12, 1e-12});
  for (auto _ : state) benchmark::DoNotOptimize(conjugate_points(flow));
}
BENCHMARK(BM_ConjugatePoints)->Unit(benchmark::kMillisecond);

void BM_MissMap(benchmark::State& state) {
  const MechanicalSystem sys = builtin_scenario("new-perturbed").system(SignVariant::derived);
  const ShotSetup setup;
  for (auto _ : state) benchmark::DoNotOptimize(miss_map(sys, setup, Vector2(0.1, 0.05), pi));
}
BENCHMARK(BM_MissMap);

void BM_Scan(benchmark::State& state) {
  const MechanicalSystem sys = builtin_scenario("new-perturbed").system(SignVariant::derived);
  ScanOptions opt;
  opt.grid = static_cast<int>(state.range(0));
  opt.miss_floor = 1e-7;
  const ShotSetup setup;
  for (auto _ : state) {
    const auto ev = nonbifurcation_scan(sys, setup, {pi - 0.3, pi + 0.3}, opt, CertificateVariant::definite_quartic,
                                        ScalarField(1.0));
    benchmark::DoNotOptimize(ev.min_miss);
  }
  state.SetItemsProcessed(state.iterations() * opt.lambda_samples * opt.grid * opt.grid);
}
BENCHMARK(BM_Scan)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
