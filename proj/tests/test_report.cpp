#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "conjlab/report.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace conjlab;
using namespace fixtures;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSmallScan{"scan_grid=16", "scan_lambda_samples=5", "scan_seeds=8"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> row(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conjlab_test_" + name);
  fs::remove_all(p);
  return p;
}

const VerdictEntry* verdict(const Report& r, const std::string& variant, double t_star) {
  for (const auto& v : r.verdicts)
    if (v.variant == variant && std::abs(v.t_star - t_star) <= 1e-6) return &v;
  return nullptr;
}

}  // namespace

TEST_CASE("old perturbed run") {
  const Report r = run_scenario("mpp-perturbed");
  CHECK(r.scenario == "mpp-perturbed");
  CHECK(r.tool_version == tool_version());
  const auto cps = r.primary_conjugates();
  REQUIRE(cps.size() == 1);
  CHECK(std::abs(cps[0].t_star - pi) <= 1e-8);
  CHECK(cps[0].multiplicity == 2);
  const VerdictEntry* v = verdict(r, "derived", pi);
  REQUIRE(v != nullptr);
  CHECK(v->classification == "bifurcating");
  int supporting = 0;
  for (const auto& b : r.branches) supporting += b.variant == "derived" && b.supports;
  CHECK(supporting == 2);
  REQUIRE(r.equations.size() == 2);
  CHECK(r.equations[0].equations[0].find("x''") != std::string::npos);
}

TEST_CASE("new perturbed run") {
  const Report r = run_scenario("new-perturbed");
  const auto cps = r.primary_conjugates();
  REQUIRE(cps.size() == 1);
  CHECK(std::abs(cps[0].t_star - pi) <= 1e-8);
  for (const auto& v : r.verdicts) CHECK(v.classification == "certified-non-bifurcating");
  for (const auto& s : r.scans) {
    CHECK(s.floor_met);
    CHECK(s.newton_runs == 16 * 17);
    CHECK(s.trivial_runs == s.newton_runs);
    CHECK(s.nontrivial == 0);
  }
  for (const auto& b : r.branches) CHECK(b.error.starts_with("plane not invariant"));
}

TEST_CASE("unknown scenario") {
  CHECK_THROWS_WITH_AS(run_scenario("bogus-name"),
                       "unknown scenario 'bogus-name'; available: mpp-perturbed mpp-conformal new-perturbed new-conformal",
                       ScenarioError);
}

TEST_CASE("bad overrides surface as parse errors") {
  CHECK_THROWS_AS(run_scenario("new-perturbed", {"scan_grid=abc"}), ParseError);
}

TEST_CASE("json round trip and determinism") {
  const Report a = run_scenario("new-perturbed");
  const Report b = run_scenario("new-perturbed");
  const std::string ja = to_json(a);
  CHECK(ja == to_json(b));
  const Report back = report_from_json(ja);
  CHECK(same_content(back, a));
  CHECK(to_json(back) == ja);
  CHECK(ja.back() == '\n');
  for (const char* key : {"\"scenario\"", "\"tool_version\"", "\"tolerances\"", "\"equations\"", "\"energies\"",
                          "\"conjugate_points\"", "\"branches\"", "\"certificates\"", "\"verdicts\""})
    CHECK(ja.find(key) != std::string::npos);
  // Shortest round-trip digits: pi survives exactly.
  CHECK(ja.find("3.141592653544077") != std::string::npos);

  const Report c = run_scenario("mpp-perturbed");
  CHECK(to_json(c) == to_json(run_scenario("mpp-perturbed")));
  CHECK(same_content(report_from_json(to_json(c)), c));
}

TEST_CASE("non-finite values survive serialization") {
  Report r;
  r.scenario = "x";
  r.checks.push_back({"inf", std::numeric_limits<double>::infinity()});
  r.checks.push_back({"ninf", -std::numeric_limits<double>::infinity()});
  r.checks.push_back({"nan", std::numeric_limits<double>::quiet_NaN()});
  const Report back = report_from_json(to_json(r));
  REQUIRE(back.checks.size() == 3);
  CHECK(std::isinf(back.checks[0].value));
  CHECK(back.checks[1].value < 0);
  CHECK(std::isnan(back.checks[2].value));
  CHECK_THROWS(report_from_json("{ not json"));
}

TEST_CASE("emit: json") {
  const Report r = run_scenario("mpp-perturbed");
  const fs::path dir = scratch("json");
  const auto written = emit(r, ReportFormat::json, dir);
  REQUIRE(written.size() == 1);
  CHECK(written[0] == dir / "report.json");
  CHECK(slurp(written[0]) == to_json(r));
  fs::remove_all(dir);
}

TEST_CASE("emit: csv bundle of an empty report has headers only") {
  const fs::path dir = scratch("empty");
  const auto written = emit(Report{}, ReportFormat::csv_bundle, dir);
  CHECK(lines(dir / "conjugates.csv") == std::vector<std::string>{"t_star,multiplicity,pos_x,pos_y,pos_z"});
  CHECK(lines(dir / "scan.csv") == std::vector<std::string>{"lambda,angle,radius,miss_norm"});
  for (const auto& p : written) CHECK(fs::exists(p));
  fs::remove_all(dir);
}

TEST_CASE("emit: old conformal branch files") {
  const Report r = run_scenario("mpp-conformal", kSmallScan);
  const fs::path dir = scratch("mpp_conformal");
  emit(r, ReportFormat::csv_bundle, dir);
  const auto bx = lines(dir / "branch_1_0.csv");
  REQUIRE(bx.size() == 6);
  CHECK(bx[0] == "alpha,T_alpha");
  const auto alpha05 = row(bx[4]);
  CHECK(alpha05[0] == 0.05);
  // Independent DOP853 value of the first return time at alpha = 0.05.
  CHECK(std::abs(alpha05[1] - 2.2224836519429876) <= 1e-8);
  CHECK(alpha05[1] > pi / std::sqrt(2.0));
  CHECK(fs::exists(dir / "branch_0_1.csv"));

  const auto sc = lines(dir / "scan.csv");
  CHECK(sc[0] == "lambda,angle,radius,miss_norm");
  CHECK(sc.size() > 1);

  // Energies of the printed curve and of its rescaling.
  double e = 0, e_rescaled = 0;
  for (const auto& en : r.energies) {
    if (en.name == "E(gamma_0)") e = en.value;
    if (en.name == "E(rescaled gamma_0)") e_rescaled = en.value;
  }
  CHECK(e == doctest::Approx(2 * pi).epsilon(1e-10));
  CHECK(e_rescaled == doctest::Approx(1.0).epsilon(1e-10));
  fs::remove_all(dir);
}

TEST_CASE("emit: new conformal conjugates") {
  const Report r = run_scenario("new-conformal", kSmallScan);
  const fs::path dir = scratch("new_conformal");
  emit(r, ReportFormat::csv_bundle, dir);
  const auto cj = lines(dir / "conjugates.csv");
  REQUIRE(cj.size() == 2);
  const auto v = row(cj[1]);
  CHECK(std::abs(v[0] - std::pow(pi, 1.5)) <= 1e-6);
  CHECK(v[1] == 2);
  CHECK(std::abs(v[2]) <= 1e-6);
  CHECK(std::abs(v[3]) <= 1e-6);
  CHECK(std::abs(v[4] - pi) <= 1e-6);
  for (const auto& b : r.branches) CHECK_FALSE(b.error.empty());
  fs::remove_all(dir);
}

TEST_CASE("emit: i/o failures name the path") {
  const fs::path blocker = scratch("blocker");
  { std::ofstream(blocker) << "file, not a directory"; }
  try {
    emit(Report{}, ReportFormat::json, blocker / "sub");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  fs::remove(blocker);
}
