#include "conjlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "conjlab/dynamics.hpp"
#include "conjlab/error.hpp"
#include "conjlab/expression.hpp"
#include "conjlab/variational.hpp"

#ifndef CONJLAB_VERSION
#define CONJLAB_VERSION "0.0.0"
#endif

namespace conjlab {

using json = nlohmann::ordered_json;

std::string tool_version() { return std::string("conjlab ") + CONJLAB_VERSION; }

std::vector<ConjugateEntry> Report::primary_conjugates() const {
  const std::string picture = kind == "conformal" ? "geodesic" : "p-geodesic";
  std::vector<ConjugateEntry> out;
  for (const auto& c : conjugate_points) {
    if (c.picture != picture) continue;
    if (picture == "p-geodesic" && c.variant != primary_variant) continue;
    out.push_back(c);
  }
  return out;
}

bool same_content(const Report& a, const Report& b) {
  return a.scenario == b.scenario && a.title == b.title && a.kind == b.kind && a.tool_version == b.tool_version &&
         a.primary_variant == b.primary_variant && a.tolerances == b.tolerances && a.equations == b.equations &&
         a.energies == b.energies && a.conjugate_points == b.conjugate_points && a.branches == b.branches &&
         a.certificates == b.certificates && a.reductions == b.reductions && a.scans == b.scans &&
         a.verdicts == b.verdicts && a.checks == b.checks && a.notes == b.notes;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

Triple triple(const Vector3& v) { return {v.x(), v.y(), v.z()}; }
Pair pair(const Vector2& v) { return {v.x(), v.y()}; }

std::string ray_text(const Vector2& r) { return "(" + format_double(r.x()) + ", " + format_double(r.y()) + ")"; }

EquationSet equations_of(const MechanicalSystem& sys, SignVariant v) {
  EquationSet e;
  e.variant = std::string(to_string(v));
  e.potential = render_field(sys.potential());
  static constexpr const char* names[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    const ScalarField& f = sys.gradient()[static_cast<std::size_t>(i)];
    e.equations[static_cast<std::size_t>(i)] =
        std::string(names[i]) + "''" + (f == ScalarField(0.0) ? "" : " + " + render_field(f)) + " = 0";
  }
  return e;
}

struct Target {
  double t_star;  // mechanical parameter
  Point position;
};

class Pipeline {
 public:
  explicit Pipeline(const Scenario& sc) : sc_(sc) {}

  Report run() {
    r_.scenario = sc_.id;
    r_.title = sc_.title;
    r_.kind = std::string(to_string(sc_.kind));
    r_.tool_version = tool_version();
    const bool has_derived =
        std::find(sc_.sign_variants.begin(), sc_.sign_variants.end(), SignVariant::derived) != sc_.sign_variants.end();
    primary_ = has_derived ? SignVariant::derived : SignVariant::printed;
    r_.primary_variant = std::string(to_string(primary_));
    record_tolerances();
    for (SignVariant v : {SignVariant::derived, SignVariant::printed}) r_.equations.push_back(equations_of(sc_.system(v), v));
    r_.notes = sc_.notes;
    r_.notes.push_back(sc_.printed_matches_derived() ? "typeset equations coincide with the derived ones"
                                                     : "typeset equations differ from the derived ones; see equations");

    mech_v_ = sc_.mechanical_velocity();
    if (sc_.kind == SystemKind::conformal) {
      conformal_stage();
    } else {
      mechanical_stage();
    }
    bifurcation_stage();
    return std::move(r_);
  }

 private:
  void record_tolerances() {
    const ConjugateSearch search;
    const ScanOptions& s = sc_.scan;
    r_.tolerances = {
        {"rtol", sc_.tol.rtol},
        {"atol", sc_.tol.atol},
        {"scan_rtol", sc_.scan_tol.rtol},
        {"scan_atol", sc_.scan_tol.atol},
        {"conjugate_bisection", search.bisection_tol},
        {"conjugate_rank", search.rank_tol},
        {"newton_tol", s.newton.tol},
        {"newton_fd_step", s.newton.fd_step},
        {"newton_condition_limit", s.newton.condition_limit},
        {"miss_floor", s.miss_floor},
        {"trivial_radius", s.trivial_radius},
        {"branch_return_bisection", 1e-10},
    };
  }

  void add_conjugates(const std::vector<ConjugatePoint>& cps, const std::string& picture, const std::string& variant) {
    for (const auto& c : cps) r_.conjugate_points.push_back({picture, variant, c.t_star, c.multiplicity, triple(c.position)});
  }

  void mechanical_stage() {
    for (SignVariant v : variants_to_compute()) {
      const MechanicalSystem sys = sc_.system(v);
      const VariationalFlow flow = variational_flow(sys, sc_.q0, sc_.v0, sc_.interval, sc_.tol);
      const auto cps = conjugate_points(flow);
      add_conjugates(cps, "p-geodesic", std::string(to_string(v)));
      std::vector<Target> targets;
      for (const auto& c : cps) targets.push_back({c.t_star, c.position});
      targets_[v] = targets;

      if (v != primary_) continue;
      const Trajectory& base = flow.base();
      const double e0 = mechanical_energy(sys, base, sc_.interval.a);
      double drift = 0.0;
      const int n = quadrature_panels(sc_.interval.length());
      for (int k = 0; k <= n; ++k) {
        const double t = sc_.interval.a + sc_.interval.length() * k / n;
        drift = std::max(drift, std::abs(mechanical_energy(sys, base, t) - e0));
      }
      r_.energies.push_back({"mechanical energy", e0});
      r_.checks.push_back({"energy drift", drift});
    }
    // printed variants that coincide share the derived results
    if (variants_to_compute().size() < sc_.sign_variants.size()) {
      add_conjugates_copy(SignVariant::derived, SignVariant::printed);
    }
  }

  void add_conjugates_copy(SignVariant from, SignVariant to) {
    const std::string f(to_string(from)), t(to_string(to));
    std::vector<ConjugateEntry> copies;
    for (const auto& c : r_.conjugate_points) {
      if (c.variant == f && c.picture == "p-geodesic") {
        auto copy = c;
        copy.variant = t;
        copies.push_back(copy);
      }
    }
    r_.conjugate_points.insert(r_.conjugate_points.end(), copies.begin(), copies.end());
    targets_[to] = targets_[from];
  }

  void conformal_stage() {
    const ConformalMetric metric(sc_.signature, sc_.field);
    const VariationalFlow flow = variational_flow(metric, sc_.q0, sc_.v0, sc_.interval, sc_.tol);
    const Trajectory& geo = flow.base();
    const auto cps = conjugate_points(flow);
    add_conjugates(cps, "geodesic", "none");
    r_.energies.push_back({"E(gamma_0)", energy(metric, geo)});

    if (sc_.rescaled_v0) {
      const VariationalFlow rescaled = variational_flow(metric, sc_.q0, *sc_.rescaled_v0, sc_.interval, sc_.tol);
      r_.energies.push_back({"E(rescaled gamma_0)", energy(metric, rescaled.base())});
      add_conjugates(conjugate_points(rescaled), "geodesic (rescaled)", "none");
    }

    try {
      const Matrix3 A = jacobi_coefficients(metric, geo, sc_.interval.a);
      double spread = 0.0;
      for (int k = 1; k <= 8; ++k) {
        const double t = sc_.interval.a + sc_.interval.length() * k / 8.0;
        spread = std::max(spread, (jacobi_coefficients(metric, geo, t) - A).cwiseAbs().maxCoeff());
      }
      r_.checks.push_back({"curvature Jacobi matrix variation", spread});
      if (spread <= 1e-12) {
        auto analytic = conjugate_points_constant(A, sc_.interval);
        for (auto& c : analytic) c.position = geo.position(c.t_star);
        add_conjugates(analytic, "curvature", "none");
      }
    } catch (const GeometryError& e) {
      r_.notes.push_back(std::string("curvature form of the Jacobi equation unavailable: ") + e.what());
    }

    // mechanical picture over the same stretch of the axis
    const double ratio = sc_.v0.norm() / mech_v_.norm();
    const Interval mech{sc_.interval.a, sc_.interval.a + sc_.interval.length() * ratio};
    std::vector<Target> targets;
    for (const auto& c : cps) {
      targets.push_back({sc_.interval.a + (c.position - sc_.q0).norm() / mech_v_.norm(), c.position});
    }
    for (SignVariant v : variants_to_compute()) {
      const VariationalFlow pflow = variational_flow(sc_.system(v), sc_.q0, mech_v_, mech, sc_.tol);
      add_conjugates(conjugate_points(pflow), "p-geodesic", std::string(to_string(v)));
      targets_[v] = targets;
    }

    // Jacobi's theorem checked on the derived mechanical picture
    const MechanicalSystem derived = sc_.system(SignVariant::derived);
    const VariationalFlow pflow = variational_flow(derived, sc_.q0, mech_v_, mech, sc_.tol);
    r_.energies.push_back({"mechanical energy", mechanical_energy(derived, pflow.base(), mech.a)});
    try {
      const auto corr = verify_correspondence(metric, sc_.energy_level, pflow.base(), 1e-9);
      r_.checks.push_back({"correspondence residual", corr.max_residual});
      r_.checks.push_back({"correspondence energy deviation", corr.energy_deviation});
    } catch (const GeometryError& e) {
      r_.notes.push_back(std::string("correspondence not verified: ") + e.what());
    }
    const auto pcps = conjugate_points(pflow);
    for (std::size_t k = 0; k < cps.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pcps) best = std::min(best, (p.position - cps[k].position).norm());
      r_.checks.push_back({"conjugate position mismatch " + std::to_string(k + 1), best});
    }
    if (variants_to_compute().size() < sc_.sign_variants.size()) {
      add_conjugates_copy(SignVariant::derived, SignVariant::printed);
    }
  }

  /// Variants that need their own computation; a printed variant equal to the derived one is shared.
  std::vector<SignVariant> variants_to_compute() const {
    std::vector<SignVariant> out;
    for (SignVariant v : sc_.sign_variants) {
      if (v == SignVariant::printed && sc_.sign_variants.size() == 2 && sc_.printed_matches_derived()) continue;
      out.push_back(v);
    }
    return out;
  }

  void bifurcation_stage() {
    if (mech_v_.x() != 0.0 || mech_v_.y() != 0.0) {
      r_.notes.push_back("bifurcation analysis skipped: the base is not directed along the z axis");
      return;
    }
    for (SignVariant v : variants_to_compute()) variant_bifurcation(v);
    if (variants_to_compute().size() < sc_.sign_variants.size()) {
      // shared results, relabeled
      const std::string d(to_string(SignVariant::derived)), p(to_string(SignVariant::printed));
      auto relabel = [&](auto& vec) {
        const std::size_t n = vec.size();
        for (std::size_t i = 0; i < n; ++i) {
          if (vec[i].variant != d) continue;
          auto copy = vec[i];
          copy.variant = p;
          vec.push_back(copy);
        }
      };
      relabel(r_.branches);
      relabel(r_.certificates);
      relabel(r_.reductions);
      relabel(r_.scans);
      relabel(r_.verdicts);
      relabel(r_.scan_grids);
    }
  }

  void variant_bifurcation(SignVariant v) {
    const std::string name(to_string(v));
    const MechanicalSystem sys = sc_.system(v);
    const ShotSetup setup{sc_.q0, mech_v_.z(), sc_.tol};
    const ShotSetup scan_setup{sc_.q0, mech_v_.z(), sc_.scan_tol};

    const CertificateReduction red = reduce_certificate(sys);
    r_.reductions.push_back({name, render_field(red.reduction), red.semidefinite, red.definite, red.sign,
                             reduction_matches(red, sc_.certificate_weight, sc_.certificate)});

    for (const Target& target : targets_[v]) {
      std::vector<Branch> branches;
      for (const Vector2& ray : sc_.branch_rays) {
        BranchEntry entry;
        entry.variant = name;
        entry.t_star = target.t_star;
        entry.ray = pair(ray);
        const Interval window{std::max(0.0, target.t_star - sc_.branch_half_width), target.t_star + sc_.branch_half_width};
        try {
          Branch b = trace_branch(sys, setup, ray, sc_.branch_alphas, window);
          for (const auto& p : b.points) entry.points.push_back({p.alpha, p.T, pair(p.w)});
          entry.supports = branch_supports(b, target.t_star);
          const BranchPoint& last = b.points.back();
          const Trajectory traj = shoot(sys, setup, last.w, last.T);
          const Certificate cert = certificate_integral(sc_.certificate, sc_.certificate_weight, traj, last.T);
          r_.certificates.push_back({name, "branch " + ray_text(ray) + " alpha=" + format_double(last.alpha),
                                     std::string(to_string(cert.variant)), cert.lambda, cert.value,
                                     cert.integrand_min});
          branches.push_back(std::move(b));
        } catch (const BranchError& e) {
          entry.error = e.what();
        }
        r_.branches.push_back(std::move(entry));
      }

      const Interval window{target.t_star - sc_.scan.half_width, target.t_star + sc_.scan.half_width};
      const ScanEvidence ev =
          nonbifurcation_scan(sys, scan_setup, window, sc_.scan, sc_.certificate, sc_.certificate_weight);
      ScanEntry s;
      s.variant = name;
      s.t_star = target.t_star;
      s.window = {window.a, window.b};
      s.min_miss = ev.min_miss;
      s.min_miss_lambda = ev.min_miss_lambda;
      s.min_miss_radius = ev.min_miss_radius;
      s.miss_floor = sc_.scan.miss_floor;
      s.floor_met = ev.floor_met;
      for (const auto& run : ev.newton) {
        ++s.newton_runs;
        if (run.trivial) ++s.trivial_runs;
        if (run.result.status == ShootStatus::singular_family) ++s.singular_runs;
        if (run.result.status == ShootStatus::no_convergence) ++s.failed_runs;
      }
      s.nontrivial = static_cast<int>(ev.nontrivial.size());
      for (const auto& n : ev.nontrivial) s.max_abs_certificate = std::max(s.max_abs_certificate, std::abs(n.contradiction_margin));
      r_.scans.push_back(s);
      r_.scan_grids.push_back({name, target.t_star, ev.samples});

      std::string note;
      const Classification c = classify({target.t_star, &branches, &ev, &red}, note);
      r_.verdicts.push_back({name, target.t_star, triple(target.position), std::string(to_string(c)), note});
    }
  }

  const Scenario& sc_;
  Report r_;
  SignVariant primary_ = SignVariant::derived;
  Vector3 mech_v_;
  std::map<SignVariant, std::vector<Target>> targets_;
};

}  // namespace

Report run_scenario(const Scenario& scenario) { return Pipeline(scenario).run(); }

Report run_scenario(std::string_view id_or_path, const std::vector<std::string>& overrides) {
  Scenario sc = load_scenario(id_or_path);
  for (const auto& o : overrides) apply_override(sc, o);
  return run_scenario(sc);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

// JSON has no inf/nan; they travel as strings
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error("invalid report JSON: expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

template <std::size_t N>
json arr(const std::array<double, N>& a) {
  json j = json::array();
  for (double v : a) j.push_back(num(v));
  return j;
}

template <std::size_t N>
std::array<double, N> get_arr(const json& j) {
  std::array<double, N> a{};
  if (!j.is_array() || j.size() != N) throw Error("invalid report JSON: expected an array of " + std::to_string(N));
  for (std::size_t i = 0; i < N; ++i) a[i] = get_num(j[i]);
  return a;
}

template <class T, class F>
json list(const std::vector<T>& v, F&& f) {
  json j = json::array();
  for (const auto& e : v) j.push_back(f(e));
  return j;
}

template <class T, class F>
std::vector<T> get_list(const json& j, F&& f) {
  std::vector<T> out;
  for (const auto& e : j) out.push_back(f(e));
  return out;
}

}  // namespace

std::string to_json(const Report& r) {
  json j;
  j["scenario"] = r.scenario;
  j["title"] = r.title;
  j["kind"] = r.kind;
  j["tool_version"] = r.tool_version;
  j["primary_variant"] = r.primary_variant;
  j["tolerances"] = list(r.tolerances, [](const ToleranceEntry& t) { return json{{"name", t.name}, {"value", num(t.value)}}; });
  j["equations"] = list(r.equations, [](const EquationSet& e) {
    return json{{"variant", e.variant}, {"potential", e.potential}, {"equations", e.equations}};
  });
  j["energies"] = list(r.energies, [](const EnergyEntry& e) { return json{{"name", e.name}, {"value", num(e.value)}}; });
  j["conjugate_points"] = list(r.conjugate_points, [](const ConjugateEntry& c) {
    return json{{"picture", c.picture},
                {"variant", c.variant},
                {"t_star", num(c.t_star)},
                {"multiplicity", c.multiplicity},
                {"position", arr(c.position)}};
  });
  j["branches"] = list(r.branches, [](const BranchEntry& b) {
    return json{{"variant", b.variant},
                {"t_star", num(b.t_star)},
                {"ray", arr(b.ray)},
                {"points", list(b.points,
                                [](const BranchPointEntry& p) {
                                  return json{{"alpha", num(p.alpha)}, {"T", num(p.T)}, {"w", arr(p.w)}};
                                })},
                {"error", b.error},
                {"supports", b.supports}};
  });
  j["certificates"] = list(r.certificates, [](const CertificateEntry& c) {
    return json{{"variant", c.variant},     {"context", c.context}, {"kind", c.kind},
                {"lambda", num(c.lambda)}, {"value", num(c.value)}, {"integrand_min", num(c.integrand_min)}};
  });
  j["reductions"] = list(r.reductions, [](const ReductionEntry& e) {
    return json{{"variant", e.variant},   {"reduction", e.reduction}, {"semidefinite", e.semidefinite},
                {"definite", e.definite}, {"sign", e.sign},           {"matches_weight", e.matches_weight}};
  });
  j["scans"] = list(r.scans, [](const ScanEntry& s) {
    return json{{"variant", s.variant},
                {"t_star", num(s.t_star)},
                {"window", arr(s.window)},
                {"min_miss", num(s.min_miss)},
                {"min_miss_lambda", num(s.min_miss_lambda)},
                {"min_miss_radius", num(s.min_miss_radius)},
                {"miss_floor", num(s.miss_floor)},
                {"floor_met", s.floor_met},
                {"newton_runs", s.newton_runs},
                {"trivial_runs", s.trivial_runs},
                {"singular_runs", s.singular_runs},
                {"failed_runs", s.failed_runs},
                {"nontrivial", s.nontrivial},
                {"max_abs_certificate", num(s.max_abs_certificate)}};
  });
  j["verdicts"] = list(r.verdicts, [](const VerdictEntry& v) {
    return json{{"variant", v.variant},
                {"t_star", num(v.t_star)},
                {"position", arr(v.position)},
                {"classification", v.classification},
                {"note", v.note}};
  });
  j["checks"] = list(r.checks, [](const CheckEntry& c) { return json{{"name", c.name}, {"value", num(c.value)}}; });
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("invalid report JSON: ") + e.what());
  }
  try {
    Report r;
    r.scenario = j.at("scenario").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.primary_variant = j.at("primary_variant").get<std::string>();
    r.tolerances = get_list<ToleranceEntry>(j.at("tolerances"), [](const json& e) {
      return ToleranceEntry{e.at("name").get<std::string>(), get_num(e.at("value"))};
    });
    r.equations = get_list<EquationSet>(j.at("equations"), [](const json& e) {
      return EquationSet{e.at("variant").get<std::string>(), e.at("potential").get<std::string>(),
                         e.at("equations").get<std::array<std::string, 3>>()};
    });
    r.energies = get_list<EnergyEntry>(j.at("energies"), [](const json& e) {
      return EnergyEntry{e.at("name").get<std::string>(), get_num(e.at("value"))};
    });
    r.conjugate_points = get_list<ConjugateEntry>(j.at("conjugate_points"), [](const json& e) {
      return ConjugateEntry{e.at("picture").get<std::string>(), e.at("variant").get<std::string>(),
                            get_num(e.at("t_star")), e.at("multiplicity").get<int>(), get_arr<3>(e.at("position"))};
    });
    r.branches = get_list<BranchEntry>(j.at("branches"), [](const json& e) {
      BranchEntry b;
      b.variant = e.at("variant").get<std::string>();
      b.t_star = get_num(e.at("t_star"));
      b.ray = get_arr<2>(e.at("ray"));
      b.points = get_list<BranchPointEntry>(e.at("points"), [](const json& p) {
        return BranchPointEntry{get_num(p.at("alpha")), get_num(p.at("T")), get_arr<2>(p.at("w"))};
      });
      b.error = e.at("error").get<std::string>();
      b.supports = e.at("supports").get<bool>();
      return b;
    });
    r.certificates = get_list<CertificateEntry>(j.at("certificates"), [](const json& e) {
      return CertificateEntry{e.at("variant").get<std::string>(), e.at("context").get<std::string>(),
                              e.at("kind").get<std::string>(),    get_num(e.at("lambda")),
                              get_num(e.at("value")),             get_num(e.at("integrand_min"))};
    });
    r.reductions = get_list<ReductionEntry>(j.at("reductions"), [](const json& e) {
      return ReductionEntry{e.at("variant").get<std::string>(), e.at("reduction").get<std::string>(),
                            e.at("semidefinite").get<bool>(),   e.at("definite").get<bool>(),
                            e.at("sign").get<int>(),            e.at("matches_weight").get<int>()};
    });
    r.scans = get_list<ScanEntry>(j.at("scans"), [](const json& e) {
      ScanEntry s;
      s.variant = e.at("variant").get<std::string>();
      s.t_star = get_num(e.at("t_star"));
      s.window = get_arr<2>(e.at("window"));
      s.min_miss = get_num(e.at("min_miss"));
      s.min_miss_lambda = get_num(e.at("min_miss_lambda"));
      s.min_miss_radius = get_num(e.at("min_miss_radius"));
      s.miss_floor = get_num(e.at("miss_floor"));
      s.floor_met = e.at("floor_met").get<bool>();
      s.newton_runs = e.at("newton_runs").get<int>();
      s.trivial_runs = e.at("trivial_runs").get<int>();
      s.singular_runs = e.at("singular_runs").get<int>();
      s.failed_runs = e.at("failed_runs").get<int>();
      s.nontrivial = e.at("nontrivial").get<int>();
      s.max_abs_certificate = get_num(e.at("max_abs_certificate"));
      return s;
    });
    r.verdicts = get_list<VerdictEntry>(j.at("verdicts"), [](const json& e) {
      return VerdictEntry{e.at("variant").get<std::string>(), get_num(e.at("t_star")), get_arr<3>(e.at("position")),
                          e.at("classification").get<std::string>(), e.at("note").get<std::string>()};
    });
    r.checks = get_list<CheckEntry>(j.at("checks"), [](const json& e) {
      return CheckEntry{e.at("name").get<std::string>(), get_num(e.at("value"))};
    });
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("invalid report JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Emission

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) row += (row.empty() ? "" : ",") + c;
  return row + "\n";
}

std::string ray_label(const Pair& r) {
  auto part = [](double v) {
    std::string s = format_double(v);
    std::replace(s.begin(), s.end(), '-', 'm');
    return s;
  };
  return part(r[0]) + "_" + part(r[1]);
}

}  // namespace

std::vector<std::filesystem::path> emit(const Report& r, ReportFormat format, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    write_file(path, content);
    written.push_back(path);
  };

  if (format == ReportFormat::json) {
    write("report.json", to_json(r));
    return written;
  }

  std::string conj = csv_row({"t_star", "multiplicity", "pos_x", "pos_y", "pos_z"});
  for (const auto& c : r.primary_conjugates()) {
    conj += csv_row({format_double(c.t_star), std::to_string(c.multiplicity), format_double(c.position[0]),
                     format_double(c.position[1]), format_double(c.position[2])});
  }
  write("conjugates.csv", conj);

  std::map<std::string, int> used;
  for (const auto& b : r.branches) {
    if (b.variant != r.primary_variant || !b.error.empty()) continue;
    const std::string label = ray_label(b.ray);
    const int k = used[label]++;
    std::string body = csv_row({"alpha", "T_alpha"});
    for (const auto& p : b.points) body += csv_row({format_double(p.alpha), format_double(p.T)});
    write("branch_" + label + (k ? "_" + std::to_string(k + 1) : "") + ".csv", body);
  }

  std::ostringstream scan;
  scan << csv_row({"lambda", "angle", "radius", "miss_norm"});
  for (const auto& g : r.scan_grids) {
    if (g.variant != r.primary_variant) continue;
    for (const auto& s : g.samples) {
      scan << csv_row({format_double(s.lambda), format_double(s.angle), format_double(s.radius), format_double(s.miss)});
    }
  }
  write("scan.csv", scan.str());
  return written;
}

}  // namespace conjlab
