#include "conjlab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "conjlab/error.hpp"
#include "conjlab/expression.hpp"

namespace conjlab {

std::string_view to_string(SystemKind k) { return k == SystemKind::mechanical ? "mechanical" : "conformal"; }

std::string_view to_string(SignVariant v) { return v == SignVariant::derived ? "derived" : "printed"; }

// ---------------------------------------------------------------------------
// Scenario

MechanicalSystem Scenario::system(SignVariant v) const {
  if (v == SignVariant::printed && printed_potential) return MechanicalSystem(signature, *printed_potential);
  if (kind == SystemKind::mechanical) return MechanicalSystem(signature, field);
  return mechanical_from_conformal(ConformalMetric(signature, field), energy_level);
}

bool Scenario::printed_matches_derived() const {
  return !printed_potential || *printed_potential == system(SignVariant::derived).potential();
}

Vector3 Scenario::mechanical_velocity() const {
  if (mechanical_v0) return *mechanical_v0;
  if (kind == SystemKind::mechanical) return v0;
  // scale v0 so that 1/2 g0(v, v) + V(q0) = c
  const MechanicalSystem sys = system(SignVariant::derived);
  const double norm2 = signature.inner(v0, v0);
  const double kinetic = energy_level - sys.potential_at(q0);
  if (!(norm2 > 0.0) || !(kinetic > 0.0)) {
    throw ScenarioError("cannot rescale v0 to energy " + format_double(energy_level) + "; set mechanical_v0");
  }
  return v0 * std::sqrt(2.0 * kinetic / norm2);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  std::string_view text;
  std::size_t offset;  // within the value
};

std::vector<Token> split(std::string_view s, char sep = '\0') {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_sep = [sep](char c) { return std::isspace(static_cast<unsigned char>(c)) || (sep && c == sep); };
  while (i < s.size()) {
    while (i < s.size() && is_sep(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_sep(s[i])) ++i;
    if (i > start) out.push_back({s.substr(start, i - start), start});
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class ValueReader {
 public:
  ValueReader(std::string key, std::string_view value, std::size_t offset)
      : key_(std::move(key)), value_(value), offset_(offset) {}

  [[noreturn]] void fail(const std::string& what, std::size_t at = 0) const {
    throw ParseError("key '" + key_ + "': " + what, offset_ + at);
  }

  double number(const Token& t) const {
    double v = 0.0;
    const char* end = t.text.data() + t.text.size();
    auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail("expected a number, got '" + std::string(t.text) + "'", t.offset);
    return v;
  }

  std::vector<double> numbers(std::size_t count = 0) const {
    std::vector<double> out;
    for (const auto& t : split(value_)) out.push_back(number(t));
    if (count && out.size() != count) fail("expected " + std::to_string(count) + " numbers");
    if (out.empty()) fail("expected at least one number");
    return out;
  }

  double scalar() const { return numbers(1).front(); }

  int integer() const {
    const double v = scalar();
    if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer");
    return static_cast<int>(v);
  }

  Vector3 vector3() const {
    const auto v = numbers(3);
    return {v[0], v[1], v[2]};
  }

  ScalarField field() const {
    try {
      return parse_field(value_);
    } catch (const ParseError& e) {
      std::string what = e.what();
      const auto cut = what.rfind(" at position ");
      if (cut != std::string::npos) what.resize(cut);
      fail(what, e.position());
    }
  }

  Signature signature() const {
    const auto toks = split(value_);
    if (toks.size() != 3) fail("expected three signs");
    int e[3];
    for (int i = 0; i < 3; ++i) {
      const auto t = toks[static_cast<std::size_t>(i)].text;
      if (t == "+" || t == "+1" || t == "1") {
        e[i] = 1;
      } else if (t == "-" || t == "-1") {
        e[i] = -1;
      } else {
        fail("signs must be +1 or -1", toks[static_cast<std::size_t>(i)].offset);
      }
    }
    return Signature(e[0], e[1], e[2]);
  }

  Tolerance tolerance() const {
    const auto v = numbers();
    if (v.size() > 2) fail("expected rtol [atol]");
    const Tolerance t{v[0], v.size() == 2 ? v[1] : v[0]};
    if (!(t.rtol > 0.0) || !(t.atol > 0.0)) fail("tolerances must be positive");
    return t;
  }

  std::vector<Vector2> rays() const {
    if (trim(value_) == "none") return {};
    std::vector<Vector2> out;
    std::size_t start = 0;
    while (start <= value_.size()) {
      std::size_t end = value_.find(',', start);
      if (end == std::string_view::npos) end = value_.size();
      const ValueReader part(key_, value_.substr(start, end - start), offset_ + start);
      const auto v = part.numbers(2);
      const Vector2 r(v[0], v[1]);
      if (r.norm() == 0.0) part.fail("ray must be nonzero");
      out.push_back(r);
      start = end + 1;
    }
    return out;
  }

  std::string_view text() const { return value_; }

 private:
  std::string key_;
  std::string_view value_;
  std::size_t offset_;
};

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

std::string vec3(const Vector3& v) { return join({v.x(), v.y(), v.z()}); }

std::string tolerance_text(const Tolerance& t) { return join({t.rtol, t.atol}); }

using Setter = std::function<void(Scenario&, const ValueReader&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"id",
       [](Scenario& s, const ValueReader& r) {
         s.id = std::string(trim(r.text()));
         if (s.id.empty()) r.fail("id must not be empty");
       }},
      {"title", [](Scenario& s, const ValueReader& r) { s.title = std::string(trim(r.text())); }},
      {"kind",
       [](Scenario& s, const ValueReader& r) {
         const auto t = trim(r.text());
         if (t == "mechanical") {
           s.kind = SystemKind::mechanical;
         } else if (t == "conformal") {
           s.kind = SystemKind::conformal;
         } else {
           r.fail("kind must be mechanical or conformal");
         }
       }},
      {"signature", [](Scenario& s, const ValueReader& r) { s.signature = r.signature(); }},
      {"potential", [](Scenario& s, const ValueReader& r) { s.field = r.field(); }},
      {"rho",
       [](Scenario& s, const ValueReader& r) {
         s.field = r.field();
         if (!s.field.is_polynomial()) r.fail("rho must be a polynomial");
       }},
      {"printed_potential",
       [](Scenario& s, const ValueReader& r) {
         if (trim(r.text()) == "none") {
           s.printed_potential.reset();
         } else {
           s.printed_potential = r.field();
         }
       }},
      {"energy_level", [](Scenario& s, const ValueReader& r) { s.energy_level = r.scalar(); }},
      {"q0", [](Scenario& s, const ValueReader& r) { s.q0 = r.vector3(); }},
      {"v0", [](Scenario& s, const ValueReader& r) { s.v0 = r.vector3(); }},
      {"interval",
       [](Scenario& s, const ValueReader& r) {
         const auto v = r.numbers(2);
         if (!(v[1] > v[0])) r.fail("interval must satisfy a < b");
         s.interval = {v[0], v[1]};
       }},
      {"mechanical_v0",
       [](Scenario& s, const ValueReader& r) {
         if (trim(r.text()) == "auto") {
           s.mechanical_v0.reset();
         } else {
           s.mechanical_v0 = r.vector3();
         }
       }},
      {"rescaled_v0",
       [](Scenario& s, const ValueReader& r) {
         if (trim(r.text()) == "none") {
           s.rescaled_v0.reset();
         } else {
           s.rescaled_v0 = r.vector3();
         }
       }},
      {"certificate",
       [](Scenario& s, const ValueReader& r) {
         try {
           s.certificate = certificate_variant_from_string(trim(r.text()));
         } catch (const std::exception&) {
           r.fail("certificate must be mpp or new");
         }
       }},
      {"certificate_weight", [](Scenario& s, const ValueReader& r) { s.certificate_weight = r.field(); }},
      {"branch_rays", [](Scenario& s, const ValueReader& r) { s.branch_rays = r.rays(); }},
      {"branch_alphas",
       [](Scenario& s, const ValueReader& r) {
         const auto v = r.numbers();
         for (std::size_t i = 0; i < v.size(); ++i) {
           if (!(v[i] > 0.0) || (i && !(v[i] < v[i - 1]))) r.fail("alphas must be positive and strictly decreasing");
         }
         s.branch_alphas = v;
       }},
      {"branch_half_width",
       [](Scenario& s, const ValueReader& r) {
         s.branch_half_width = r.scalar();
         if (!(s.branch_half_width > 0.0)) r.fail("must be positive");
       }},
      {"scan_half_width",
       [](Scenario& s, const ValueReader& r) {
         s.scan.half_width = r.scalar();
         if (!(s.scan.half_width > 0.0)) r.fail("must be positive");
       }},
      {"scan_lambda_samples", [](Scenario& s, const ValueReader& r) { s.scan.lambda_samples = r.integer(); }},
      {"scan_radius", [](Scenario& s, const ValueReader& r) { s.scan.radius = r.scalar(); }},
      {"scan_grid", [](Scenario& s, const ValueReader& r) { s.scan.grid = r.integer(); }},
      {"scan_seeds", [](Scenario& s, const ValueReader& r) { s.scan.seeds = r.integer(); }},
      {"scan_seed_radius", [](Scenario& s, const ValueReader& r) { s.scan.seed_radius = r.scalar(); }},
      {"miss_floor", [](Scenario& s, const ValueReader& r) { s.scan.miss_floor = r.scalar(); }},
      {"trivial_radius", [](Scenario& s, const ValueReader& r) { s.scan.trivial_radius = r.scalar(); }},
      {"newton_tol",
       [](Scenario& s, const ValueReader& r) {
         s.scan.newton.tol = r.scalar();
         if (!(s.scan.newton.tol > 0.0)) r.fail("must be positive");
       }},
      {"newton_max_iter", [](Scenario& s, const ValueReader& r) { s.scan.newton.max_iter = r.integer(); }},
      {"tol", [](Scenario& s, const ValueReader& r) { s.tol = r.tolerance(); }},
      {"scan_tol", [](Scenario& s, const ValueReader& r) { s.scan_tol = r.tolerance(); }},
      {"sign_variant",
       [](Scenario& s, const ValueReader& r) {
         const auto t = trim(r.text());
         if (t == "derived") {
           s.sign_variants = {SignVariant::derived};
         } else if (t == "printed") {
           s.sign_variants = {SignVariant::printed};
         } else if (t == "both") {
           s.sign_variants = {SignVariant::derived, SignVariant::printed};
         } else {
           r.fail("sign_variant must be printed, derived or both");
         }
       }},
      {"notes",
       [](Scenario& s, const ValueReader& r) {
         s.notes.clear();
         std::string_view rest = r.text();
         while (!rest.empty()) {
           const auto cut = rest.find(';');
           const auto note = trim(rest.substr(0, cut));
           if (!note.empty()) s.notes.emplace_back(note);
           if (cut == std::string_view::npos) break;
           rest.remove_prefix(cut + 1);
         }
       }},
  };
  return table;
}

void set_key(Scenario& s, std::string_view key, std::size_t key_offset, std::string_view value,
             std::size_t value_offset) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ParseError("unknown key '" + std::string(key) + "'", key_offset);
  it->second(s, ValueReader(std::string(key), value, value_offset));
}

void validate(const Scenario& s, const std::set<std::string, std::less<>>& seen) {
  for (const char* key : {"id", "kind", "signature", "q0", "v0", "interval"}) {
    if (!seen.contains(key)) throw ScenarioError("scenario is missing key '" + std::string(key) + "'");
  }
  const bool mech = s.kind == SystemKind::mechanical;
  if (mech && !seen.contains("potential")) throw ScenarioError("mechanical scenario needs 'potential'");
  if (!mech && !seen.contains("rho")) throw ScenarioError("conformal scenario needs 'rho'");
  if (seen.contains(mech ? "rho" : "potential")) {
    throw ScenarioError(std::string("'") + (mech ? "rho" : "potential") + "' does not apply to a " +
                        std::string(to_string(s.kind)) + " scenario");
  }
  if (!mech && !s.field.is_polynomial()) throw ScenarioError("rho must be a polynomial");
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!trim(line).empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("expected 'key = value'", pos + line.find_first_not_of(" \t\r"));
      }
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) throw ParseError("missing key before '='", pos + eq);
      const std::size_t key_at = pos + line.find_first_not_of(" \t\r");
      if (seen.contains(key)) throw ParseError("duplicate key '" + key + "'", key_at);
      set_key(s, key, key_at, line.substr(eq + 1), pos + eq + 1);
      seen.insert(key);
    }
    pos = eol + 1;
  }
  validate(s, seen);
  return s;
}

void apply_override(Scenario& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ScenarioError("override must look like key=value: '" + std::string(assignment) + "'");
  const std::string key(trim(assignment.substr(0, eq)));
  if (key == "id" || key == "kind") throw ScenarioError("'" + key + "' cannot be overridden");
  const bool mech = s.kind == SystemKind::mechanical;
  if ((key == "rho" && mech) || (key == "potential" && !mech)) {
    throw ScenarioError("'" + key + "' does not apply to a " + std::string(to_string(s.kind)) + " scenario");
  }
  try {
    set_key(s, key, assignment.find_first_not_of(" \t"), assignment.substr(eq + 1), eq + 1);
  } catch (const ParseError& e) {
    std::string what = e.what();
    what.erase(what.rfind(" at position "));
    throw ParseError("override '" + std::string(assignment) + "': " + what, e.position());
  }
}

std::string render_scenario(const Scenario& s) {
  std::ostringstream out;
  auto line = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  line("id", s.id);
  if (!s.title.empty()) line("title", s.title);
  line("kind", std::string(to_string(s.kind)));
  line("signature", join({double(s.signature[0]), double(s.signature[1]), double(s.signature[2])}));
  line(s.kind == SystemKind::mechanical ? "potential" : "rho", render_field(s.field));
  if (s.printed_potential) line("printed_potential", render_field(*s.printed_potential));
  if (s.kind == SystemKind::conformal) line("energy_level", format_double(s.energy_level));
  line("q0", vec3(s.q0));
  line("v0", vec3(s.v0));
  line("interval", join({s.interval.a, s.interval.b}));
  if (s.mechanical_v0) line("mechanical_v0", vec3(*s.mechanical_v0));
  if (s.rescaled_v0) line("rescaled_v0", vec3(*s.rescaled_v0));
  line("certificate", std::string(to_string(s.certificate)));
  line("certificate_weight", render_field(s.certificate_weight));
  {
    std::string rays;
    for (std::size_t i = 0; i < s.branch_rays.size(); ++i) {
      rays += (i ? ", " : "") + join({s.branch_rays[i].x(), s.branch_rays[i].y()});
    }
    line("branch_rays", rays.empty() ? "none" : rays);
  }
  line("branch_alphas", join(s.branch_alphas));
  line("branch_half_width", format_double(s.branch_half_width));
  line("scan_half_width", format_double(s.scan.half_width));
  line("scan_lambda_samples", std::to_string(s.scan.lambda_samples));
  line("scan_radius", format_double(s.scan.radius));
  line("scan_grid", std::to_string(s.scan.grid));
  line("scan_seeds", std::to_string(s.scan.seeds));
  line("scan_seed_radius", format_double(s.scan.seed_radius));
  line("miss_floor", format_double(s.scan.miss_floor));
  line("trivial_radius", format_double(s.scan.trivial_radius));
  line("newton_tol", format_double(s.scan.newton.tol));
  line("newton_max_iter", std::to_string(s.scan.newton.max_iter));
  line("tol", tolerance_text(s.tol));
  line("scan_tol", tolerance_text(s.scan_tol));
  line("sign_variant", s.sign_variants.size() == 2 ? "both" : std::string(to_string(s.sign_variants.front())));
  if (!s.notes.empty()) {
    std::string notes;
    for (std::size_t i = 0; i < s.notes.size(); ++i) notes += (i ? "; " : "") + s.notes[i];
    line("notes", notes);
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

constexpr std::string_view kMppPerturbed = R"(# Flat metric of signature (+,-,+) perturbed by a potential with a sextic
# coupling. Both transverse axes carry exact families alpha sin(t).
id = mpp-perturbed
title = perturbed flat metric with mixed sextic coupling
kind = mechanical
signature = + - +
potential = (+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* 1/3 (^ x 3) (^ y 3)))
q0 = 0 0 0
v0 = 0 0 1
interval = 0 6.283185307179586
certificate = mpp
certificate_weight = 1
branch_rays = 1 0, 0 1
branch_alphas = 0.4 0.2 0.1 0.05 0.025
miss_floor = 1e-7
)";

constexpr std::string_view kMppConformal = R"(# Conformal metric e^{2 rho} g0 over signature (+,-,+). The axis curve is
# studied through its energy-0 mechanical picture V = -e^{2 rho}; the
# typeset equations coincide with the derived ones.
id = mpp-conformal
title = conformally flat metric with mixed sextic exponent
kind = conformal
signature = + - +
rho = (+ (* 1/2 (^ y 2)) (* -1/2 (^ x 2)) (* 1/3 (^ x 3) (^ y 3)))
printed_potential = (* -1 (exp2 (+ (* 1/2 (^ y 2)) (* -1/2 (^ x 2)) (* 1/3 (^ x 3) (^ y 3)))))
energy_level = 0
q0 = 0 0 0
v0 = 0 0 1.4142135623730951
interval = 0 6.283185307179586
# same curve normalized to energy 1 on the interval
rescaled_v0 = 0 0 0.5641895835477563
certificate = mpp
certificate_weight = (* 2 (exp2 (+ (* 1/2 (^ y 2)) (* -1/2 (^ x 2)) (* 1/3 (^ x 3) (^ y 3)))))
branch_rays = 1 0, 0 1
branch_alphas = 0.4 0.2 0.1 0.05 0.025
miss_floor = 1e-7
notes = exploratory: the verdict concerns p-geodesics of the energy-0 mechanical picture; bifurcation of the conformal geodesics themselves is not established; the typeset integral identity carries the weight e^{rho}, the reduction of the equations gives 2 e^{2 rho}, which is used here; the axis curve (0,0,sqrt(2) t) has energy 2 pi on [0, 2 pi]; rescaled to energy 1 it keeps the conjugate position (0,0,pi) but no longer reaches (0,0,2 pi)
)";

constexpr std::string_view kNewPerturbed = R"(# Minkowski metric (-,+,+) perturbed by a potential whose cross-Wronskian
# reduction is the definite quartic x^4 + y^4 + 6 x^2 y^2.
id = new-perturbed
title = perturbed Minkowski metric with definite quartic certificate
kind = mechanical
signature = - + +
potential = (+ (* -1/2 (^ x 2)) (* 1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))
q0 = 0 0 0
v0 = 0 0 1
interval = 0 6.283185307179586
certificate = new
certificate_weight = 1
branch_rays = 1 0, 0 1
branch_alphas = 0.4 0.2 0.1 0.05 0.025
miss_floor = 1e-7
)";

constexpr std::string_view kNewConformal = R"(# Conformal metric e^{2 rho} g_M over Minkowski (-,+,+); base geodesic
# (0, 0, t / sqrt(pi)) of energy 1 on [0, 2 pi]. The typeset mechanical
# equations carry the opposite sign of grad(-e^{2 rho}), i.e. V = +e^{2 rho}.
id = new-conformal
title = conformally flat Minkowski metric with definite quartic certificate
kind = conformal
signature = - + +
rho = (+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))
printed_potential = (exp2 (+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3))))
energy_level = 0
q0 = 0 0 0
v0 = 0 0 0.5641895835477563
interval = 0 6.283185307179586
certificate = new
certificate_weight = (* 2 (exp2 (+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))))
branch_rays = 1 0, 0 1
branch_alphas = 0.4 0.2 0.1 0.05 0.025
miss_floor = 5e-8
notes = the typeset mechanical equations equal the derived ones with every potential term negated, i.e. p-geodesics of V = +e^{2 rho}; the axis then has no conjugate point, and the scan is run at the parameter of the geodesic conjugate point; the cross-Wronskian reduction is +-2 e^{2 rho} (x^4 + y^4 + 6 x^2 y^2) under both signs
)";

}  // namespace

const std::vector<std::string>& builtin_ids() {
  static const std::vector<std::string> ids{"mpp-perturbed", "mpp-conformal", "new-perturbed", "new-conformal"};
  return ids;
}

namespace {

std::string unknown_message(std::string_view id) {
  std::string msg = "unknown scenario '" + std::string(id) + "'; available:";
  for (const auto& b : builtin_ids()) msg += " " + b;
  return msg;
}

}  // namespace

std::string_view builtin_text(std::string_view id) {
  if (id == "mpp-perturbed") return kMppPerturbed;
  if (id == "mpp-conformal") return kMppConformal;
  if (id == "new-perturbed") return kNewPerturbed;
  if (id == "new-conformal") return kNewConformal;
  throw ScenarioError(unknown_message(id));
}

Scenario builtin_scenario(std::string_view id) { return parse_scenario(builtin_text(id)); }

Scenario load_scenario(std::string_view id_or_path) {
  const auto& ids = builtin_ids();
  if (std::find(ids.begin(), ids.end(), id_or_path) != ids.end()) return builtin_scenario(id_or_path);
  std::ifstream in{std::string(id_or_path)};
  if (!in) throw ScenarioError(unknown_message(id_or_path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace conjlab
