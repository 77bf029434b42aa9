#pragma once

// Scenario definitions. A scenario is plain text made of `key = value` lines;
// `#` starts a comment. Field-valued keys use the prefix expression grammar of
// expression.hpp. The four built-in scenarios are stored in the same format.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conjlab/bifurcation.hpp"
#include "conjlab/geometry.hpp"

namespace conjlab {

enum class SystemKind { mechanical, conformal };
enum class SignVariant { derived, printed };

std::string_view to_string(SystemKind k);
std::string_view to_string(SignVariant v);

struct Scenario {
  std::string id;
  std::string title;
  SystemKind kind = SystemKind::mechanical;
  Signature signature{1, 1, 1};

  /// Potential V for mechanical scenarios, conformal exponent rho otherwise.
  ScalarField field;
  /// Potential whose raised gradient gives the equations as typeset. Empty when
  /// they agree with the derived ones (grad V, or grad(c - e^{2 rho})).
  std::optional<ScalarField> printed_potential;
  double energy_level = 0.0;  // c of the mechanical picture of a conformal scenario

  Point q0 = Point::Zero();
  Vector3 v0{0.0, 0.0, 1.0};
  Interval interval{0.0, 1.0};  // also the conjugate search window
  /// Initial velocity of the mechanical-picture base; defaults to v0 rescaled to energy c.
  std::optional<Vector3> mechanical_v0;
  /// A second initial velocity whose geodesic energy is reported alongside.
  std::optional<Vector3> rescaled_v0;

  CertificateVariant certificate = CertificateVariant::definite_quartic;
  ScalarField certificate_weight{1.0};

  std::vector<Vector2> branch_rays;
  std::vector<double> branch_alphas = kDefaultBranchAlphas;
  double branch_half_width = 0.5;

  ScanOptions scan;
  Tolerance tol{1e-12, 1e-12};
  Tolerance scan_tol{1e-10, 1e-12};
  std::vector<SignVariant> sign_variants{SignVariant::derived, SignVariant::printed};
  /// Free-text remarks copied into the report; `;` separates them in scenario text.
  std::vector<std::string> notes;

  /// Mechanical system of a sign variant: V itself, or c - e^{2 rho}, or the printed potential.
  MechanicalSystem system(SignVariant v) const;
  /// True when the printed equations coincide with the derived ones.
  bool printed_matches_derived() const;
  /// Initial velocity of the base in the mechanical picture.
  Vector3 mechanical_velocity() const;
};

/// Parses scenario text. Throws ParseError (byte offset into `text`) or ScenarioError.
Scenario parse_scenario(std::string_view text);

/// Applies one `key=value` assignment on top of a parsed scenario.
void apply_override(Scenario& s, std::string_view assignment);

/// Canonical text; parse_scenario(render_scenario(s)) renders identically.
std::string render_scenario(const Scenario& s);

const std::vector<std::string>& builtin_ids();
std::string_view builtin_text(std::string_view id);
Scenario builtin_scenario(std::string_view id);

/// A built-in id or the path of a scenario file. Unknown ids list the built-ins.
Scenario load_scenario(std::string_view id_or_path);

}  // namespace conjlab
