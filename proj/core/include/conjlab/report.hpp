#pragma once

// End-to-end run of a scenario and the resulting report. The report holds
// plain values only (no fields or trajectories) so it serializes losslessly.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "conjlab/scenario.hpp"

namespace conjlab {

using Triple = std::array<double, 3>;
using Pair = std::array<double, 2>;

struct EquationSet {
  std::string variant;                 // "derived" / "printed"
  std::string potential;               // rendered V
  std::array<std::string, 3> equations;  // "x'' + (...) = 0" etc.
  friend bool operator==(const EquationSet&, const EquationSet&) = default;
};

struct EnergyEntry {
  std::string name;
  double value = 0.0;
  friend bool operator==(const EnergyEntry&, const EnergyEntry&) = default;
};

struct ConjugateEntry {
  std::string picture;  // "p-geodesic", "geodesic" or "curvature"
  std::string variant;  // sign variant, "none" outside the mechanical picture
  double t_star = 0.0;
  int multiplicity = 0;
  Triple position{};
  friend bool operator==(const ConjugateEntry&, const ConjugateEntry&) = default;
};

struct BranchPointEntry {
  double alpha = 0.0;
  double T = 0.0;
  Pair w{};
  friend bool operator==(const BranchPointEntry&, const BranchPointEntry&) = default;
};

struct BranchEntry {
  std::string variant;
  double t_star = 0.0;
  Pair ray{};
  std::vector<BranchPointEntry> points;
  std::string error;  // empty when the branch was traced
  bool supports = false;
  friend bool operator==(const BranchEntry&, const BranchEntry&) = default;
};

struct CertificateEntry {
  std::string variant;
  std::string context;
  std::string kind;  // "mpp" / "new"
  double lambda = 0.0;
  double value = 0.0;
  double integrand_min = 0.0;
  friend bool operator==(const CertificateEntry&, const CertificateEntry&) = default;
};

struct ReductionEntry {
  std::string variant;
  std::string reduction;  // x F_y - y F_x, rendered
  bool semidefinite = false;
  bool definite = false;
  int sign = 0;
  int matches_weight = 0;  // +-1 when reduction == +-(weight * density)
  friend bool operator==(const ReductionEntry&, const ReductionEntry&) = default;
};

struct ScanEntry {
  std::string variant;
  double t_star = 0.0;
  Pair window{};
  double min_miss = 0.0;
  double min_miss_lambda = 0.0;
  double min_miss_radius = 0.0;
  double miss_floor = 0.0;
  bool floor_met = false;
  int newton_runs = 0;
  int trivial_runs = 0;
  int singular_runs = 0;
  int failed_runs = 0;
  int nontrivial = 0;
  double max_abs_certificate = 0.0;  // over nontrivial Newton solutions
  friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

/// Miss-map samples of one scan; written to CSV but kept out of the JSON.
struct ScanGrid {
  std::string variant;
  double t_star = 0.0;
  std::vector<ScanSample> samples;
};

struct VerdictEntry {
  std::string variant;
  double t_star = 0.0;  // mechanical-picture parameter
  Triple position{};
  std::string classification;
  std::string note;
  friend bool operator==(const VerdictEntry&, const VerdictEntry&) = default;
};

struct CheckEntry {
  std::string name;
  double value = 0.0;
  friend bool operator==(const CheckEntry&, const CheckEntry&) = default;
};

struct ToleranceEntry {
  std::string name;
  double value = 0.0;
  friend bool operator==(const ToleranceEntry&, const ToleranceEntry&) = default;
};

struct Report {
  std::string scenario;
  std::string title;
  std::string kind;
  std::string tool_version;
  std::string primary_variant;  // variant whose results fill the CSV bundle
  std::vector<ToleranceEntry> tolerances;
  std::vector<EquationSet> equations;
  std::vector<EnergyEntry> energies;
  std::vector<ConjugateEntry> conjugate_points;
  std::vector<BranchEntry> branches;
  std::vector<CertificateEntry> certificates;
  std::vector<ReductionEntry> reductions;
  std::vector<ScanEntry> scans;
  std::vector<VerdictEntry> verdicts;
  std::vector<CheckEntry> checks;
  std::vector<std::string> notes;

  std::vector<ScanGrid> scan_grids;  // not serialized

  /// Conjugate points of the primary picture: geodesic for conformal, p-geodesic otherwise.
  std::vector<ConjugateEntry> primary_conjugates() const;
};

/// Equality of the serialized content (scan grids are ignored).
bool same_content(const Report& a, const Report& b);

std::string tool_version();

/// Runs the full pipeline. Throws ScenarioError for unknown ids and ParseError for bad text.
Report run_scenario(std::string_view id_or_path, const std::vector<std::string>& overrides = {});
Report run_scenario(const Scenario& scenario);

std::string to_json(const Report& r);
Report report_from_json(std::string_view text);

enum class ReportFormat { json, csv_bundle };

/// Writes report.json or the CSV bundle into out_dir (created if needed) and returns the
/// written paths. I/O failures raise Error naming the path.
std::vector<std::filesystem::path> emit(const Report& r, ReportFormat format, const std::filesystem::path& out_dir);

}  // namespace conjlab
