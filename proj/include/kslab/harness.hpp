#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kslab/analysis.hpp"
#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/dynamics.hpp"

namespace kslab {

enum ExitCode : int { kExitOk = 0, kExitInvariant = 1, kExitConfig = 2, kExitRuntime = 3 };

struct InvariantReport {
  double mass_drift = 0.0;
  double min_u = 0.0;
  double min_v = 0.0;
  double key_resid_scaled = 0.0;  // max key residual / ||u||_inf
  double key_bound = 0.0;         // 50 tol
  bool mass_ok = false;
  bool positivity_ok = false;
  bool key_ok = false;
  bool all() const { return mass_ok && positivity_ok && key_ok; }
};

InvariantReport check_invariants(const RunDiagnostics& d, double tol);

struct ScenarioResult {
  RunConfig config;
  SimulationResult sim;
  RunDiagnostics diag;
  Classification classification;
  LadderReport ladder;
  RatioReport ratio;
  EnvelopeCheckReport envelope;
  std::optional<EnergyInequalityReport> energy;  // families satisfying A1
  std::optional<KeyInequalityReport> key_inequality;  // A4 families with stored fields
  std::string key_inequality_error;
  InvariantReport invariants;
  double wall_seconds = 0.0;
  std::filesystem::path out_dir;

  int exit_code() const;
};

/// Runs the configured scenario in memory and evaluates every diagnostic.
ScenarioResult execute(const RunConfig& config);

/// execute() plus artifacts: diagnostics.csv, summary.txt, config.txt and
/// KSF1 snapshots when output.snapshots is set.
ScenarioResult run_scenario(const RunConfig& config);

/// output.dir, or <root>/run-<hash> with root from KSLAB_OUTPUT_ROOT
/// (default ./kslab-output).
std::filesystem::path output_dir_for(const RunConfig& config);

void write_summary(std::ostream& os, const ScenarioResult& r);

/// Short-horizon invariant suite: at most 100 steps of dt_init, with the
/// gamma(v^{n+1}) residual variant recorded.
ScenarioResult check_scenario(const RunConfig& config);

struct SweepSummary {
  std::size_t total = 0;
  std::size_t skipped = 0;  // already present in the results file
  std::size_t ran = 0;
  std::size_t failed = 0;   // rows with status Error
  std::filesystem::path results;
};

/// Appends one row per point to the results CSV in point order. Points whose
/// hash is already in the file are skipped, so a restarted sweep ends with the
/// same file as an uninterrupted one.
SweepSummary run_sweep(const SweepConfig& sweep, std::ostream* log = nullptr);

struct ScanOptions {
  double chi = 1.0;
  double tau = 1.0;
  double lo = 0.0;  // 0 selects 2 pi
  double hi = 0.0;  // 0 selects 16 pi
  int depth = 4;
  int n = 128;
  double side = 0.0;  // 0 selects 2 pi
  double t_end = 200.0;
  double record_interval = 0.5;
  double dt_max = 0.25;
  double width_cells = 4.0;
  /// Where the Gaussian sits: "center", "edge" (midpoint of the y = 0 side) or "corner".
  std::string placement = "center";
};

/// Canonical concentrated-Gaussian run used by the threshold scan.
RunConfig scan_config(const ScanOptions& opt, double mass);

struct ScanPoint {
  double mass = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  double log_slope = 0.0;
  double monotone_fraction = 0.0;
  RunStatus status = RunStatus::Completed;
  double wall_seconds = 0.0;
};

struct ScanReport {
  std::vector<ScanPoint> points;
  double lo = 0.0, hi = 0.0;
  double reference = 0.0;  // 4 pi / chi
  bool ok = false;
  std::string error;  // widen-bracket guidance when an endpoint misclassifies
  double midpoint() const { return 0.5 * (lo + hi); }
};

ScanReport threshold_scan(const ScanOptions& opt, std::ostream* log = nullptr);

}  // namespace kslab
