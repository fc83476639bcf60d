#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kslab/dynamics.hpp"

namespace kslab {

inline constexpr int kLadderLevels = 8;  // ||w||_p for p = 2, 4, ..., 256

struct DiagnosticRecord {
  double t = 0.0;
  double dt = 0.0;  // step that produced this record; 0 for the initial record
  double mass = 0.0;
  double u_min = 0.0, u_max = 0.0;
  double v_min = 0.0, v_max = 0.0;
  double w_min = 0.0, w_max = 0.0;
  double uinf = 0.0;
  std::array<double, kLadderLevels> w_lp{};
  double energy = 0.0;       // sum w u h^d  (= |grad w|^2 + |w|^2 discretely)
  double dissipation = 0.0;  // sum u^2 gamma(v) h^d
  double energy_rhs = 0.0;   // sum w^2 / gamma(v) h^d
  double ratio_min = 0.0, ratio_max = 0.0;  // v / w
  double key_resid = 0.0;
  double w_growth = 1.0;  // max over cells of w / w0
};

/// Per accepted step, cheap scalars.
struct StepSample {
  double t = 0.0;
  double dt = 0.0;
  double key_resid = 0.0;
  double key_resid_variant = 0.0;  // gamma(v^{n+1}) instead of gamma(v^n); 0 unless requested
  double uinf = 0.0;
  double mass_drift = 0.0;  // relative to the initial mass
  double u_min = 0.0;
  double v_min = 0.0;
  double semigroup_excess = 0.0;  // max (w - z) / max z ; <= 0 means w <= z
  double w_growth = 1.0;
};

struct FieldRecord {
  double t = 0.0;
  Field u, v, w, w_t;
};

struct DiagnosticsOptions {
  SolveOptions solve;
  /// Steps between records when record_interval is 0.
  int cadence = 1;
  double record_interval = 0.0;
  double t_end = 0.0;
  bool variant_residual = false;
  bool keep_fields = false;
  /// Semigroup comparison z driven by gamma_upper * w with diffusion gamma_lower
  /// (meaningful for families with two-sided bounds). Disabled when unset.
  std::optional<std::pair<double, double>> semigroup_bounds;
};

struct RunDiagnostics {
  std::vector<DiagnosticRecord> records;
  std::vector<StepSample> steps;
  std::vector<FieldRecord> fields;
  double initial_mass = 0.0;
  double gamma_obs = 0.0;  // max of gamma(v) over every frozen coefficient of the run
  double max_key_resid = 0.0;
  double max_key_resid_scaled = 0.0;  // max key_resid / ||u||_inf
  double max_mass_drift = 0.0;
  double min_u = 0.0;
  double min_v = 0.0;
  double max_semigroup_excess = -INFINITY;
};

/// Observes a simulation and fills RunDiagnostics. Computes w^{n+1} with the
/// Helmholtz resolvent on every accepted step.
class DiagnosticsCollector : public StepObserver {
 public:
  DiagnosticsCollector(const LinOp& op, const MotilityFamily& gamma, DiagnosticsOptions options);
  ~DiagnosticsCollector() override;

  void on_start(const State& s) override;
  void on_step(const State& prev, const State& next, const StepInfo& info) override;

  const RunDiagnostics& result() const noexcept { return diag_; }
  RunDiagnostics take() { return std::move(diag_); }

 private:
  DiagnosticRecord make_record(const State& s, const Field& w, double dt, double key_resid, double w_growth);
  bool due(const State& next, const StepInfo& info);

  const LinOp* op_;
  const MotilityFamily* gamma_;
  DiagnosticsOptions options_;
  RunDiagnostics diag_;
  std::unique_ptr<ShiftedSystem> helmholtz_;
  std::unique_ptr<ShiftedSystem> semigroup_;
  double semigroup_dt_ = -1.0;
  Field w_, w0_, w_next_, z_, z_next_;
  std::vector<double> buf_a_, buf_b_, rhs_;
  double next_record_t_ = 0.0;
};

/// Fixed header: t,dt,mass,u_min,u_max,v_min,v_max,w_min,w_max,uinf,w_l2,w_l4,w_l8,w_l16,
/// energy,dissipation,ratio_min,ratio_max,key_resid
extern const char* const kDiagnosticsHeader;
void write_diagnostics_csv(std::ostream& os, const RunDiagnostics& d);

}  // namespace kslab
