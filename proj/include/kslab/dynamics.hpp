#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kslab/grid.hpp"
#include "kslab/linop.hpp"
#include "kslab/motility.hpp"
#include "kslab/solvers.hpp"

namespace kslab {

struct SimParams {
  double tau = 1.0;
  double dt_init = 1e-3;
  double dt_min = 1e-8;
  double dt_max = 0.1;
  double t_end = 1.0;
  /// Stop once ||u||_inf exceeds this; 0 selects 1e6 * ||u0||_inf.
  double u_max = 0.0;
  double tol = 1e-10;
  SolverKind solver = SolverKind::Direct;
  bool adaptive = true;
  /// Steps between diagnostic records (used when record_interval is 0).
  int cadence = 1;
  /// Simulated time between records; 0 means step cadence.
  double record_interval = 0.0;

  /// Throws ConfigError naming the first violated constraint.
  void validate(double u0_inf) const;
  double effective_u_max(double u0_inf) const { return u_max > 0.0 ? u_max : 1e6 * u0_inf; }

  bool operator==(const SimParams&) const = default;
};

struct State {
  double t = 0.0;
  Field u;
  Field v;
};

enum class RunStatus { Completed, BlowupSuspected, CapExceeded, StepRejected, SolverFailure };
std::string_view to_string(RunStatus s);

/// Semi-implicit step with gamma frozen at v^n:
///   (I - dt L D) u+ = u,   D = diag gamma(v)
///   ((tau + dt) I - dt L) v+ = tau v + dt u+
/// The u-system is solved in the symmetric form (D^-1 - dt L) y = u, u+ = y / gamma,
/// so both solves are SPD M-matrix solves.
class ImexStepper {
 public:
  ImexStepper(const LinOp& op, const MotilityFamily& gamma, double tau, SolveOptions options);

  /// Writes the new state into `out` (which may not alias `in`).
  void step(const State& in, double dt, State& out);

  /// gamma(v^n) used by the last step.
  std::span<const double> frozen_gamma() const noexcept { return gamma_; }

 private:
  const LinOp* op_;
  const MotilityFamily* gamma_fn_;
  double tau_;
  ShiftedSystem usys_;
  ShiftedSystem vsys_;
  double vsys_dt_ = -1.0;
  std::vector<double> gamma_, inv_gamma_, rhs_, y_, gu_, lap_;
};

/// Returns the next step size from the last relative change of ||u||_inf:
/// halve above 10%, grow by 1.2 below 1%, then clamp to [dt_min, dt_max].
double adapt_dt(double dt, double relative_change, const SimParams& params);

struct StepInfo {
  int step = 0;  // 1-based index of the accepted step
  double dt = 0.0;
  std::span<const double> frozen_gamma;
};

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_start(const State&) {}
  virtual void on_step(const State& /*prev*/, const State& /*next*/, const StepInfo&) {}
};

struct SimulationResult {
  RunStatus status = RunStatus::Completed;
  State final_state;  // last accepted state
  int steps = 0;
  int rejected = 0;
  std::string message;
};

/// Advances from `initial` to params.t_end. Errors end the run with a terminal
/// status instead of propagating.
SimulationResult simulate(const LinOp& op, const MotilityFamily& gamma, const SimParams& params, State initial,
                          StepObserver* observer = nullptr);

}  // namespace kslab
