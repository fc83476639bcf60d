#include "kslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

namespace kp = kernels::parallel;

void SimParams::validate(double u0_inf) const {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(dt_min > 0.0)) throw ConfigError("dt_min must be positive");
  if (!(dt_init > 0.0)) throw ConfigError("dt_init must be positive");
  if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (!(dt_min <= dt_init && dt_init <= dt_max)) throw ConfigError("need dt_min <= dt_init <= dt_max");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (u_max < 0.0) throw ConfigError("u_max must be positive (or 0 for the default)");
  if (!(effective_u_max(u0_inf) > u0_inf)) throw ConfigError("u_max must exceed the initial sup of u");
  if (cadence < 1) throw ConfigError("cadence must be at least 1");
  if (record_interval < 0.0) throw ConfigError("record_interval must be non-negative");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowupSuspected: return "BlowupSuspected";
    case RunStatus::CapExceeded: return "CapExceeded";
    case RunStatus::StepRejected: return "StepRejected";
    case RunStatus::SolverFailure: return "SolverFailure";
  }
  return "?";
}

ImexStepper::ImexStepper(const LinOp& op, const MotilityFamily& gamma, double tau, SolveOptions options)
    : op_(&op), gamma_fn_(&gamma), tau_(tau), usys_(op, options), vsys_(op, options) {
  const std::size_t n = op.size();
  gamma_.resize(n);
  inv_gamma_.resize(n);
  rhs_.resize(n);
  gu_.resize(n);
  lap_.resize(n);
  y_.resize(n);
}

void ImexStepper::step(const State& in, double dt, State& out) {
  const std::size_t n = op_->size();
  const auto v = in.v.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = (*gamma_fn_)(v[i]);
    if (!(g >= 1e-300) || !std::isfinite(g)) throw SolverError("gamma(v) left the representable range", INFINITY);
    gamma_[i] = g;
    inv_gamma_[i] = 1.0 / g;
  }
  if (out.u.size() != n) out.u = Field(in.u.grid());
  if (out.v.size() != n) out.v = Field(in.v.grid());

  // Both solves are in increment form: the right-hand sides are differences of
  // neighbouring values, so constant states are reproduced exactly.
  const auto u0 = in.u.values();
  kp::multiply(u0, gamma_, gu_);
  op_->apply(gu_, lap_);
  for (std::size_t i = 0; i < n; ++i) rhs_[i] = dt * lap_[i];
  usys_.set(inv_gamma_, dt);
  std::fill(y_.begin(), y_.end(), 0.0);
  usys_.solve(rhs_, y_);
  for (std::size_t i = 0; i < n; ++i) y_[i] += gu_[i];
  auto u = out.u.values();
  if (usys_.options().kind == SolverKind::ConjugateGradient) {
    // u+ = u + dt L y equals y / gamma up to the CG residual but keeps the mass
    // exact, since L has zero column sums.
    op_->apply(y_, u);
    for (std::size_t i = 0; i < n; ++i) u[i] = u0[i] + dt * u[i];
  } else {
    kp::multiply(y_, inv_gamma_, u);
  }

  if (dt != vsys_dt_) {
    vsys_.set(tau_ + dt, dt);
    vsys_dt_ = dt;
  }
  op_->apply(v, lap_);
  for (std::size_t i = 0; i < n; ++i) rhs_[i] = dt * (u[i] - v[i] + lap_[i]);
  auto vn = out.v.values();
  std::fill(vn.begin(), vn.end(), 0.0);
  vsys_.solve(rhs_, vn);
  for (std::size_t i = 0; i < n; ++i) vn[i] += v[i];
  out.t = in.t + dt;
}

double adapt_dt(double dt, double relative_change, const SimParams& params) {
  double next = dt;
  if (relative_change > 0.10)
    next = 0.5 * dt;
  else if (relative_change < 0.01)
    next = 1.2 * dt;
  return std::clamp(next, params.dt_min, params.dt_max);
}

namespace {

bool state_valid(const State& s) {
  const auto mu = kp::minmax(s.u.values());
  const auto mv = kp::minmax(s.v.values());
  return std::isfinite(mu.min) && std::isfinite(mu.max) && std::isfinite(mv.max) && mu.min >= -1e-12 &&
         mv.min > 0.0;
}

}  // namespace

SimulationResult simulate(const LinOp& op, const MotilityFamily& gamma, const SimParams& params, State initial,
                          StepObserver* observer) {
  SimulationResult res;
  const double u0_inf = kp::norm_inf(initial.u.values());
  params.validate(u0_inf);
  const double cap = params.effective_u_max(u0_inf);
  SolveOptions opts;
  opts.kind = params.solver;
  opts.tol = params.tol;
  ImexStepper stepper(op, gamma, params.tau, opts);

  State cur = std::move(initial);
  State trial{cur.t, Field(cur.u.grid()), Field(cur.v.grid())};
  if (observer) observer->on_start(cur);

  double dt = params.dt_init;
  double uinf = u0_inf;
  // Relative slack so that the last step lands exactly on t_end.
  const double t_eps = 1e-12 * params.t_end;

  try {
    while (cur.t < params.t_end - t_eps) {
      double h = std::min(dt, params.t_end - cur.t);
      stepper.step(cur, h, trial);
      const bool ok = state_valid(trial);
      const double uinf_new = kp::norm_inf(trial.u.values());
      const double change = std::abs(uinf_new - uinf) / uinf;
      if (!ok || (params.adaptive && change > 0.10)) {
        ++res.rejected;
        if (0.5 * h < params.dt_min) {
          res.status = ok ? RunStatus::BlowupSuspected : RunStatus::StepRejected;
          std::ostringstream os;
          os << (ok ? "growth of ||u||_inf" : "invalid state") << " at t=" << cur.t
             << " needs a step below dt_min=" << params.dt_min;
          res.message = os.str();
          break;
        }
        dt = 0.5 * h;
        continue;
      }
      ++res.steps;
      if (observer) observer->on_step(cur, trial, StepInfo{res.steps, h, stepper.frozen_gamma()});
      std::swap(cur, trial);
      uinf = uinf_new;
      if (params.adaptive) dt = adapt_dt(h < dt ? dt : h, change, params);
      if (uinf > cap) {
        res.status = RunStatus::CapExceeded;
        std::ostringstream os;
        os << "||u||_inf=" << uinf << " exceeded the cap " << cap << " at t=" << cur.t;
        res.message = os.str();
        break;
      }
    }
  } catch (const SolverError& e) {
    res.status = RunStatus::SolverFailure;
    res.message = e.what();
  } catch (const DomainError& e) {
    res.status = RunStatus::SolverFailure;
    res.message = e.what();
  }
  res.final_state = std::move(cur);
  return res;
}

}  // namespace kslab
