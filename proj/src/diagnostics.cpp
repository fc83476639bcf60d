#include "kslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

namespace kp = kernels::parallel;

const char* const kDiagnosticsHeader =
    "t,dt,mass,u_min,u_max,v_min,v_max,w_min,w_max,uinf,w_l2,w_l4,w_l8,w_l16,energy,dissipation,ratio_min,"
    "ratio_max,key_resid";

DiagnosticsCollector::DiagnosticsCollector(const LinOp& op, const MotilityFamily& gamma, DiagnosticsOptions options)
    : op_(&op), gamma_(&gamma), options_(options) {
  if (options_.cadence < 1) throw ConfigError("cadence must be at least 1");
  helmholtz_ = std::make_unique<ShiftedSystem>(op, options_.solve);
  helmholtz_->set(1.0, 1.0);
  if (options_.semigroup_bounds) semigroup_ = std::make_unique<ShiftedSystem>(op, options_.solve);
  const std::size_t n = op.size();
  buf_a_.resize(n);
  buf_b_.resize(n);
  rhs_.resize(n);
}

DiagnosticsCollector::~DiagnosticsCollector() = default;

namespace {

// x = A^-1 b; the CG path warm-starts from b.
void resolve(const ShiftedSystem& sys, std::span<const double> b, std::span<double> x) {
  if (sys.options().kind == SolverKind::ConjugateGradient) std::copy(b.begin(), b.end(), x.begin());
  sys.solve(b, x);
}

}  // namespace

DiagnosticRecord DiagnosticsCollector::make_record(const State& s, const Field& w, double dt, double key_resid,
                                                   double w_growth) {
  const Grid& g = s.u.grid();
  const double hd = g.cell_volume();
  const auto u = s.u.values();
  const auto v = s.v.values();
  const auto wv = w.values();
  DiagnosticRecord r;
  r.t = s.t;
  r.dt = dt;
  r.mass = kp::sum(u) * hd;
  const auto mu = kp::minmax(u);
  const auto mv = kp::minmax(v);
  const auto mw = kp::minmax(wv);
  r.u_min = mu.min;
  r.u_max = mu.max;
  r.v_min = mv.min;
  r.v_max = mv.max;
  r.w_min = mw.min;
  r.w_max = mw.max;
  r.uinf = kp::norm_inf(u);
  const double wscale = kp::norm_inf(wv);
  for (int k = 0; k < kLadderLevels; ++k) {
    const double p = std::ldexp(1.0, k + 1);
    r.w_lp[k] = wscale > 0.0 ? wscale * std::pow(kp::power_sum(wv, p, wscale) * hd, 1.0 / p) : 0.0;
  }
  r.energy = kp::dot(wv, u) * hd;
  double diss = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gv = (*gamma_)(v[i]);
    diss += u[i] * u[i] * gv;
    rhs += wv[i] * wv[i] / gv;
  }
  r.dissipation = diss * hd;
  r.energy_rhs = rhs * hd;
  const auto ratio = kp::ratio_minmax(v, wv);
  r.ratio_min = ratio.min;
  r.ratio_max = ratio.max;
  r.key_resid = key_resid;
  r.w_growth = w_growth;
  return r;
}

void DiagnosticsCollector::on_start(const State& s) {
  const Grid& g = s.u.grid();
  w_ = Field(g);
  w_next_ = Field(g);
  resolve(*helmholtz_, s.u.values(), w_.values());
  w0_ = w_;
  diag_ = RunDiagnostics{};
  diag_.initial_mass = kp::sum(s.u.values()) * g.cell_volume();
  diag_.min_u = kp::minmax(s.u.values()).min;
  diag_.min_v = kp::minmax(s.v.values()).min;
  if (semigroup_) {
    z_ = w0_;
    z_next_ = Field(g);
    semigroup_dt_ = -1.0;
  }
  diag_.records.push_back(make_record(s, w_, 0.0, 0.0, 1.0));
  if (options_.keep_fields) diag_.fields.push_back(FieldRecord{s.t, s.u, s.v, w_, Field(g)});
  next_record_t_ = s.t + options_.record_interval;
}

bool DiagnosticsCollector::due(const State& next, const StepInfo& info) {
  const double eps = 1e-9 * std::max(1.0, std::abs(next.t));
  if (options_.t_end > 0.0 && next.t >= options_.t_end - eps) return true;
  if (options_.record_interval > 0.0) {
    if (next.t < next_record_t_ - eps) return false;
    while (next_record_t_ <= next.t + eps) next_record_t_ += options_.record_interval;
    return true;
  }
  return info.step % options_.cadence == 0;
}

void DiagnosticsCollector::on_step(const State& prev, const State& next, const StepInfo& info) {
  (void)prev;
  const std::size_t n = op_->size();
  const double dt = info.dt;
  const double hd = next.u.grid().cell_volume();
  const auto u = next.u.values();
  const auto gam = info.frozen_gamma;

  resolve(*helmholtz_, u, w_next_.values());

  // Key identity: (w+ - w)/dt + g u+ - A^-1[g u+] with g frozen at v^n.
  kp::multiply(gam, u, buf_a_);
  resolve(*helmholtz_, buf_a_, buf_b_);
  const auto wn = w_.values();
  const auto wp = w_next_.values();
  double resid = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    resid = std::max(resid, std::abs((wp[i] - wn[i]) / dt + buf_a_[i] - buf_b_[i]));

  StepSample smp;
  smp.t = next.t;
  smp.dt = dt;
  smp.key_resid = resid;
  if (options_.variant_residual) {
    const auto v = next.v.values();
    for (std::size_t i = 0; i < n; ++i) buf_a_[i] = (*gamma_)(v[i]) * u[i];
    resolve(*helmholtz_, buf_a_, buf_b_);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      r2 = std::max(r2, std::abs((wp[i] - wn[i]) / dt + buf_a_[i] - buf_b_[i]));
    smp.key_resid_variant = r2;
  }
  smp.uinf = kp::norm_inf(u);
  const double mass = kp::sum(u) * hd;
  smp.mass_drift = std::abs(mass - diag_.initial_mass) / diag_.initial_mass;
  smp.u_min = kp::minmax(u).min;
  smp.v_min = kp::minmax(next.v.values()).min;
  smp.w_growth = kp::ratio_minmax(wp, w0_.values()).max;

  if (semigroup_) {
    // z+ = ((1 + a dt) I - a dt L)^-1 (z + dt b w+),  a = gamma_lower, b = gamma_upper
    const auto [lo, hi] = *options_.semigroup_bounds;
    if (dt != semigroup_dt_) {
      semigroup_->set(1.0 + lo * dt, lo * dt);
      semigroup_dt_ = dt;
    }
    const auto z = z_.values();
    for (std::size_t i = 0; i < n; ++i) rhs_[i] = z[i] + dt * hi * wp[i];
    auto zn = z_next_.values();
    if (semigroup_->options().kind == SolverKind::ConjugateGradient) std::copy(z.begin(), z.end(), zn.begin());
    semigroup_->solve(rhs_, zn);
    std::swap(z_, z_next_);
    const double zmax = kp::norm_inf(z_.values());
    double excess = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) excess = std::max(excess, wp[i] - z_[i]);
    smp.semigroup_excess = excess / zmax;
    diag_.max_semigroup_excess = std::max(diag_.max_semigroup_excess, smp.semigroup_excess);
  }

  diag_.gamma_obs = std::max(diag_.gamma_obs, kp::norm_inf(gam));
  diag_.max_key_resid = std::max(diag_.max_key_resid, resid);
  diag_.max_key_resid_scaled = std::max(diag_.max_key_resid_scaled, resid / smp.uinf);
  diag_.max_mass_drift = std::max(diag_.max_mass_drift, smp.mass_drift);
  diag_.min_u = std::min(diag_.min_u, smp.u_min);
  diag_.min_v = std::min(diag_.min_v, smp.v_min);
  diag_.steps.push_back(smp);

  if (due(next, info)) {
    diag_.records.push_back(make_record(next, w_next_, dt, resid, smp.w_growth));
    if (options_.keep_fields) {
      Field wt(next.u.grid());
      for (std::size_t i = 0; i < n; ++i) wt[i] = (wp[i] - wn[i]) / dt;
      diag_.fields.push_back(FieldRecord{next.t, next.u, next.v, w_next_, std::move(wt)});
    }
  }
  std::swap(w_, w_next_);
}

void write_diagnostics_csv(std::ostream& os, const RunDiagnostics& d) {
  os << kDiagnosticsHeader << '\n';
  char buf[64];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << sep;
  };
  for (const auto& r : d.records) {
    put(r.t, ',');
    put(r.dt, ',');
    put(r.mass, ',');
    put(r.u_min, ',');
    put(r.u_max, ',');
    put(r.v_min, ',');
    put(r.v_max, ',');
    put(r.w_min, ',');
    put(r.w_max, ',');
    put(r.uinf, ',');
    for (int k = 0; k < 4; ++k) put(r.w_lp[k], ',');
    put(r.energy, ',');
    put(r.dissipation, ',');
    put(r.ratio_min, ',');
    put(r.ratio_max, ',');
    put(r.key_resid, '\n');
  }
}

}  // namespace kslab
