#include "kslab/analysis.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

namespace kp = kernels::parallel;

Field compute_w(const LinOp& op, const Field& u, double tol, SolverKind kind) {
  return helmholtz_solve(op.grid(), op, u, tol, kind);
}

double key_identity_residual(const Field& w, const Field& w_next, const Field& u_next, const Field& v, double dt,
                             const MotilityFamily& gamma, const LinOp& op, double tol) {
  require_same_grid(w, w_next);
  require_same_grid(w, u_next);
  require_same_grid(w, v);
  if (!(w.grid() == op.grid())) throw ConfigError("key_identity_residual: operator grid mismatch");
  if (!(dt > 0.0)) throw ConfigError("key_identity_residual: dt must be positive");
  Field gu(u_next.grid());
  for (std::size_t i = 0; i < gu.size(); ++i) gu[i] = gamma(v[i]) * u_next[i];
  const Field agu = helmholtz_solve(op.grid(), op, gu, tol);
  double r = 0.0;
  for (std::size_t i = 0; i < gu.size(); ++i) r = std::max(r, std::abs((w_next[i] - w[i]) / dt + gu[i] - agu[i]));
  return r;
}

EnergyTerms energy_h1(const Field& w, const Field& u, const Field& v, const MotilityFamily& gamma) {
  require_same_grid(w, u);
  require_same_grid(w, v);
  const double hd = u.grid().cell_volume();
  EnergyTerms e;
  e.energy = kp::dot(w.values(), u.values()) * hd;
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += u[i] * u[i] * gamma(v[i]);
  e.dissipation = d * hd;
  return e;
}

EnergyTerms energy_h1(const LinOp& op, const Field& u, const Field& v, const MotilityFamily& gamma, double tol) {
  return energy_h1(compute_w(op, u, tol), u, v, gamma);
}

double gamma_big(double s, double l) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("Gamma(s) needs s > 0");
  if (!(l >= 0.0)) throw DomainError("Gamma(s) needs l >= 0");
  if (l == 1.0) return std::log(s);
  // (s^{1-l} - 1) / (1 - l) written with expm1 so that l -> 1 stays accurate
  const double e = 1.0 - l;
  return std::expm1(e * std::log(s)) / e;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "Bounded";
    case Verdict::Growing: return "Growing";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double fit_slope(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sty += (t[i] - tm) * (y[i] - ym);
    stt += (t[i] - tm) * (t[i] - tm);
  }
  return stt > 0.0 ? sty / stt : 0.0;
}

namespace {

// Index of the first record in the trailing half (by time).
std::size_t trailing_start(std::span<const double> t) {
  if (t.empty()) return 0;
  const double mid = t.front() + 0.5 * (t.back() - t.front());
  return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), mid) - t.begin());
}

}  // namespace

Classification classify_run(std::span<const double> t, std::span<const double> series, const ClassifyThresholds& th) {
  if (t.size() != series.size()) throw ConfigError("classify_run: time and series lengths differ");
  Classification c;
  for (double x : series) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      c.note = "series has non-positive or non-finite entries";
      return c;
    }
  }
  const std::size_t s = trailing_start(t);
  const std::size_t m = t.size() - s;
  c.window = static_cast<int>(m);
  if (m >= 2) {
    std::vector<double> lw(m);
    for (std::size_t i = 0; i < m; ++i) lw[i] = std::log(series[s + i]);
    c.log_slope = fit_slope(t.subspan(s), lw);
    const auto [lo, hi] = std::minmax_element(series.begin() + s, series.end());
    c.variation = (*hi - *lo) / (*hi + *lo);
    int up = 0;
    for (std::size_t i = s + 1; i < t.size(); ++i) up += series[i] >= series[i - 1];
    c.monotone_fraction = static_cast<double>(up) / static_cast<double>(m - 1);
  }
  if (static_cast<int>(t.size()) < th.min_records) {
    c.note = "fewer than " + std::to_string(th.min_records) + " records";
    return c;
  }
  if (c.variation < th.bounded_variation && std::abs(c.log_slope) < th.bounded_slope)
    c.verdict = Verdict::Bounded;
  else if (c.log_slope > th.growing_slope && c.monotone_fraction > th.monotone_fraction)
    c.verdict = Verdict::Growing;
  return c;
}

Classification classify_run(const RunDiagnostics& d, const ClassifyThresholds& th) {
  std::vector<double> t, y;
  for (const auto& r : d.records) {
    t.push_back(r.t);
    y.push_back(r.uinf);
  }
  return classify_run(t, y, th);
}

LadderReport lp_ladder(const RunDiagnostics& d, int K, double slope_tol) {
  if (K < 1 || K > kLadderLevels) throw ConfigError("ladder depth K must be in 1..8");
  LadderReport rep;
  std::vector<double> t;
  for (const auto& r : d.records) t.push_back(r.t);
  rep.inconclusive = d.records.size() < 8;
  const std::size_t s = trailing_start(t);
  rep.all_pass = !rep.inconclusive;
  for (int k = 0; k < K; ++k) {
    LadderLevel lv;
    lv.p = std::ldexp(1.0, k + 1);
    std::vector<double> lw;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      const double x = d.records[i].w_lp[k];
      lv.sup = std::max(lv.sup, x);
      if (i >= s) lw.push_back(std::log(x));
    }
    lv.slope = fit_slope(std::span<const double>(t).subspan(s), lw);
    lv.passes = !rep.inconclusive && lv.slope <= slope_tol;
    rep.all_pass = rep.all_pass && lv.passes;
    rep.levels.push_back(lv);
  }
  return rep;
}

RatioReport two_sided_ratio(const RunDiagnostics& d, double burn_in) {
  RatioReport rep;
  rep.a_est = std::numeric_limits<double>::infinity();
  std::vector<double> t, mx;
  for (const auto& r : d.records) {
    if (r.t < burn_in) continue;
    rep.a_est = std::min(rep.a_est, r.ratio_min);
    rep.b_est = std::max(rep.b_est, r.ratio_max);
    t.push_back(r.t);
    mx.push_back(r.ratio_max);
  }
  rep.records = static_cast<int>(t.size());
  if (t.empty()) {
    rep.a_est = 0.0;
    return rep;
  }
  const std::size_t s = trailing_start(t);
  rep.trend = fit_slope(std::span<const double>(t).subspan(s), std::span<const double>(mx).subspan(s));
  return rep;
}

EnvelopeCheckReport envelope_check(const RunDiagnostics& d, double slack) {
  EnvelopeCheckReport rep;
  rep.gamma_obs = d.gamma_obs;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& r : d.records) {
    // log form: exp(gamma t) overflows on long runs
    const double log_ratio = std::log(r.w_growth) - d.gamma_obs * r.t;
    rep.max_excess = std::max(rep.max_excess, std::expm1(std::min(log_ratio, 700.0)));
  }
  rep.holds = rep.max_excess <= slack;
  return rep;
}

EnergyInequalityReport energy_inequality_check(const RunDiagnostics& d, double calibration_fraction, double slack) {
  EnergyInequalityReport rep;
  const auto& rs = d.records;
  if (rs.size() < 3) return rep;
  std::vector<double> ratio;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const double dt = rs[i].t - rs[i - 1].t;
    const double lhs = (rs[i].energy - rs[i - 1].energy) / dt + rs[i].energy + rs[i].dissipation;
    ratio.push_back(lhs / rs[i].energy_rhs);
  }
  const std::size_t ncal = std::max<std::size_t>(1, static_cast<std::size_t>(calibration_fraction * ratio.size()));
  rep.calibration_pairs = static_cast<int>(ncal);
  rep.validation_pairs = static_cast<int>(ratio.size() - ncal);
  rep.c_fit = *std::max_element(ratio.begin(), ratio.begin() + ncal);
  rep.max_validation_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = ncal; i < ratio.size(); ++i) rep.max_validation_ratio = std::max(rep.max_validation_ratio, ratio[i]);
  rep.holds = rep.c_fit > 0.0 && rep.validation_pairs > 0 && rep.max_validation_ratio <= slack * rep.c_fit;
  return rep;
}

KeyInequalityReport key_inequality_check(const RunDiagnostics& d, const MotilityFamily& gamma, double k, double l,
                                         double calibration_fraction, double burn_in) {
  KeyInequalityReport rep;
  rep.k = k;
  rep.l = l;
  std::vector<const FieldRecord*> recs;
  for (const auto& f : d.fields)
    if (f.t >= burn_in && f.t > 0.0) recs.push_back(&f);
  if (recs.size() < 2) throw ConfigError("key inequality check needs stored field records after burn-in");

  const RatioReport ratio = two_sided_ratio(d, burn_in);
  rep.a_est = ratio.a_est;
  rep.b_est = ratio.b_est;
  if (!(rep.a_est > 0.0) || !std::isfinite(rep.b_est)) throw ConfigError("two-sided ratio bounds unavailable");

  double vlo = std::numeric_limits<double>::infinity(), vhi = 0.0;
  for (const auto* f : recs) {
    const auto mm = kp::minmax(f->v.values());
    vlo = std::min(vlo, mm.min);
    vhi = std::max(vhi, mm.max);
  }
  const EnvelopeReport env = probe_envelope(gamma, k, l, ProbeRange{vlo, std::max(vhi, 1.000001 * vlo), 10000});
  if (!env.holds) throw ConfigError("algebraic envelope does not hold for the supplied (k, l)");
  rep.c1 = env.c1;
  rep.c2 = env.c2;
  const double upper = rep.c2 * std::pow(rep.a_est, -l);
  const double lower = rep.c1 * std::pow(rep.b_est, -k);

  const std::size_t ncal = std::max<std::size_t>(1, static_cast<std::size_t>(calibration_fraction * recs.size()));
  double c3 = 0.0;
  for (std::size_t r = 0; r < recs.size(); ++r) {
    const FieldRecord& f = *recs[r];
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      const double w = f.w[i];
      const double lhs = f.w_t[i] + lower * std::pow(w, -k) * f.u[i];
      c3 = std::max(c3, lhs / upper - gamma_big(w, l));
    }
    if (r + 1 == ncal) rep.c3_calibration = c3;
  }
  rep.c3_full = c3;
  rep.calibration_records = static_cast<int>(ncal);
  rep.full_records = static_cast<int>(recs.size());
  const double zero = 1e-12;
  if (rep.c3_full <= zero) {
    rep.stable = true;
    rep.note = "inequality holds with C3 = 0 on every window";
  } else {
    rep.stable = rep.c3_full <= 2.0 * rep.c3_calibration;
  }
  return rep;
}

double exp_integral_log(const LinOp& op, const Field& f, double R, double tol) {
  const Field z = helmholtz_solve(op.grid(), op, f, tol);
  const double zmax = kp::minmax(z.values()).max;
  return R * zmax + std::log(kp::sum_exp(z.values(), R, zmax)) + std::log(op.grid().cell_volume());
}

BrezisMerleReport brezis_merle_check(double lambda, double R, double width, int n, double tol) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  if (n < 2) throw ConfigError("n must be at least 2");
  BrezisMerleReport rep;
  rep.lambda = lambda;
  rep.R = R;
  rep.width = width;
  rep.n = n;
  for (int level = 0; level < 2; ++level) {
    const int m = n << level;
    const double lengths[2] = {1.0, 1.0};
    const int counts[2] = {m, m};
    const Grid g(2, lengths, counts);
    const LinOp op(g);
    InitialSpec spec;
    spec.kind = InitialKind::Gaussian;
    spec.mass = lambda;
    spec.width = width > 0.0 ? width : g.spacing(0);
    const Field f = generate(g, spec);
    (level == 0 ? rep.log_coarse : rep.log_fine) = exp_integral_log(op, f, R, tol);
  }
  rep.relative_change = std::expm1(rep.log_fine - rep.log_coarse);
  return rep;
}

double flux_form_crosscheck(const LinOp& op, const MotilityFamily& gamma, const State& s, double dt) {
  const Grid& g = op.grid();
  require_same_grid(s.u, s.v);
  if (!(s.u.grid() == g)) throw ConfigError("flux_form_crosscheck: grid mismatch");
  const std::size_t n = g.size();
  std::vector<double> gm(n), dg(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    gm[i] = gamma(s.v[i]);
    dg[i] = gamma.derivative(s.v[i]);
    inv[i] = 1.0 / gm[i];
  }

  // direct scheme
  ShiftedSystem sys(op);
  sys.set(inv, dt);
  std::vector<double> y(n);
  sys.solve(s.u.values(), y);
  for (std::size_t i = 0; i < n; ++i) y[i] *= inv[i];

  // face-averaged flux form, assembled as A with (I - dt A) u+ = u
  const auto counts = g.counts();
  const std::size_t strides[3] = {static_cast<std::size_t>(counts[1]) * counts[2], static_cast<std::size_t>(counts[2]),
                                  1};
  std::vector<Eigen::Triplet<double, int>> trip;
  trip.reserve(n * (4 * g.dim() + 1));
  for (std::size_t i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.multi_index(i);
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[a] + 1 >= counts[a]) continue;
      const std::size_t j = i + strides[a];
      const double c = dt / (g.spacing(a) * g.spacing(a));
      const double gf = 0.5 * (gm[i] + gm[j]);
      const double df = 0.5 * (dg[i] + dg[j]) * (s.v[j] - s.v[i]);
      const int ii = static_cast<int>(i), jj = static_cast<int>(j);
      // flux i -> j : gf (u_j - u_i) + (u_i + u_j)/2 * df
      trip.emplace_back(ii, jj, -c * (gf + 0.5 * df));
      trip.emplace_back(ii, ii, -c * (-gf + 0.5 * df));
      trip.emplace_back(jj, ii, -c * (gf - 0.5 * df));
      trip.emplace_back(jj, jj, -c * (-gf - 0.5 * df));
    }
  }
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw SolverError("flux-form factorization failed", INFINITY);
  Eigen::Map<const Eigen::VectorXd> b(s.u.values().data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd uf = lu.solve(b);

  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - uf[static_cast<Eigen::Index>(i)]));
  return diff;
}

}  // namespace kslab
