#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "kslab/analysis.hpp"
#include "kslab/errors.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/kernels.hpp"

using namespace kslab;
namespace kp = kernels::parallel;
using std::numbers::pi;

namespace {

Grid line(int n, double L = 1.0) { return Grid(1, std::vector<double>{L}, std::vector<int>{n}); }
Grid square(int n, double L = 1.0) { return Grid(2, std::vector<double>{L, L}, std::vector<int>{n, n}); }

Field cosine_field(const Grid& g, double mean, double amp) {
  InitialSpec s;
  s.kind = InitialKind::Cosine;
  s.mean = mean;
  s.amplitude = amp;
  return generate(g, s);
}

RunDiagnostics run_with_diagnostics(const LinOp& op, const MotilityFamily& fam, const SimParams& p, State s0,
                                    bool keep_fields = false) {
  DiagnosticsOptions o;
  o.t_end = p.t_end;
  o.cadence = p.cadence;
  o.record_interval = p.record_interval;
  o.keep_fields = keep_fields;
  DiagnosticsCollector col(op, fam, o);
  auto r = simulate(op, fam, p, std::move(s0), &col);
  REQUIRE(r.status == RunStatus::Completed);
  return col.take();
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("compute_w against the Neumann eigenfunction") {
  const Grid g = line(256);
  const LinOp op(g);
  const Field u = cosine_field(g, 1.0, 1.0);
  const Field w = compute_w(op, u, 1e-12);
  double err = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c)
    err = std::max(err, std::abs(w[c] - (1.0 + std::cos(pi * g.center(c)[0]) / (1.0 + pi * pi))));
  CHECK(err <= 1e-4);
  CHECK(integrate(w) == doctest::Approx(integrate(u)).epsilon(1e-12));
}

TEST_CASE("energy_h1 closed form") {
  // u = 1 + cos(pi x): E = int w u = 1 + 1 / (2 (1 + pi^2)); with gamma = 1 the
  // dissipation is int u^2 = 3/2.
  const Grid g = line(512);
  const LinOp op(g);
  const Field u = cosine_field(g, 1.0, 1.0);
  const auto e = energy_h1(op, u, Field(g, 1.0), MotilityFamily::bounded_oscillatory(1.0, 0.0, 1.0), 1e-12);
  CHECK(e.energy == doctest::Approx(1.0 + 1.0 / (2.0 * (1.0 + pi * pi))).epsilon(1e-5));
  CHECK(e.dissipation == doctest::Approx(1.5).epsilon(1e-5));
  // discrete identity: sum w u h = |grad w|^2 + |w|^2 in the grid inner product
  const Field w = compute_w(op, u, 1e-12);
  const Field lw = op.apply(w);
  const double h = g.cell_volume();
  const double grad2 = -kp::dot(w.values(), lw.values()) * h;
  CHECK(e.energy == doctest::Approx(grad2 + kp::dot(w.values(), w.values()) * h).epsilon(1e-10));
}

TEST_CASE("gamma_big examples") {
  CHECK(gamma_big(1.0, 3.0) == 0.0);
  CHECK(gamma_big(std::exp(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gamma_big(2.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_big(3.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gamma_big(0.5, 2.0) == doctest::Approx(-1.0).epsilon(1e-15));
  // continuous through l = 1
  for (double s : {0.1, 2.0, 50.0})
    for (double dl : {1e-9, -1e-9}) CHECK(gamma_big(s, 1.0 + dl) == doctest::Approx(std::log(s)).epsilon(1e-7));
  CHECK_THROWS(gamma_big(0.0, 1.0));
}

TEST_CASE("classify_run examples") {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[i] = i;
  std::vector<double> flat(101, 3.0), grow(101), osc(101), decay(101);
  for (int i = 0; i <= 100; ++i) {
    grow[i] = std::exp(0.05 * t[i]);
    osc[i] = 2.0 + 0.5 * std::sin(t[i]);
    decay[i] = 1.0 + std::exp(-t[i]);
  }
  const auto cf = classify_run(t, flat);
  CHECK(cf.verdict == Verdict::Bounded);
  CHECK(cf.log_slope == doctest::Approx(0.0));
  CHECK(cf.window == 51);
  const auto cg = classify_run(t, grow);
  CHECK(cg.verdict == Verdict::Growing);
  CHECK(cg.log_slope == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(cg.monotone_fraction == 1.0);
  CHECK(classify_run(t, osc).verdict == Verdict::Inconclusive);
  CHECK(classify_run(t, decay).verdict == Verdict::Bounded);

  // scale invariance
  std::vector<double> grow_scaled(grow);
  for (auto& x : grow_scaled) x *= 1e6;
  const auto cs = classify_run(t, grow_scaled);
  CHECK(cs.verdict == cg.verdict);
  CHECK(cs.log_slope == doctest::Approx(cg.log_slope).epsilon(1e-9));
  CHECK(cs.variation == doctest::Approx(cg.variation).epsilon(1e-12));

  // too short, non-positive
  const auto shortc = classify_run(std::span<const double>(t).first(10), std::span<const double>(flat).first(10));
  CHECK(shortc.verdict == Verdict::Inconclusive);
  CHECK_FALSE(shortc.note.empty());
  flat[40] = 0.0;
  CHECK(classify_run(t, flat).verdict == Verdict::Inconclusive);
  CHECK_THROWS_AS(classify_run(t, std::span<const double>(grow).first(5)), ConfigError);
}

TEST_CASE("fit_slope recovers a line") {
  const std::vector<double> t{0.0, 1.0, 2.5, 4.0}, y{1.0, 3.0, 6.0, 9.0};
  CHECK(fit_slope(t, y) == doctest::Approx(2.0));
}

TEST_CASE("diagnostic reports on the homogeneous state") {
  const Grid g = square(16, 2.0);
  const LinOp op(g);
  const auto fam = MotilityFamily::exponential(1.0);
  SimParams p;
  p.t_end = 2.0;
  p.record_interval = 0.1;
  const auto d = run_with_diagnostics(op, fam, p, State{0.0, Field(g, 1.0), Field(g, 1.0)});
  REQUIRE(d.records.size() == 21);

  const auto ladder = lp_ladder(d, 8);
  CHECK_FALSE(ladder.inconclusive);
  CHECK(ladder.all_pass);
  REQUIRE(ladder.levels.size() == 8);
  CHECK(ladder.levels[7].p == 256.0);
  for (const auto& lv : ladder.levels) CHECK(std::abs(lv.slope) <= 1e-12);

  const auto ratio = two_sided_ratio(d, 1.0);
  CHECK(ratio.a_est == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ratio.b_est == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ratio.trend) <= 1e-12);
  CHECK(ratio.records == 11);

  const auto env = envelope_check(d);
  CHECK(env.holds);
  CHECK(env.gamma_obs == doctest::Approx(std::exp(-1.0)));

  // ratio is (0 + E + D) / rhs = (1 + gamma(1)) gamma(1) on a constant state
  const auto en = energy_inequality_check(d);
  const double g1 = std::exp(-1.0);
  CHECK(en.c_fit == doctest::Approx((1.0 + g1) * g1).epsilon(1e-9));
  CHECK(en.holds);
  CHECK(en.calibration_pairs + en.validation_pairs == 20);

  CHECK(classify_run(d).verdict == Verdict::Bounded);
  CHECK(d.max_mass_drift <= 1e-14);
}

TEST_CASE("too few records make the ladder inconclusive") {
  const Grid g = square(8);
  const LinOp op(g);
  SimParams p;
  p.t_end = 0.5;
  p.record_interval = 0.1;
  const auto d = run_with_diagnostics(op, MotilityFamily::exponential(1.0), p, State{0.0, Field(g, 1.0), Field(g, 1.0)});
  const auto ladder = lp_ladder(d, 4);
  CHECK(ladder.inconclusive);
  CHECK_FALSE(ladder.all_pass);
  CHECK_THROWS_AS(lp_ladder(d, 9), ConfigError);
}

TEST_CASE("key_inequality_check needs stored fields") {
  const Grid g = square(8);
  const LinOp op(g);
  SimParams p;
  p.t_end = 0.5;
  const auto fam = MotilityFamily::algebraic(1.0);
  const auto d = run_with_diagnostics(op, fam, p, State{0.0, Field(g, 1.0), Field(g, 1.0)});
  CHECK_THROWS_AS(key_inequality_check(d, fam, 1.0, 1.0, 0.25, 0.0), ConfigError);
  const auto df = run_with_diagnostics(op, fam, p, State{0.0, cosine_field(g, 1.0, 0.5), Field(g, 1.0)}, true);
  const auto rep = key_inequality_check(df, fam, 1.0, 1.0, 0.25, 0.0);
  CHECK(rep.c1 == doctest::Approx(1.0));
  CHECK(rep.c2 == doctest::Approx(1.0));
  CHECK(rep.c3_full >= rep.c3_calibration);
  CHECK(rep.full_records > rep.calibration_records);
}

TEST_CASE("key identity: resolvent algebra on a 3-cell grid") {
  const Grid g = line(3);
  const LinOp op(g);
  const Eigen::MatrixXd L(op.matrix());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd R = (I - L).inverse();
  CHECK((R * L - (-I + R)).norm() <= 1e-13 * L.norm());

  // the scheme satisfies the identity to solver precision, perturbations do not
  const auto fam = MotilityFamily::exponential(1.0);
  const State s{0.0, Field(g, std::vector<double>{0.5, 2.0, 1.0}), Field(g, std::vector<double>{1.0, 0.3, 2.0})};
  ImexStepper st(op, fam, 1.0, {});
  State next;
  const double dt = 0.05;
  st.step(s, dt, next);
  const Field w = compute_w(op, s.u, 1e-14), wn = compute_w(op, next.u, 1e-14);
  CHECK(key_identity_residual(w, wn, next.u, s.v, dt, fam, op, 1e-14) <= 1e-12);
  Field bad = next.u;
  bad[1] += 1e-3;
  const Field wb = compute_w(op, bad, 1e-14);
  CHECK(key_identity_residual(w, wb, bad, s.v, dt, fam, op, 1e-14) >= 1e-4);

  // dense oracle for the update itself: u+ = (I - dt L G)^-1 u
  Eigen::Vector3d gv, u0;
  for (int i = 0; i < 3; ++i) {
    gv[i] = fam(s.v[i]);
    u0[i] = s.u[i];
  }
  const Eigen::Vector3d up = (I - dt * L * gv.asDiagonal()).lu().solve(u0);
  for (int i = 0; i < 3; ++i) CHECK(next.u[i] == doctest::Approx(up[i]).epsilon(1e-13));
  const Eigen::Vector3d v0(s.v[0], s.v[1], s.v[2]);
  const Eigen::Vector3d vp = ((1.0 + dt) * I - dt * L).lu().solve(v0 + dt * up);
  for (int i = 0; i < 3; ++i) CHECK(next.v[i] == doctest::Approx(vp[i]).epsilon(1e-13));
}

TEST_CASE("exp_integral_log and Brezis-Merle examples") {
  const Grid g = square(16, 2.0);
  const LinOp op(g);
  // constant f: z = f, so the integral is |Omega| e^{R c}
  CHECK(exp_integral_log(op, Field(g, 3.0), 2.0, 1e-12) == doctest::Approx(std::log(4.0) + 6.0).epsilon(1e-12));
  // no overflow in log form
  CHECK(exp_integral_log(op, Field(g, 1.0), 1000.0, 1e-12) == doctest::Approx(std::log(4.0) + 1000.0).epsilon(1e-12));

  // Jensen: mean z = lambda on the unit square, so the log integral is at least R lambda
  const auto bm = brezis_merle_check(2.0, 3.0, 0.1, 32);
  CHECK(bm.n == 32);
  CHECK(bm.log_coarse >= 6.0);
  CHECK(bm.log_fine >= 6.0);
  CHECK(bm.relative_change == doctest::Approx(std::expm1(bm.log_fine - bm.log_coarse)));
  // near-Dirac datum: refinement raises the integral
  const auto dirac = brezis_merle_check(1.0, 8.0 * pi, 0.0, 16);
  CHECK(dirac.relative_change > 0.0);
}

TEST_CASE("flux_form_crosscheck") {
  const auto fam = MotilityFamily::exponential(1.0);
  SUBCASE("vanishes on constants and for constant motility") {
    const Grid g = square(16);
    const LinOp op(g);
    CHECK(flux_form_crosscheck(op, fam, State{0.0, Field(g, 1.0), Field(g, 2.0)}, 0.01) <= 1e-13);
    const Field u = cosine_field(g, 1.0, 0.5);
    CHECK(flux_form_crosscheck(op, MotilityFamily::bounded_oscillatory(1.0, 0.0, 1.0), State{0.0, u, Field(g, 1.0)},
                               0.01) <= 1e-12);
  }
  SUBCASE("the two forms differ at second order in h") {
    double err[2];
    int i = 0;
    for (int n : {64, 128}) {
      const Grid g = line(n);
      const LinOp op(g);
      err[i++] = flux_form_crosscheck(op, fam, State{0.0, cosine_field(g, 1.0, 0.5), cosine_field(g, 1.0, 0.8)}, 0.01);
    }
    INFO("differences " << err[0] << " " << err[1]);
    CHECK(err[0] / err[1] >= 3.6);
    CHECK(err[0] / err[1] <= 4.4);
  }
}

}  // TEST_SUITE
