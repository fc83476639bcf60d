#include "kslab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "kslab/errors.hpp"
#include "kslab/field_io.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

InvariantReport check_invariants(const RunDiagnostics& d, double tol) {
  InvariantReport r;
  r.mass_drift = d.max_mass_drift;
  r.min_u = d.min_u;
  r.min_v = d.min_v;
  r.key_resid_scaled = d.max_key_resid_scaled;
  r.key_bound = 50.0 * tol;
  r.mass_ok = r.mass_drift <= 1e-10;
  r.positivity_ok = r.min_u >= -1e-12 && r.min_v > 0.0;
  r.key_ok = r.key_resid_scaled <= r.key_bound;
  return r;
}

int ScenarioResult::exit_code() const {
  if (sim.status == RunStatus::SolverFailure || sim.status == RunStatus::StepRejected ||
      sim.status == RunStatus::BlowupSuspected)
    return kExitRuntime;
  return invariants.all() ? kExitOk : kExitInvariant;
}

ScenarioResult execute(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.config = config;
  const Grid grid = config.grid.build();
  const LinOp op(grid);
  const MotilityFamily gamma = config.motility();

  DiagnosticsOptions dopt;
  dopt.solve.kind = config.sim.solver;
  dopt.solve.tol = config.sim.tol;
  dopt.cadence = config.sim.cadence;
  dopt.record_interval = config.sim.record_interval;
  dopt.t_end = config.sim.t_end;
  dopt.variant_residual = config.output.variant_residual;
  dopt.keep_fields = config.output.keep_fields;
  const AssumptionReport a2 = check_assumption(gamma, AssumptionQuery{AssumptionId::A2});
  if (a2.holds && a2.method == AssumptionMethod::ClosedForm)
    dopt.semigroup_bounds = std::make_pair(a2.witnesses.at("gamma_lower"), a2.witnesses.at("gamma_upper"));

  State s0;
  s0.u = make_initial_u(grid, config.init_u);
  s0.v = make_initial_v(grid, config.init_v);

  DiagnosticsCollector collector(op, gamma, dopt);
  res.sim = simulate(op, gamma, config.sim, std::move(s0), &collector);
  res.diag = collector.take();

  res.invariants = check_invariants(res.diag, config.sim.tol);
  res.classification = classify_run(res.diag, config.output.thresholds);
  res.ladder = lp_ladder(res.diag, config.output.ladder_levels);
  res.ratio = two_sided_ratio(res.diag, config.output.burn_in);
  res.envelope = envelope_check(res.diag);

  AssumptionQuery a1q{AssumptionId::A1};
  a1q.tau = config.sim.tau;
  if (check_assumption(gamma, a1q).holds) res.energy = energy_inequality_check(res.diag);

  const AssumptionReport a4 = check_assumption(gamma, AssumptionQuery{AssumptionId::A4});
  if (a4.holds && config.output.keep_fields) {
    try {
      res.key_inequality = key_inequality_check(res.diag, gamma, a4.witnesses.at("k"), a4.witnesses.at("l"), 0.25,
                                                config.output.burn_in);
    } catch (const ConfigError& e) {
      res.key_inequality_error = e.what();
    }
  }
  res.wall_seconds = seconds_since(t0);
  return res;
}

fs::path output_dir_for(const RunConfig& config) {
  if (!config.output.dir.empty()) return config.output.dir;
  const char* root = std::getenv("KSLAB_OUTPUT_ROOT");
  return fs::path(root && *root ? root : "kslab-output") / ("run-" + config_hash(config));
}

void write_summary(std::ostream& os, const ScenarioResult& r) {
  const auto& c = r.classification;
  const auto& inv = r.invariants;
  auto b = [](bool x) { return x ? "pass" : "fail"; };
  os << "config_hash = " << config_hash(r.config) << '\n';
  os << "gamma = " << r.config.motility().describe() << '\n';
  os << "status = " << to_string(r.sim.status) << '\n';
  if (!r.sim.message.empty()) os << "status_message = " << r.sim.message << '\n';
  os << "t_final = " << fmt(r.sim.final_state.t) << '\n';
  os << "steps = " << r.sim.steps << '\n';
  os << "rejected_steps = " << r.sim.rejected << '\n';
  os << "records = " << r.diag.records.size() << '\n';
  os << "verdict = " << to_string(c.verdict) << '\n';
  os << "log_slope = " << fmt(c.log_slope) << '\n';
  os << "monotone_fraction = " << fmt(c.monotone_fraction) << '\n';
  os << "variation = " << fmt(c.variation) << '\n';
  if (!c.note.empty()) os << "classification_note = " << c.note << '\n';
  const auto& th = r.config.output.thresholds;
  os << "threshold.bounded_variation = " << fmt(th.bounded_variation) << '\n';
  os << "threshold.bounded_slope = " << fmt(th.bounded_slope) << '\n';
  os << "threshold.growing_slope = " << fmt(th.growing_slope) << '\n';
  os << "threshold.monotone_fraction = " << fmt(th.monotone_fraction) << '\n';
  os << "threshold.min_records = " << th.min_records << '\n';
  os << "invariant.mass = " << b(inv.mass_ok) << '\n';
  os << "invariant.positivity = " << b(inv.positivity_ok) << '\n';
  os << "invariant.key_identity = " << b(inv.key_ok) << '\n';
  os << "mass_drift = " << fmt(inv.mass_drift) << '\n';
  os << "min_u = " << fmt(inv.min_u) << '\n';
  os << "min_v = " << fmt(inv.min_v) << '\n';
  os << "key_resid_scaled = " << fmt(inv.key_resid_scaled) << '\n';
  os << "key_resid_bound = " << fmt(inv.key_bound) << '\n';
  os << "gamma_obs = " << fmt(r.envelope.gamma_obs) << '\n';
  os << "envelope.max_excess = " << fmt(r.envelope.max_excess) << '\n';
  os << "envelope = " << b(r.envelope.holds) << '\n';
  if (r.diag.max_semigroup_excess > -INFINITY)
    os << "semigroup.max_excess = " << fmt(r.diag.max_semigroup_excess) << '\n';
  for (const auto& lv : r.ladder.levels)
    os << "ladder.p" << lv.p << " = sup " << fmt(lv.sup) << " slope " << fmt(lv.slope) << ' ' << b(lv.passes) << '\n';
  if (r.ladder.inconclusive) os << "ladder = Inconclusive\n";
  os << "ratio.A_est = " << fmt(r.ratio.a_est) << '\n';
  os << "ratio.B_est = " << fmt(r.ratio.b_est) << '\n';
  os << "ratio.trend = " << fmt(r.ratio.trend) << '\n';
  if (r.energy) {
    os << "energy.C = " << fmt(r.energy->c_fit) << '\n';
    os << "energy.max_validation_ratio = " << fmt(r.energy->max_validation_ratio) << '\n';
    os << "energy.inequality = " << b(r.energy->holds) << '\n';
  }
  if (r.key_inequality) {
    const auto& k = *r.key_inequality;
    os << "key_inequality.k = " << fmt(k.k) << '\n';
    os << "key_inequality.l = " << fmt(k.l) << '\n';
    os << "key_inequality.C1 = " << fmt(k.c1) << '\n';
    os << "key_inequality.C2 = " << fmt(k.c2) << '\n';
    os << "key_inequality.C3_calibration = " << fmt(k.c3_calibration) << '\n';
    os << "key_inequality.C3_full = " << fmt(k.c3_full) << '\n';
    os << "key_inequality.stable = " << b(k.stable) << '\n';
  }
  if (!r.key_inequality_error.empty()) os << "key_inequality.error = " << r.key_inequality_error << '\n';
  os << "wall_time = " << fmt(r.wall_seconds) << '\n';
}

ScenarioResult run_scenario(const RunConfig& config) {
  const fs::path dir = output_dir_for(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  ScenarioResult res = execute(config);
  res.out_dir = dir;
  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("config.txt");
    os << serialize(config);
  }
  {
    auto os = open("diagnostics.csv");
    write_diagnostics_csv(os, res.diag);
  }
  {
    auto os = open("summary.txt");
    write_summary(os, res);
  }
  if (config.output.snapshots) {
    write_snapshot(dir / "u_final.ksf", res.sim.final_state.u);
    write_snapshot(dir / "v_final.ksf", res.sim.final_state.v);
  }
  return res;
}

ScenarioResult check_scenario(const RunConfig& config) {
  RunConfig c = config;
  c.sim.t_end = std::min(c.sim.t_end, 100.0 * c.sim.dt_init);
  c.output.variant_residual = true;
  c.output.keep_fields = false;
  return execute(c);
}

// ---------------------------------------------------------------- sweep

namespace {

std::string sweep_header(const SweepConfig& sc) {
  std::string h = "index,hash";
  for (const auto& a : sc.axes) h += "," + a.key;
  return h + ",status,verdict,log_slope,ratio_min,ratio_max,invariants,wall_time";
}

std::string sweep_row(const SweepConfig& sc, std::size_t i, const std::string& hash) {
  std::ostringstream os;
  os << i << ',' << hash;
  for (const auto& v : sc.point_values(i)) os << ',' << v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig cfg = build_config(sc.point(i));
    const ScenarioResult r = execute(cfg);
    os << ',' << to_string(r.sim.status) << ',' << to_string(r.classification.verdict) << ','
       << fmt(r.classification.log_slope) << ',' << fmt(r.ratio.a_est) << ',' << fmt(r.ratio.b_est) << ','
       << (r.invariants.all() ? "pass" : "fail");
  } catch (const std::exception&) {
    os << ",Error,Inconclusive,nan,nan,nan,fail";
  }
  os << ',' << fmt(seconds_since(t0));
  return os.str();
}

}  // namespace

SweepSummary run_sweep(const SweepConfig& sc, std::ostream* log) {
  SweepSummary sum;
  sum.total = sc.size();
  sum.results = sc.results.empty() ? output_dir_for(build_config(sc.point(0))).parent_path() / "sweep.csv"
                                   : fs::path(sc.results);
  if (sum.results.has_parent_path()) fs::create_directories(sum.results.parent_path());

  const std::string header = sweep_header(sc);
  std::vector<std::string> hashes(sum.total);
  for (std::size_t i = 0; i < sum.total; ++i) {
    try {
      hashes[i] = config_hash(build_config(sc.point(i)));
    } catch (const ConfigError&) {
      hashes[i] = "invalid-" + std::to_string(i);
    }
  }

  // Existing complete rows; a torn last line from an interrupted run is dropped.
  std::set<std::string> done;
  {
    std::ifstream is(sum.results, std::ios::binary);
    if (is) {
      std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
      if (!text.empty() && text.back() != '\n') text.erase(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
      std::istringstream ls(text);
      std::string line;
      bool first = true;
      while (std::getline(ls, line)) {
        if (first) {
          first = false;
          if (line != header) throw ConfigError("results file " + sum.results.string() + " has a different header");
          continue;
        }
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a != std::string::npos && b != std::string::npos) done.insert(line.substr(a + 1, b - a - 1));
      }
      std::ofstream os(sum.results, std::ios::binary | std::ios::trunc);
      os << (text.empty() ? header + "\n" : text);
    } else {
      std::ofstream os(sum.results, std::ios::binary);
      os << header << '\n';
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < sum.total; ++i) {
    if (done.count(hashes[i]))
      ++sum.skipped;
    else
      todo.push_back(i);
  }

  // Workers claim points in order; the writer appends finished rows strictly
  // in point order.
  std::ofstream out(sum.results, std::ios::binary | std::ios::app);
  std::mutex mu;
  std::map<std::size_t, std::string> finished;  // position in todo -> row
  std::size_t next_write = 0;
  std::atomic<std::size_t> next_claim{0};
  auto worker = [&] {
    while (true) {
      const std::size_t k = next_claim.fetch_add(1);
      if (k >= todo.size()) return;
      std::string row = sweep_row(sc, todo[k], hashes[todo[k]]);
      std::lock_guard<std::mutex> lock(mu);
      finished.emplace(k, std::move(row));
      while (!finished.empty() && finished.begin()->first == next_write) {
        const std::string& r = finished.begin()->second;
        out << r << '\n';
        out.flush();
        if (r.find(",Error,") != std::string::npos) ++sum.failed;
        if (log) *log << r << '\n';
        finished.erase(finished.begin());
        ++next_write;
        ++sum.ran;
      }
    }
  };
  const int width = std::max(1, std::min<int>(sc.width, static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < width; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return sum;
}

// ---------------------------------------------------------------- threshold scan

RunConfig scan_config(const ScanOptions& opt, double mass) {
  const double side = opt.side > 0.0 ? opt.side : 2.0 * std::numbers::pi;
  RunConfig c;
  c.grid.dim = 2;
  c.grid.lengths = {side, side};
  c.grid.counts = {opt.n, opt.n};
  c.sim.tau = opt.tau;
  c.sim.t_end = opt.t_end;
  c.sim.dt_init = 1e-3;
  c.sim.dt_min = 1e-7;
  c.sim.dt_max = opt.dt_max;
  c.sim.record_interval = opt.record_interval;
  c.gamma_kind = MotilityKind::Exponential;
  c.gamma_params.chi = opt.chi;
  c.init_u.kind = InitialKind::Gaussian;
  c.init_u.mass = mass;
  c.init_u.width = opt.width_cells * side / opt.n;
  if (opt.placement == "edge")
    c.init_u.center = {0.5 * side, 0.0};
  else if (opt.placement == "corner")
    c.init_u.center = {0.0, 0.0};
  else if (opt.placement != "center")
    throw ConfigError("placement must be center, edge or corner");
  c.init_v.kind = InitialKind::Constant;
  c.init_v.value = mass / (side * side);
  return c;
}

ScanReport threshold_scan(const ScanOptions& opt, std::ostream* log) {
  if (!(opt.chi > 0.0)) throw ConfigError("chi must be positive");
  if (!(opt.tau > 0.0)) throw ConfigError("tau must be positive");
  if (opt.depth < 0) throw ConfigError("depth must be non-negative");
  ScanReport rep;
  rep.lo = opt.lo > 0.0 ? opt.lo : 2.0 * std::numbers::pi;
  rep.hi = opt.hi > 0.0 ? opt.hi : 16.0 * std::numbers::pi;
  if (!(rep.lo < rep.hi)) throw ConfigError("need lo < hi");
  rep.reference = 4.0 * std::numbers::pi / opt.chi;

  auto classify_mass = [&](double mass) {
    const ScenarioResult r = execute(scan_config(opt, mass));
    ScanPoint p;
    p.mass = mass;
    p.verdict = r.classification.verdict;
    p.log_slope = r.classification.log_slope;
    p.monotone_fraction = r.classification.monotone_fraction;
    p.status = r.sim.status;
    p.wall_seconds = r.wall_seconds;
    rep.points.push_back(p);
    if (log)
      *log << "mass " << fmt(mass) << " -> " << to_string(p.verdict) << " (slope " << fmt(p.log_slope) << ", monotone "
           << fmt(p.monotone_fraction) << ", " << to_string(p.status) << ", " << p.wall_seconds << " s)\n";
    return p.verdict;
  };

  const Verdict vlo = classify_mass(rep.lo);
  if (vlo != Verdict::Bounded) {
    rep.error = "lower endpoint " + fmt(rep.lo) + " classified " + std::string(to_string(vlo)) +
                "; widen the bracket: lower --lo until it is Bounded";
    return rep;
  }
  const Verdict vhi = classify_mass(rep.hi);
  if (vhi != Verdict::Growing) {
    rep.error = "upper endpoint " + fmt(rep.hi) + " classified " + std::string(to_string(vhi)) +
                "; widen the bracket: raise --hi (or the horizon) until it is Growing";
    return rep;
  }
  for (int d = 0; d < opt.depth; ++d) {
    const double mid = 0.5 * (rep.lo + rep.hi);
    // anything short of Bounded moves the upper end, keeping lo certified Bounded
    if (classify_mass(mid) == Verdict::Bounded)
      rep.lo = mid;
    else
      rep.hi = mid;
  }
  rep.ok = true;
  return rep;
}

}  // namespace kslab
