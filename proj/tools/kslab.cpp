// Command-line front end: run, sweep, scan-threshold, check, bm-check.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <numbers>

#include "kslab/errors.hpp"
#include "kslab/harness.hpp"

using namespace kslab;

namespace {

std::vector<Assignment> overrides_from(const std::vector<std::string>& sets) {
  std::vector<Assignment> out;
  for (const auto& s : sets) out.push_back(parse_override(s));
  return out;
}

void print_invariants(const ScenarioResult& r) {
  const auto& inv = r.invariants;
  std::printf("status %s  verdict %s  steps %d  t %.6g\n", std::string(to_string(r.sim.status)).c_str(),
              std::string(to_string(r.classification.verdict)).c_str(), r.sim.steps, r.sim.final_state.t);
  if (!r.sim.message.empty()) std::printf("  %s\n", r.sim.message.c_str());
  std::printf("  mass drift      %.3e  %s\n", inv.mass_drift, inv.mass_ok ? "ok" : "FAIL");
  std::printf("  min u / min v   %.3e / %.3e  %s\n", inv.min_u, inv.min_v, inv.positivity_ok ? "ok" : "FAIL");
  std::printf("  key residual    %.3e (bound %.1e) x ||u||  %s\n", inv.key_resid_scaled, inv.key_bound,
              inv.key_ok ? "ok" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kslab: structure-preserving Keller-Segel laboratory"};
  app.require_subcommand(1);
  std::vector<std::string> sets;

  std::string run_path, sweep_path, check_path;
  auto* run = app.add_subcommand("run", "run one scenario and write its artifacts");
  run->add_option("config", run_path, "config file")->required();
  run->add_option("--set", sets, "override section.key=value");

  auto* sweep = app.add_subcommand("sweep", "resumable parameter sweep");
  sweep->add_option("config", sweep_path, "sweep config file")->required();
  sweep->add_option("--set", sets, "override section.key=value");

  auto* check = app.add_subcommand("check", "invariant suite on a short horizon");
  check->add_option("config", check_path, "config file")->required();
  check->add_option("--set", sets, "override section.key=value");

  ScanOptions scan;
  auto* sc = app.add_subcommand("scan-threshold", "bisect the critical mass for gamma = exp(-chi s)");
  sc->add_option("--chi", scan.chi, "chemotactic rate")->capture_default_str();
  sc->add_option("--tau", scan.tau, "relaxation time")->capture_default_str();
  sc->add_option("--lo", scan.lo, "lower mass (default 2 pi)");
  sc->add_option("--hi", scan.hi, "upper mass (default 16 pi)");
  sc->add_option("--depth", scan.depth, "bisection steps")->capture_default_str();
  sc->add_option("--n", scan.n, "cells per axis")->capture_default_str();
  sc->add_option("--t-end", scan.t_end, "horizon")->capture_default_str();
  sc->add_option("--dt-max", scan.dt_max, "largest step")->capture_default_str();
  sc->add_option("--placement", scan.placement, "Gaussian position")
      ->check(CLI::IsMember({"center", "edge", "corner"}))
      ->capture_default_str();

  double bm_lambda = 1.0, bm_r = 2.0 * std::numbers::pi, bm_width = 0.1, bm_tol = 1e-10;
  int bm_n = 128;
  auto* bm = app.add_subcommand("bm-check", "exponential integrability of the Helmholtz solution");
  bm->add_option("--lambda", bm_lambda, "mass of f")->capture_default_str();
  bm->add_option("--R", bm_r, "exponent")->capture_default_str();
  bm->add_option("--width", bm_width, "Gaussian width; <= 0 means one cell")->capture_default_str();
  bm->add_option("--n", bm_n, "coarse resolution (compared with 2n)")->capture_default_str();
  bm->add_option("--tol", bm_tol, "solver tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto ov = overrides_from(sets);
    if (*run) {
      const RunConfig cfg = load_config(run_path, ov);
      const ScenarioResult r = run_scenario(cfg);
      print_invariants(r);
      std::printf("  output          %s\n", r.out_dir.string().c_str());
      return r.exit_code();
    }
    if (*check) {
      const RunConfig cfg = load_config(check_path, ov);
      const ScenarioResult r = check_scenario(cfg);
      print_invariants(r);
      return r.exit_code();
    }
    if (*sweep) {
      const SweepConfig cfg = parse_sweep_config(read_text_file(sweep_path), ov);
      const SweepSummary s = run_sweep(cfg, &std::cout);
      std::printf("%zu points: %zu ran, %zu skipped, %zu failed -> %s\n", s.total, s.ran, s.skipped, s.failed,
                  s.results.string().c_str());
      return s.failed ? kExitRuntime : kExitOk;
    }
    if (*sc) {
      const ScanReport rep = threshold_scan(scan, &std::cout);
      if (!rep.ok) {
        std::fprintf(stderr, "widen the bracket: %s\n", rep.error.c_str());
        return kExitConfig;
      }
      std::printf("bracket [%.6g, %.6g]  midpoint %.6g  reference 4 pi / chi = %.6g\n", rep.lo, rep.hi,
                  rep.midpoint(), rep.reference);
      return kExitOk;
    }
    if (*bm) {
      const BrezisMerleReport rep = brezis_merle_check(bm_lambda, bm_r, bm_width, bm_n, bm_tol);
      std::printf("lambda %.6g  R %.6g  width %.6g\n", rep.lambda, rep.R, rep.width);
      std::printf("  log integral n=%d: %.10g   n=%d: %.10g   relative change %.4g\n", rep.n, rep.log_coarse,
                  2 * rep.n, rep.log_fine, rep.relative_change);
      std::printf("  R * lambda %s 4 pi\n", rep.R * rep.lambda < 4.0 * std::numbers::pi ? "<" : ">=");
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error:\n%s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
