#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/errors.hpp"
#include "kslab/field_io.hpp"
#include "kslab/harness.hpp"

using namespace kslab;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(# smallest useful run
grid.dim = 2
grid.lengths = 2
grid.counts = 12
sim.t_end = 0.2
gamma.kind = exponential
gamma.chi = 1
init_u.kind = cosine
init_u.mean = 1
init_u.amplitude = 0.3
init_v.kind = constant
init_v.value = 1
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kslab-test-" + name + "-" + std::to_string(std::random_device{}()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

std::string error_of(const std::string& text, const std::vector<Assignment>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

// drops the trailing wall_time column of every line
std::string without_wall_time(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("minimal config parses with defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.grid.dim == 2);
  CHECK(c.grid.lengths == std::vector<double>{2.0, 2.0});
  CHECK(c.grid.counts == std::vector<int>{12, 12});
  CHECK(c.sim.t_end == 0.2);
  CHECK(c.sim.tau == 1.0);
  CHECK(c.sim.solver == SolverKind::Direct);
  CHECK(c.gamma_kind == MotilityKind::Exponential);
  CHECK(c.gamma_params.chi == 1.0);
  CHECK(c.init_u.kind == InitialKind::Cosine);
  CHECK(c.init_u.amplitude == 0.3);
  CHECK(c.output.ladder_levels == 4);
}

TEST_CASE("serialize round-trips and the hash is stable") {
  const RunConfig c = parse_config(kMinimal);
  const std::string text = serialize(c);
  const RunConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(serialize(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  // a gaussian with explicit center under an algebraic family
  const RunConfig g = parse_config(
      "grid.counts = 12\ngamma.kind = algebraic\ngamma.k = 1.5\ninit_u.kind = gaussian\ninit_u.mass = 3\n"
      "init_u.center = 0.25, 0.75\ninit_v.kind = noise\ninit_v.seed = 7\n");
  CHECK(g.init_u.center == std::vector<double>{0.25, 0.75});
  CHECK(parse_config(serialize(g)) == g);
}

TEST_CASE("hash ignores output.dir and follows every computed key") {
  const RunConfig a = parse_config(kMinimal, {parse_override("output.dir=/tmp/a")});
  const RunConfig b = parse_config(kMinimal, {parse_override("output.dir=/tmp/b")});
  CHECK(config_hash(a) == config_hash(b));
  const RunConfig c = parse_config(kMinimal, {parse_override("sim.tau=2")});
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(parse_config(kMinimal, {parse_override("sim.tau=1.0")})) == config_hash(a));
}

TEST_CASE("config errors name the line and the problem") {
  SUBCASE("missing family parameter") {
    const std::string txt = "grid.counts = 8\ngamma.kind = algebraic\ninit_u.kind = constant\ninit_v.kind = constant\n";
    CHECK(error_of(txt).find("gamma.kind = algebraic requires gamma.k") != std::string::npos);
  }
  SUBCASE("tau must be positive") {
    CHECK(error_of(kMinimal, {parse_override("sim.tau=-1")}).find("tau must be positive") != std::string::npos);
  }
  SUBCASE("unknown key with its line number") {
    const std::string e = error_of(std::string(kMinimal) + "sim.taux = 3\n");
    CHECK(e.find("line 13") != std::string::npos);
    CHECK(e.find("sim.taux") != std::string::npos);
  }
  SUBCASE("syntax and duplicates") {
    CHECK(error_of("grid.dim 2\n").find("line 1") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "grid.dim = 3\n").find("duplicate") != std::string::npos);
  }
  SUBCASE("parameter that does not apply") {
    CHECK(error_of(std::string(kMinimal) + "gamma.k = 2\n").find("does not apply") != std::string::npos);
  }
  SUBCASE("missing gamma.kind") {
    CHECK(error_of("grid.counts = 8\n").find("gamma.kind") != std::string::npos);
  }
  SUBCASE("inadmissible initial data") {
    CHECK_FALSE(error_of(kMinimal, {parse_override("init_v.value=0")}).empty());
    CHECK_FALSE(error_of(kMinimal, {parse_override("init_u.amplitude=2")}).empty());
  }
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
}

TEST_CASE("overrides replace file values") {
  const RunConfig c = parse_config(kMinimal, {parse_override("grid.counts=10,14"), parse_override("sim.solver=cg")});
  CHECK(c.grid.counts == std::vector<int>{10, 14});
  CHECK(c.sim.solver == SolverKind::ConjugateGradient);
}

TEST_CASE("KSF1 snapshots") {
  const Grid g(3, std::vector<double>{1, 2, 3}, std::vector<int>{3, 4, 5});
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(1.0 + i) * 1e-7 + i;
  std::stringstream ss;
  write_snapshot(ss, f);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == kSnapshotHeaderBytes + 8 * 60);
  CHECK(bytes.substr(0, 4) == "KSF1");
  // little-endian header words
  CHECK(static_cast<unsigned char>(bytes[4]) == 3);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  CHECK(static_cast<unsigned char>(bytes[12]) == 4);
  CHECK(static_cast<unsigned char>(bytes[16]) == 5);

  std::istringstream in(bytes);
  const Field back = read_snapshot(in, std::vector<double>{1, 2, 3});
  CHECK(back.grid() == g);
  CHECK(back.vector() == f.vector());

  auto bad = [&](std::string b) {
    std::istringstream is(b);
    CHECK_THROWS_AS(read_snapshot(is, std::vector<double>{1, 2, 3}), FormatError);
  };
  std::string b1 = bytes;
  b1[0] = 'X';
  bad(b1);
  bad(bytes.substr(0, bytes.size() - 3));
  bad(bytes.substr(0, 10));
  bad(bytes + "x");
  std::string b2 = bytes;
  b2[4] = 4;
  bad(b2);

  // 2D: unused axis carries 1
  const Grid g2(2, std::vector<double>{1, 1}, std::vector<int>{2, 3});
  std::stringstream s2;
  write_snapshot(s2, Field(g2, 1.5));
  CHECK(static_cast<unsigned char>(s2.str()[16]) == 1);
  const Field f2 = read_snapshot(s2, std::vector<double>{1, 1});
  CHECK(f2.grid() == g2);
}

TEST_CASE("field CSV layout") {
  const Grid g(2, std::vector<double>{1, 1}, std::vector<int>{2, 2});
  Field f(g, std::vector<double>{1, 2, 3, 4});
  std::ostringstream os;
  write_field_csv(os, f);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,y,value");
  std::getline(is, line);
  CHECK(line == "0.25,0.25,1");
  std::getline(is, line);
  CHECK(line == "0.25,0.75,2");
}

TEST_CASE("diagnostics CSV header") {
  std::ostringstream os;
  write_diagnostics_csv(os, RunDiagnostics{});
  const std::string hdr = os.str().substr(0, os.str().find('\n'));
  CHECK(hdr == kDiagnosticsHeader);
  CHECK(std::count(hdr.begin(), hdr.end(), ',') == 18);
}

TEST_CASE("run_scenario writes its artifacts") {
  const fs::path dir = scratch("run");
  RunConfig c = parse_config(kMinimal, {parse_override("output.snapshots=true")});
  c.output.dir = (dir / "out").string();
  const ScenarioResult r = run_scenario(c);
  CHECK(r.exit_code() == kExitOk);
  CHECK(r.invariants.all());
  for (const char* f : {"config.txt", "diagnostics.csv", "summary.txt", "u_final.ksf", "v_final.ksf"})
    CHECK(fs::exists(dir / "out" / f));
  CHECK(parse_config(slurp(dir / "out" / "config.txt")) == c);
  const Field u = read_snapshot(dir / "out" / "u_final.ksf", std::vector<double>{2, 2});
  CHECK(u.vector() == r.sim.final_state.u.vector());
  CHECK(slurp(dir / "out" / "summary.txt").find("status = Completed") != std::string::npos);

  // default location is keyed by the hash
  c.output.dir.clear();
  ::setenv("KSLAB_OUTPUT_ROOT", dir.c_str(), 1);
  CHECK(output_dir_for(c) == dir / ("run-" + config_hash(c)));
  ::unsetenv("KSLAB_OUTPUT_ROOT");
  fs::remove_all(dir);
}

TEST_CASE("check_scenario keeps the horizon short") {
  const RunConfig c = parse_config(kMinimal, {parse_override("sim.t_end=50")});
  const ScenarioResult r = check_scenario(c);
  CHECK(r.exit_code() == kExitOk);
  CHECK(r.sim.final_state.t <= 100 * c.sim.dt_init * (1 + 1e-12));
  CHECK(r.invariants.key_ok);
}

TEST_CASE("sweep runs, resumes and stays byte-identical") {
  const fs::path dir = scratch("sweep");
  const std::string results = (dir / "sweep.csv").string();
  const std::string txt =
      "grid.dim = 1\ngrid.lengths = 1\ngrid.counts = 24\nsim.t_end = 2\nsim.record_interval = 0.1\n"
      "gamma.kind = bounded_oscillatory\ngamma.a = 1\ngamma.b = 0\ngamma.omega = 1\n"
      "init_u.kind = cosine\ninit_v.kind = constant\n"
      "sweep.axis.init_u.amplitude = 0.1, 0.2\nsweep.axis.sim.tau = 1, 2\nsweep.width = 2\n"
      "sweep.results = " + results + "\n";
  const SweepConfig sc = parse_sweep_config(txt);
  REQUIRE(sc.size() == 4);
  CHECK(sc.point_values(1) == std::vector<std::string>{"0.1", "2"});

  const SweepSummary s1 = run_sweep(sc);
  CHECK(s1.ran == 4);
  CHECK(s1.failed == 0);
  const std::string full = slurp(results);
  std::istringstream is(full);
  std::string line;
  std::getline(is, line);
  CHECK(line == "index,hash,init_u.amplitude,sim.tau,status,verdict,log_slope,ratio_min,ratio_max,invariants,wall_time");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.find(",Completed,Bounded,") != std::string::npos);
    CHECK(line.find(",pass,") != std::string::npos);
  }
  CHECK(rows == 4);

  // rerun: nothing to do
  const SweepSummary s2 = run_sweep(sc);
  CHECK(s2.skipped == 4);
  CHECK(s2.ran == 0);
  CHECK(slurp(results) == full);

  // interrupted after two rows with a torn third
  {
    std::size_t cut = 0;
    for (int k = 0; k < 3; ++k) cut = full.find('\n', cut) + 1;
    std::ofstream os(results, std::ios::binary | std::ios::trunc);
    os << full.substr(0, cut) << full.substr(cut, 7);
  }
  const SweepSummary s3 = run_sweep(sc);
  CHECK(s3.skipped == 2);
  CHECK(s3.ran == 2);
  CHECK(without_wall_time(slurp(results)) == without_wall_time(full));
  fs::remove_all(dir);
}

TEST_CASE("threshold scan rejects a bracket it cannot confirm") {
  ScanOptions o;
  o.n = 16;
  o.t_end = 10.0;
  o.lo = 1.0;
  o.hi = 2.0;
  o.depth = 1;
  const ScanReport r = threshold_scan(o);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("widen") != std::string::npos);
  CHECK(r.reference == doctest::Approx(4.0 * std::numbers::pi));
}

}  // TEST_SUITE
