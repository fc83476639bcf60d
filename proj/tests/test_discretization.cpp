#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"
#include "kslab/linop.hpp"
#include "kslab/solvers.hpp"

using namespace kslab;
namespace kp = kernels::parallel;
using std::numbers::pi;

namespace {

Grid line(int n, double L = 1.0) { return Grid(1, std::vector<double>{L}, std::vector<int>{n}); }
Grid square(int n, double L = 1.0) { return Grid(2, std::vector<double>{L, L}, std::vector<int>{n, n}); }

Field random_field(const Grid& g, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = d(rng);
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// max |L f - f''| for f = cos(pi x) (1D) or cos(pi x) cos(pi y) (2D) on the unit box
double laplacian_error(int dim, int n) {
  const Grid g = dim == 1 ? line(n) : square(n);
  const LinOp op(g);
  Field f(g), exact(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto x = g.center(c);
    f[c] = std::cos(pi * x[0]) * (dim == 2 ? std::cos(pi * x[1]) : 1.0);
    exact[c] = -dim * pi * pi * f[c];
  }
  return max_abs_diff(op.apply(f), exact);
}

double helmholtz_error(int n, SolverKind kind) {
  const Grid g = line(n);
  const LinOp op(g);
  Field f(g), exact(g);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double x = g.center(c)[0];
    f[c] = 1.0 + std::cos(pi * x);
    exact[c] = 1.0 + std::cos(pi * x) / (1.0 + pi * pi);
  }
  return max_abs_diff(helmholtz_solve(g, op, f, 1e-12, kind), exact);
}

}  // namespace

TEST_SUITE("discretization") {

TEST_CASE("build_grid examples") {
  const Grid g1 = build_grid(1, std::vector<double>{1.0}, std::vector<int>{4});
  CHECK(g1.spacing(0) == 0.25);
  CHECK(g1.size() == 4);
  const double centers[4] = {0.125, 0.375, 0.625, 0.875};
  for (std::size_t c = 0; c < 4; ++c) CHECK(g1.center(c)[0] == centers[c]);

  const Grid g2 = build_grid(2, std::vector<double>{2 * pi, 2 * pi}, std::vector<int>{64, 64});
  CHECK(g2.size() == 4096);
  CHECK(g2.spacing(1) == doctest::Approx(2 * pi / 64));
  CHECK(g2.domain_volume() == doctest::Approx(4 * pi * pi));

  const Grid g3 = build_grid(3, std::vector<double>{1, 1, 1}, std::vector<int>{16, 16, 16});
  CHECK(g3.size() == 4096);
  CHECK(g3.cell_volume() == doctest::Approx(1.0 / 4096));
  CHECK(g3.index(1, 2, 3) == (1 * 16 + 2) * 16 + 3);
  CHECK(g3.multi_index(g3.index(5, 7, 11)) == std::array<int, 3>{5, 7, 11});
}

TEST_CASE("grid construction errors") {
  CHECK_THROWS_AS(Grid(0, std::vector<double>{}, std::vector<int>{}), ConfigError);
  CHECK_THROWS_AS(Grid(1, std::vector<double>{-1.0}, std::vector<int>{4}), ConfigError);
  CHECK_THROWS_AS(Grid(1, std::vector<double>{1.0}, std::vector<int>{1}), ConfigError);
  CHECK_THROWS_AS(Grid(2, std::vector<double>{1.0}, std::vector<int>{4, 4}), ConfigError);
  CHECK_THROWS_AS(Field(line(4), std::vector<double>(3)), ConfigError);
  CHECK_THROWS_AS(require_same_grid(Field(line(4)), Field(line(5))), ConfigError);
}

TEST_CASE("3-cell operator matches the hand-assembled matrix") {
  const LinOp op(line(3));
  const double s = 9.0;  // 1 / h^2
  const double expected[3][3] = {{-s, s, 0}, {s, -2 * s, s}, {0, s, -s}};
  const Eigen::MatrixXd m(op.matrix());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-15));
}

TEST_CASE("LinOp invariants in 1, 2 and 3 dimensions") {
  const std::vector<Grid> gs = {line(17, 2.0), Grid(2, std::vector<double>{1.0, 2.5}, std::vector<int>{13, 8}),
                                Grid(3, std::vector<double>{1, 2, 3}, std::vector<int>{5, 6, 7})};
  for (const auto& g : gs) {
    const LinOp op(g);
    // constants are in the kernel, exactly
    const Field one(g, 1.0);
    CHECK(kp::norm_inf(op.apply(one).values()) == 0.0);
    // symmetry
    const Field a = random_field(g, 1, -1, 1), b = random_field(g, 2, -1, 1);
    const double lab = kp::dot(op.apply(a).values(), b.values());
    const double alb = kp::dot(a.values(), op.apply(b).values());
    CHECK(std::abs(lab - alb) <= 1e-12 * std::abs(lab));
    // sign pattern and zero row sums; assembled form equals matrix-free form
    const SparseMatrix& m = op.matrix();
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
        if (it.row() != it.col()) CHECK(it.value() >= 0.0);
        rows[it.row()] += it.value();
        scale[it.row()] += std::abs(it.value());
      }
    for (int i = 0; i < m.rows(); ++i) CHECK(std::abs(rows[i]) <= 1e-14 * scale[i]);
    CHECK((Eigen::MatrixXd(m) - Eigen::MatrixXd(m).transpose()).norm() == 0.0);
    Eigen::Map<const Eigen::VectorXd> av(a.values().data(), a.size());
    const Eigen::VectorXd la = m * av;
    const Field lf = op.apply(a);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(la[i] == doctest::Approx(lf[i]).epsilon(1e-13));
  }
}

TEST_CASE("Laplacian is second order against the analytic Laplacian") {
  for (int dim : {1, 2}) {
    const double e1 = laplacian_error(dim, 32), e2 = laplacian_error(dim, 64), e3 = laplacian_error(dim, 128);
    INFO("dim " << dim << " errors " << e1 << " " << e2 << " " << e3);
    CHECK(e1 / e2 >= 3.6);
    CHECK(e1 / e2 <= 4.4);
    CHECK(e2 / e3 >= 3.6);
    CHECK(e2 / e3 <= 4.4);
  }
}

TEST_CASE("helmholtz_solve examples") {
  const Grid g = square(24);
  const LinOp op(g);
  SUBCASE("constants are fixed points") {
    for (auto kind : {SolverKind::Direct, SolverKind::ConjugateGradient}) {
      const Field z = helmholtz_solve(g, op, Field(g, 1.0), 1e-10, kind);
      for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("closed-form Neumann eigenfunction, second order") {
    for (auto kind : {SolverKind::Direct, SolverKind::ConjugateGradient}) {
      const double e64 = helmholtz_error(64, kind), e128 = helmholtz_error(128, kind);
      CHECK(e64 < 1e-3);
      CHECK(e64 / e128 >= 3.6);
      CHECK(e64 / e128 <= 4.4);
    }
  }
  SUBCASE("linearity") {
    const Field f = random_field(g, 5, 0, 1);
    Field f2(g);
    for (std::size_t i = 0; i < f.size(); ++i) f2[i] = 2.0 * f[i];
    const Field z = helmholtz_solve(g, op, f, 1e-10), z2 = helmholtz_solve(g, op, f2, 1e-10);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(z2[i] == doctest::Approx(2.0 * z[i]).epsilon(1e-10));
  }
}

TEST_CASE("helmholtz_solve properties on random data") {
  const double tol = 1e-10;
  for (auto kind : {SolverKind::Direct, SolverKind::ConjugateGradient}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Grid g = seed % 2 ? square(20 + static_cast<int>(seed)) : line(50 + static_cast<int>(seed));
      const LinOp op(g);
      const Field f = random_field(g, seed, 0.0, 1.0);
      SolveStats st;
      const Field z = helmholtz_solve(g, op, f, tol, kind, &st);
      // residual
      Field r = op.apply(z);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = z[i] - r[i] - f[i];
      CHECK(kp::norm_inf(r.values()) <= tol * kp::norm_inf(f.values()));
      // M-matrix positivity and maximum principle
      CHECK(kp::minmax(z.values()).min >= -tol);
      CHECK(kp::norm_inf(z.values()) <= kp::norm_inf(f.values()) + tol);
      // column sums one: integral preserved
      const double hd = g.cell_volume();
      const double sum_abs = kp::sum(f.values()) * hd;
      CHECK(std::abs(kp::sum(z.values()) - kp::sum(f.values())) * hd <= 10 * tol * sum_abs);
      // comparison principle
      Field f2 = f;
      const Field bump = random_field(g, seed + 100, 0.0, 0.5);
      for (std::size_t i = 0; i < f.size(); ++i) f2[i] += bump[i];
      const Field z2 = helmholtz_solve(g, op, f2, tol, kind);
      for (std::size_t i = 0; i < z.size(); ++i) REQUIRE(z[i] <= z2[i] + tol);
    }
  }
}

TEST_CASE("direct and CG agree; CG reports iterations") {
  const Grid g = square(40);
  const LinOp op(g);
  const Field f = random_field(g, 9, 0.0, 1.0);
  SolveStats cg;
  const Field zd = helmholtz_solve(g, op, f, 1e-12, SolverKind::Direct);
  const Field zc = helmholtz_solve(g, op, f, 1e-12, SolverKind::ConjugateGradient, &cg);
  CHECK(max_abs_diff(zd, zc) <= 1e-10);
  CHECK(cg.iterations > 0);
  CHECK_FALSE(cg.dense_fallback);
}

TEST_CASE("CG non-convergence: dense fallback on small grids, SolverError otherwise") {
  const Grid g = square(16);
  const LinOp op(g);
  const Field f = random_field(g, 3, 0.0, 1.0);
  SolveOptions opt;
  opt.kind = SolverKind::ConjugateGradient;
  opt.max_iterations = 1;
  {
    ShiftedSystem sys(op, opt);
    sys.set(1.0, 50.0);
    Field x = f;
    const SolveStats st = sys.solve(f.values(), x.values());
    CHECK(st.dense_fallback);
    CHECK(st.relative_residual <= opt.tol);
  }
  opt.dense_fallback = false;
  ShiftedSystem sys(op, opt);
  sys.set(1.0, 50.0);
  Field x = f;
  try {
    sys.solve(f.values(), x.values());
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual() > opt.tol);
  }
}

TEST_CASE("ShiftedSystem with variable diagonal") {
  const Grid g = square(12);
  const LinOp op(g);
  const Field d = random_field(g, 4, 0.5, 3.0), b = random_field(g, 5, 0.0, 1.0);
  for (auto kind : {SolverKind::Direct, SolverKind::ConjugateGradient}) {
    SolveOptions opt;
    opt.kind = kind;
    ShiftedSystem sys(op, opt);
    sys.set(d.values(), 0.3);
    Field x = sys.solve(b);
    Field ax(g);
    sys.apply(x.values(), ax.values());
    CHECK(max_abs_diff(ax, b) <= 1e-9);
  }
  ShiftedSystem sys(op);
  CHECK_THROWS_AS(sys.set(std::vector<double>(3, 1.0), 1.0), ConfigError);
  CHECK_THROWS_AS(parse_solver_kind("bicgstab"), ConfigError);
}

TEST_CASE("semigroup_apply examples") {
  SUBCASE("t = 0 returns f exactly") {
    const Grid g = line(32);
    const LinOp op(g);
    const Field f = random_field(g, 1, 0, 1);
    const Field z = semigroup_apply(g, op, 1.0, 0.0, f, 8);
    CHECK(max_abs_diff(z, f) == 0.0);
  }
  SUBCASE("constants follow the scalar ODE z' = -a z") {
    const Grid g = square(16);
    const LinOp op(g);
    const Field z = semigroup_apply(g, op, 1.0, 1.0, Field(g, 1.0), 64);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(z[i] - std::exp(-1.0)) <= 0.02 * std::exp(-1.0));
    // implicit Euler exactly: (1 + 1/64)^-64
    CHECK(z[0] == doctest::Approx(std::pow(1.0 + 1.0 / 64, -64)).epsilon(1e-12));
  }
  SUBCASE("cosine mode decays at rate 1 + pi^2") {
    const Grid g = line(256);
    const LinOp op(g);
    Field f(g);
    for (std::size_t c = 0; c < g.size(); ++c) f[c] = std::cos(pi * g.center(c)[0]);
    const double t = 0.1;
    const Field z = semigroup_apply(g, op, 1.0, t, f, 2000);
    const double decay = std::exp(-(1.0 + pi * pi) * t);
    double err = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) err = std::max(err, std::abs(z[c] - decay * f[c]));
    CHECK(err <= 0.01 * decay);
  }
  SUBCASE("non-negativity and sup bound") {
    const Grid g = square(20);
    const LinOp op(g);
    const Field f = random_field(g, 7, 0.0, 2.0);
    const Field z = semigroup_apply(g, op, 0.7, 2.0, f, 10);
    CHECK(kp::minmax(z.values()).min >= 0.0);
    CHECK(kp::norm_inf(z.values()) <= kp::norm_inf(f.values()));
  }
  SUBCASE("argument errors") {
    const Grid g = line(8);
    const LinOp op(g);
    CHECK_THROWS_AS(semigroup_apply(g, op, 0.0, 1.0, Field(g, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(semigroup_apply(g, op, 1.0, -1.0, Field(g, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(semigroup_apply(g, op, 1.0, 1.0, Field(g, 1.0), 0), ConfigError);
  }
}

}  // TEST_SUITE
