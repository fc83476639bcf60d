#include "kslab/solvers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace kp = kernels::parallel;

std::string_view to_string(SolverKind kind) {
  return kind == SolverKind::Direct ? "direct" : "cg";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "direct") return SolverKind::Direct;
  if (name == "cg") return SolverKind::ConjugateGradient;
  throw ConfigError("unknown solver '" + std::string(name) + "' (expected direct or cg)");
}

ShiftedSystem::ShiftedSystem(const LinOp& op, SolveOptions options) : op_(&op), options_(options) {
  if (!(options_.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (options_.kind == SolverKind::Direct) {
    matrix_ = op.matrix();
    ldlt_.analyzePattern(matrix_);
  }
}

void ShiftedSystem::set(double shift, double beta) {
  diag_.clear();
  shift_ = shift;
  beta_ = beta;
  refresh();
}

void ShiftedSystem::set(std::span<const double> diag, double beta) {
  if (diag.size() != op_->size()) throw ConfigError("diagonal length does not match operator size");
  diag_.assign(diag.begin(), diag.end());
  shift_ = 0.0;
  beta_ = beta;
  refresh();
}

void ShiftedSystem::refresh() {
  factored_ = false;
  if (options_.kind != SolverKind::Direct) return;
  const SparseMatrix& lap = op_->matrix();
  for (int col = 0; col < lap.outerSize(); ++col) {
    SparseMatrix::InnerIterator src(lap, col);
    SparseMatrix::InnerIterator dst(matrix_, col);
    for (; src; ++src, ++dst) {
      double v = -beta_ * src.value();
      if (src.row() == col) v += (diag_.empty() ? 0.0 : diag_[col]) + shift_;
      dst.valueRef() = v;
    }
  }
  ldlt_.factorize(matrix_);
  if (ldlt_.info() != Eigen::Success) throw SolverError("sparse LDL^T factorization failed", INFINITY);
  factored_ = true;
}

void ShiftedSystem::apply(std::span<const double> x, std::span<double> y) const {
  kp::shifted(op_->stencil(), diag_, shift_, beta_, x, y);
}

SolveStats ShiftedSystem::solve(std::span<const double> b, std::span<double> x) const {
  if (b.size() != op_->size() || x.size() != op_->size()) throw ConfigError("solve: vector length mismatch");
  if (options_.kind == SolverKind::Direct) {
    if (!factored_) throw SolverError("system used before set()", INFINITY);
    Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> xx(x.data(), static_cast<Eigen::Index>(x.size()));
    xx = ldlt_.solve(bb);
    return {};
  }
  return solve_cg(b, x);
}

Field ShiftedSystem::solve(const Field& b) const {
  Field x(b.grid());
  if (options_.kind == SolverKind::ConjugateGradient) std::copy(b.values().begin(), b.values().end(), x.values().begin());
  solve(b.values(), x.values());
  return x;
}

SolveStats ShiftedSystem::solve_cg(std::span<const double> b, std::span<double> x) const {
  const std::size_t n = b.size();
  int cap = options_.max_iterations;
  if (cap <= 0) cap = static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 200;

  // Jacobi preconditioner: diagonal of A.
  std::vector<double> inv_diag(n);
  const Eigen::VectorXd lap_diag = op_->matrix().diagonal();
  for (std::size_t i = 0; i < n; ++i)
    inv_diag[i] = 1.0 / ((diag_.empty() ? 0.0 : diag_[i]) + shift_ - beta_ * lap_diag[static_cast<Eigen::Index>(i)]);

  SolveStats stats;
  const double bnorm = kp::norm_inf(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double rel = kp::norm_inf(r) / bnorm;
  kp::multiply(r, inv_diag, z);
  p = z;
  double rz = kp::dot(r, z);
  int it = 0;
  while (rel > options_.tol && it < cap) {
    apply(p, q);
    const double alpha = rz / kp::dot(p, q);
    kp::axpy(alpha, p, x);
    kp::axpy(-alpha, q, r);
    rel = kp::norm_inf(r) / bnorm;
    ++it;
    if (rel <= options_.tol) break;
    kp::multiply(r, inv_diag, z);
    const double rz_new = kp::dot(r, z);
    kp::xpay(z, rz_new / rz, p);
    rz = rz_new;
  }
  stats.iterations = it;
  stats.relative_residual = rel;
  if (rel <= options_.tol) return stats;

  if (options_.dense_fallback && n <= 4096) {
    solve_dense(b, x);
    stats.dense_fallback = true;
    std::vector<double> ax(n);
    apply(x, ax);
    for (std::size_t i = 0; i < n; ++i) ax[i] -= b[i];
    stats.relative_residual = kp::norm_inf(ax) / bnorm;
    return stats;
  }
  std::ostringstream os;
  os << "conjugate gradients did not converge in " << it << " iterations (relative residual " << rel << ")";
  throw SolverError(os.str(), rel);
}

void ShiftedSystem::solve_dense(std::span<const double> b, std::span<double> x) const {
  const Eigen::Index n = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd dense = Eigen::MatrixXd(-beta_ * Eigen::MatrixXd(op_->matrix()));
  for (Eigen::Index i = 0; i < n; ++i) dense(i, i) += (diag_.empty() ? 0.0 : diag_[i]) + shift_;
  Eigen::Map<const Eigen::VectorXd> bb(b.data(), n);
  Eigen::Map<Eigen::VectorXd> xx(x.data(), n);
  xx = dense.ldlt().solve(bb);
}

Field helmholtz_solve(const Grid& grid, const LinOp& op, const Field& f, double tol, SolverKind kind,
                      SolveStats* stats) {
  if (!(grid == op.grid()) || !(f.grid() == grid)) throw ConfigError("helmholtz_solve: grid mismatch");
  SolveOptions opts;
  opts.kind = kind;
  opts.tol = tol;
  ShiftedSystem sys(op, opts);
  sys.set(1.0, 1.0);
  Field z(grid);
  if (kind == SolverKind::ConjugateGradient) std::copy(f.values().begin(), f.values().end(), z.values().begin());
  const auto s = sys.solve(f.values(), z.values());
  if (stats) *stats = s;
  return z;
}

Field semigroup_apply(const Grid& grid, const LinOp& op, double a, double t, const Field& f, int substeps,
                      SolveOptions options) {
  if (!(a > 0.0)) throw ConfigError("semigroup rate must be positive");
  if (!(t >= 0.0)) throw ConfigError("semigroup time must be non-negative");
  if (substeps < 1) throw ConfigError("semigroup needs at least one substep");
  if (!(grid == op.grid()) || !(f.grid() == grid)) throw ConfigError("semigroup_apply: grid mismatch");
  if (t == 0.0) return f;
  const double dt = t / substeps;
  ShiftedSystem sys(op, options);
  sys.set(1.0 + a * dt, a * dt);
  Field z = f;
  Field next(grid);
  for (int s = 0; s < substeps; ++s) {
    if (options.kind == SolverKind::ConjugateGradient) std::copy(z.values().begin(), z.values().end(), next.values().begin());
    sys.solve(z.values(), next.values());
    std::swap(z, next);
  }
  return z;
}

}  // namespace kslab
