#pragma once

#include <Eigen/SparseCholesky>
#include <span>
#include <string_view>
#include <vector>

#include "kslab/grid.hpp"
#include "kslab/linop.hpp"

namespace kslab {

enum class SolverKind {
  /// Sparse LDL^T with fill-reducing ordering; pattern analysed once.
  Direct,
  /// Jacobi-preconditioned conjugate gradients on the OpenMP kernels.
  ConjugateGradient,
};

std::string_view to_string(SolverKind kind);
SolverKind parse_solver_kind(std::string_view name);

struct SolveOptions {
  SolverKind kind = SolverKind::Direct;
  /// CG stops when ||b - A x||_inf <= tol * ||b||_inf.
  double tol = 1e-10;
  /// 0 selects the default cap 10 * sqrt(N) + 200.
  int max_iterations = 0;
  /// Dense LDL^T when CG fails on grids with at most 4096 cells.
  bool dense_fallback = true;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool dense_fallback = false;
};

/// The SPD M-matrix  diag(d) + shift*I - beta*L  (beta >= 0, d + shift > 0)
/// and its solver. The operator L must outlive the system. set() refactors;
/// solve() is const and reentrant (workspaces are local).
class ShiftedSystem {
 public:
  ShiftedSystem(const LinOp& op, SolveOptions options = {});

  void set(double shift, double beta);
  void set(std::span<const double> diag, double beta);

  /// Solves A x = b. For CG the incoming x is used as the initial guess.
  SolveStats solve(std::span<const double> b, std::span<double> x) const;
  Field solve(const Field& b) const;

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const;

  const SolveOptions& options() const noexcept { return options_; }
  const LinOp& op() const noexcept { return *op_; }
  double shift() const noexcept { return shift_; }
  double beta() const noexcept { return beta_; }

 private:
  void refresh();
  SolveStats solve_cg(std::span<const double> b, std::span<double> x) const;
  void solve_dense(std::span<const double> b, std::span<double> x) const;

  const LinOp* op_;
  SolveOptions options_;
  std::vector<double> diag_;  // empty means zero
  double shift_ = 1.0;
  double beta_ = 1.0;
  SparseMatrix matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  bool factored_ = false;
};

/// Solves (I - L) z = f with Neumann closure. Throws SolverError on
/// non-convergence.
Field helmholtz_solve(const Grid& grid, const LinOp& op, const Field& f, double tol,
                      SolverKind kind = SolverKind::Direct, SolveStats* stats = nullptr);

/// Approximates exp(a (L - I) t) f by `substeps` implicit-Euler resolvent
/// applications ((1 + a dt) I - a dt L)^-1 with dt = t / substeps.
Field semigroup_apply(const Grid& grid, const LinOp& op, double a, double t, const Field& f, int substeps,
                      SolveOptions options = {});

}  // namespace kslab
