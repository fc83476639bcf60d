#pragma once

#include <Eigen/SparseCore>

#include "kslab/grid.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Discrete Neumann Laplacian on a uniform cell-centered grid: the standard
/// 2d+1 point second difference, with reflected (ghost = self) neighbours at
/// the boundary. Symmetric, zero row and column sums, non-negative
/// off-diagonals. Immutable; apply() is reentrant.
class LinOp {
 public:
  explicit LinOp(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  const kernels::Stencil& stencil() const noexcept { return stencil_; }
  std::size_t size() const noexcept { return grid_.size(); }

  /// y = L x (matrix-free, OpenMP).
  void apply(std::span<const double> x, std::span<double> y) const;
  Field apply(const Field& x) const;

  /// Assembled sparse form of L (same values as apply()).
  const SparseMatrix& matrix() const noexcept { return matrix_; }

 private:
  Grid grid_;
  kernels::Stencil stencil_;
  SparseMatrix matrix_;
};

LinOp laplacian(const Grid& grid);

}  // namespace kslab
