#include "kslab/linop.hpp"

#include <vector>

#include "kslab/errors.hpp"

namespace kslab {

LinOp::LinOp(const Grid& grid) : grid_(grid) {
  if (grid.size() == 0) throw ConfigError("cannot build an operator on an empty grid");
  stencil_.dim = grid.dim();
  stencil_.n = grid.counts();
  for (int a = 0; a < 3; ++a)
    stencil_.inv_h2[a] = a < grid.dim() ? 1.0 / (grid.spacing(a) * grid.spacing(a)) : 0.0;

  const auto n = grid.counts();
  const std::size_t strides[3] = {static_cast<std::size_t>(n[1]) * n[2], static_cast<std::size_t>(n[2]), 1};
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(grid.size() * (2 * grid.dim() + 1));
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto idx = grid.multi_index(c);
    double diag = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double w = stencil_.inv_h2[a];
      if (idx[a] > 0) {
        triplets.emplace_back(static_cast<int>(c), static_cast<int>(c - strides[a]), w);
        diag -= w;
      }
      if (idx[a] + 1 < n[a]) {
        triplets.emplace_back(static_cast<int>(c), static_cast<int>(c + strides[a]), w);
        diag -= w;
      }
    }
    triplets.emplace_back(static_cast<int>(c), static_cast<int>(c), diag);
  }
  const int N = static_cast<int>(grid.size());
  matrix_.resize(N, N);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
}

void LinOp::apply(std::span<const double> x, std::span<double> y) const {
  kernels::parallel::laplacian(stencil_, x, y);
}

Field LinOp::apply(const Field& x) const {
  if (!(x.grid() == grid_)) throw ConfigError("field grid does not match operator grid");
  Field y(grid_);
  apply(x.values(), y.values());
  return y;
}

LinOp laplacian(const Grid& grid) { return LinOp(grid); }

}  // namespace kslab
