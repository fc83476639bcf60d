#include "kslab/grid.hpp"

#include <cmath>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

Grid::Grid(int dim, std::span<const double> lengths, std::span<const int> counts) : dim_(dim) {
  if (dim < 1 || dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
  if (lengths.size() != static_cast<std::size_t>(dim) || counts.size() != static_cast<std::size_t>(dim))
    throw ConfigError("grid needs exactly " + std::to_string(dim) + " lengths and counts");
  size_ = 1;
  cell_volume_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) throw ConfigError("grid lengths must be positive");
    if (counts[a] < 2) throw ConfigError("grid counts must be at least 2");
    lengths_[a] = lengths[a];
    counts_[a] = counts[a];
    spacing_[a] = lengths[a] / counts[a];
    size_ *= static_cast<std::size_t>(counts[a]);
    cell_volume_ *= spacing_[a];
  }
}

std::array<int, 3> Grid::multi_index(std::size_t flat) const noexcept {
  const int i2 = static_cast<int>(flat % counts_[2]);
  flat /= counts_[2];
  const int i1 = static_cast<int>(flat % counts_[1]);
  const int i0 = static_cast<int>(flat / counts_[1]);
  return {i0, i1, i2};
}

std::array<double, 3> Grid::center(std::size_t flat) const noexcept {
  const auto idx = multi_index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = (idx[a] + 0.5) * spacing_[a];
  return x;
}

Grid build_grid(int dim, std::span<const double> lengths, std::span<const int> counts) {
  return Grid(dim, lengths, counts);
}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), data_(std::move(values)) {
  if (data_.size() != grid_.size()) throw ConfigError("field length does not match grid size");
}

void require_same_grid(const Field& a, const Field& b) {
  if (!a.same_grid(b)) throw ConfigError("fields live on different grids");
}

double integrate(const Field& f) { return kernels::parallel::sum(f.values()) * f.grid().cell_volume(); }

}  // namespace kslab
