#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace kslab {

/// Uniform cell-centered grid on the box [0, L_0] x ... x [0, L_{d-1}].
/// Unused axes carry count 1. Cell (i0, i1, i2) has flat index
/// (i0 * n1 + i1) * n2 + i2 (row-major, last axis fastest).
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::span<const double> lengths, std::span<const int> counts);

  int dim() const noexcept { return dim_; }
  double length(int axis) const noexcept { return lengths_[axis]; }
  int count(int axis) const noexcept { return counts_[axis]; }
  double spacing(int axis) const noexcept { return spacing_[axis]; }
  const std::array<int, 3>& counts() const noexcept { return counts_; }
  const std::array<double, 3>& lengths() const noexcept { return lengths_; }

  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double domain_volume() const noexcept { return cell_volume_ * static_cast<double>(size_); }

  std::size_t index(int i0, int i1 = 0, int i2 = 0) const noexcept {
    return (static_cast<std::size_t>(i0) * counts_[1] + i1) * counts_[2] + i2;
  }
  std::array<int, 3> multi_index(std::size_t flat) const noexcept;
  /// Cell-center coordinates (j + 1/2) h per axis; unused axes are 0.
  std::array<double, 3> center(std::size_t flat) const noexcept;

  bool operator==(const Grid& o) const noexcept {
    return dim_ == o.dim_ && counts_ == o.counts_ && lengths_ == o.lengths_;
  }

 private:
  int dim_ = 0;
  std::array<double, 3> lengths_{1.0, 1.0, 1.0};
  std::array<int, 3> counts_{1, 1, 1};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

Grid build_grid(int dim, std::span<const double> lengths, std::span<const int> counts);

/// One real value per grid cell, tagged with the grid it lives on.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0) : grid_(grid), data_(grid.size(), value) {}
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& vector() const noexcept { return data_; }

  bool same_grid(const Field& o) const noexcept { return grid_ == o.grid_; }

 private:
  Grid grid_;
  std::vector<double> data_;
};

/// Throws ConfigError if the fields live on different grids.
void require_same_grid(const Field& a, const Field& b);

/// sum(f) * h^d
double integrate(const Field& f);

}  // namespace kslab
