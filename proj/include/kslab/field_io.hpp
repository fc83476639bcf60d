#pragma once

#include <filesystem>
#include <iosfwd>

#include "kslab/grid.hpp"

namespace kslab {

// KSF1 snapshot layout (all little-endian):
//   "KSF1" | u32 dim | u32 n1 | u32 n2 | u32 n3 | f64 values[n1*n2*n3]
// Unused axes carry 1. Values are row-major, last axis fastest. The format
// stores no lengths; readers supply them.
inline constexpr std::size_t kSnapshotHeaderBytes = 20;

void write_snapshot(std::ostream& os, const Field& f);
void write_snapshot(const std::filesystem::path& path, const Field& f);

/// Throws FormatError on bad magic, inconsistent dims or truncation.
Field read_snapshot(std::istream& is, std::span<const double> lengths);
Field read_snapshot(const std::filesystem::path& path, std::span<const double> lengths);

/// Header "x[,y[,z]],value" then one row per cell with cell-center coordinates.
void write_field_csv(std::ostream& os, const Field& f);
void write_field_csv(const std::filesystem::path& path, const Field& f);

}  // namespace kslab
