#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kslab/analysis.hpp"
#include "kslab/dynamics.hpp"
#include "kslab/grid.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/motility.hpp"

namespace kslab {

// Line grammar:  section.key = value   with '#' comments and blank lines.
// Sections: grid, sim, gamma, init_u, init_v, output (plus sweep in sweep files).
// Lists are comma separated; a scalar grid.lengths / grid.counts broadcasts.

struct GridSpec {
  int dim = 2;
  std::vector<double> lengths{1.0, 1.0};
  std::vector<int> counts{32, 32};

  Grid build() const;
  bool operator==(const GridSpec&) const = default;
};

struct OutputSpec {
  std::string dir;  // empty: $KSLAB_OUTPUT_ROOT (or ./kslab-output) / run-<hash>
  bool snapshots = false;
  bool keep_fields = false;
  bool variant_residual = false;
  double burn_in = 1.0;
  int ladder_levels = 4;
  ClassifyThresholds thresholds;

  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  GridSpec grid;
  SimParams sim;
  MotilityKind gamma_kind = MotilityKind::Exponential;
  MotilityParams gamma_params;
  InitialSpec init_u;
  InitialSpec init_v;
  OutputSpec output;
  std::uint64_t seed = 1;

  MotilityFamily motility() const { return MotilityFamily(gamma_kind, gamma_params); }
  bool operator==(const RunConfig&) const = default;
};

/// One `section.key = value` assignment; line 0 marks a command-line override.
struct Assignment {
  std::string key;
  std::string value;
  int line = 0;
};

/// Splits text into assignments. Throws ConfigError listing every syntax error.
std::vector<Assignment> parse_assignments(std::string_view text);

/// "section.key=value" -> assignment with line 0.
Assignment parse_override(std::string_view text);

/// Later assignments replace earlier ones with the same key.
void apply_overrides(std::vector<Assignment>& base, const std::vector<Assignment>& overrides);

/// Builds and validates a config. Keys under `ignore_section` (e.g. "sweep")
/// are skipped. Throws ConfigError with one "line N: ..." entry per problem.
RunConfig build_config(const std::vector<Assignment>& entries, std::string_view ignore_section = {});

RunConfig parse_config(std::string_view text, const std::vector<Assignment>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<Assignment>& overrides = {});

/// Canonical text: every key written with %.17g, only keys relevant to the
/// chosen families. parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& c);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& c);

struct SweepAxis {
  std::string key;  // section.key
  std::vector<std::string> values;
};

struct SweepConfig {
  std::vector<Assignment> base;  // template assignments (sweep.* removed)
  std::vector<SweepAxis> axes;
  int width = 1;
  std::string results;
  std::size_t cap = 10000;

  std::size_t size() const;
  /// Point i of the cartesian product, last axis fastest.
  std::vector<Assignment> point(std::size_t i) const;
  std::vector<std::string> point_values(std::size_t i) const;
};

SweepConfig parse_sweep_config(std::string_view text, const std::vector<Assignment>& overrides = {});

std::string read_text_file(const std::string& path);

}  // namespace kslab
