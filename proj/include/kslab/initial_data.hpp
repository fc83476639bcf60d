#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "kslab/grid.hpp"

namespace kslab {

enum class InitialKind { Constant, Gaussian, Cosine, Noise };

std::string_view to_string(InitialKind kind);
InitialKind parse_initial_kind(std::string_view name);

struct InitialSpec {
  InitialKind kind = InitialKind::Constant;
  double value = 1.0;           // constant
  double mass = 1.0;            // gaussian: exact discrete mass sum(f) h^d
  double width = 0.5;           // gaussian sigma
  std::vector<double> center;   // gaussian; empty means domain center
  double mean = 1.0;            // cosine, noise
  double amplitude = 0.1;       // cosine, noise
  int mode = 1;                 // cosine: mean + amplitude * prod cos(mode pi x_i / L_i)
  std::uint64_t seed = 1;       // noise: mean + amplitude * uniform(-1, 1)

  bool operator==(const InitialSpec&) const = default;
};

/// Samples the generator on the grid without sign checks.
Field generate(const Grid& grid, const InitialSpec& spec);

/// u0 >= 0 and not identically zero; throws ConfigError otherwise.
Field make_initial_u(const Grid& grid, const InitialSpec& spec);
/// v0 > 0 everywhere; throws ConfigError otherwise.
Field make_initial_v(const Grid& grid, const InitialSpec& spec);

}  // namespace kslab
