#include "kslab/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"

namespace kslab {

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Constant: return "constant";
    case InitialKind::Gaussian: return "gaussian";
    case InitialKind::Cosine: return "cosine";
    case InitialKind::Noise: return "noise";
  }
  return "?";
}

InitialKind parse_initial_kind(std::string_view name) {
  if (name == "constant") return InitialKind::Constant;
  if (name == "gaussian") return InitialKind::Gaussian;
  if (name == "cosine") return InitialKind::Cosine;
  if (name == "noise") return InitialKind::Noise;
  throw ConfigError("unknown initial data kind '" + std::string(name) +
                    "' (expected constant, gaussian, cosine or noise)");
}

Field generate(const Grid& grid, const InitialSpec& spec) {
  Field f(grid);
  switch (spec.kind) {
    case InitialKind::Constant:
      for (std::size_t c = 0; c < f.size(); ++c) f[c] = spec.value;
      break;
    case InitialKind::Gaussian: {
      if (!(spec.mass > 0.0)) throw ConfigError("gaussian mass must be positive");
      if (!(spec.width > 0.0)) throw ConfigError("gaussian width must be positive");
      std::array<double, 3> ctr{};
      if (spec.center.empty()) {
        for (int a = 0; a < grid.dim(); ++a) ctr[a] = 0.5 * grid.length(a);
      } else {
        if (static_cast<int>(spec.center.size()) != grid.dim())
          throw ConfigError("gaussian center needs one coordinate per axis");
        for (int a = 0; a < grid.dim(); ++a) ctr[a] = spec.center[a];
      }
      const double inv2s2 = 1.0 / (2.0 * spec.width * spec.width);
      for (std::size_t c = 0; c < f.size(); ++c) {
        const auto x = grid.center(c);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - ctr[a]) * (x[a] - ctr[a]);
        f[c] = std::exp(-r2 * inv2s2);
      }
      const double total = kernels::serial::sum(f.values()) * grid.cell_volume();
      if (!(total > 0.0)) throw ConfigError("gaussian underflows on this grid (width too small or center outside)");
      const double scale = spec.mass / total;
      for (std::size_t c = 0; c < f.size(); ++c) f[c] *= scale;
      break;
    }
    case InitialKind::Cosine:
      for (std::size_t c = 0; c < f.size(); ++c) {
        const auto x = grid.center(c);
        double p = 1.0;
        for (int a = 0; a < grid.dim(); ++a) p *= std::cos(spec.mode * std::numbers::pi * x[a] / grid.length(a));
        f[c] = spec.mean + spec.amplitude * p;
      }
      break;
    case InitialKind::Noise: {
      std::mt19937_64 rng(spec.seed);
      for (std::size_t c = 0; c < f.size(); ++c) {
        // 53 random bits -> [0, 1), independent of the standard library's distribution code
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        f[c] = spec.mean + spec.amplitude * (2.0 * unit - 1.0);
      }
      break;
    }
  }
  return f;
}

Field make_initial_u(const Grid& grid, const InitialSpec& spec) {
  Field u = generate(grid, spec);
  bool nonzero = false;
  for (double x : u.values()) {
    if (!(x >= 0.0)) throw ConfigError("initial u must be non-negative");
    nonzero = nonzero || x > 0.0;
  }
  if (!nonzero) throw ConfigError("initial u must not vanish identically");
  return u;
}

Field make_initial_v(const Grid& grid, const InitialSpec& spec) {
  Field v = generate(grid, spec);
  for (double x : v.values())
    if (!(x > 0.0)) throw ConfigError("initial v must be positive");
  return v;
}

}  // namespace kslab
