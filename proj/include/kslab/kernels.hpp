#pragma once

// Data-parallel cell kernels. Every kernel exists twice with identical
// signatures: kernels::serial (plain loops, the reference used by tests) and
// kernels::parallel (OpenMP). Elementwise kernels produce bitwise-identical
// output in both versions. Parallel reductions are blocked with a fixed block
// size and combined in block order, so their result does not depend on the
// number of threads.

#include <array>
#include <cstddef>
#include <span>

namespace kslab::kernels {

/// Geometry needed by the 2d+1 point Neumann stencil.
struct Stencil {
  int dim = 1;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> inv_h2{0.0, 0.0, 0.0};

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }
};

struct MinMax {
  double min;
  double max;
};

inline constexpr std::size_t kReductionBlock = 4096;

namespace detail {

// (L x) at cell (i0, i1, i2); reflecting closure means absent neighbours
// contribute nothing.
inline double laplacian_at(const Stencil& st, const double* x, int i0, int i1, int i2) {
  const std::size_t s1 = static_cast<std::size_t>(st.n[2]);
  const std::size_t s0 = s1 * st.n[1];
  const std::size_t c = i0 * s0 + i1 * s1 + i2;
  const double xc = x[c];
  double acc = 0.0;
  {
    double a = 0.0;
    if (i0 > 0) a += x[c - s0] - xc;
    if (i0 + 1 < st.n[0]) a += x[c + s0] - xc;
    acc += a * st.inv_h2[0];
  }
  if (st.dim > 1) {
    double a = 0.0;
    if (i1 > 0) a += x[c - s1] - xc;
    if (i1 + 1 < st.n[1]) a += x[c + s1] - xc;
    acc += a * st.inv_h2[1];
  }
  if (st.dim > 2) {
    double a = 0.0;
    if (i2 > 0) a += x[c - 1] - xc;
    if (i2 + 1 < st.n[2]) a += x[c + 1] - xc;
    acc += a * st.inv_h2[2];
  }
  return acc;
}

}  // namespace detail

#define KSLAB_KERNEL_DECLS                                                                         \
  /* y = L x */                                                                                    \
  void laplacian(const Stencil& st, std::span<const double> x, std::span<double> y);              \
  /* y = (diag + shift) x - beta L x ; diag may be empty */                                        \
  void shifted(const Stencil& st, std::span<const double> diag, double shift, double beta,        \
               std::span<const double> x, std::span<double> y);                                   \
  double dot(std::span<const double> a, std::span<const double> b);                                \
  double sum(std::span<const double> a);                                                           \
  /* y += alpha x */                                                                               \
  void axpy(double alpha, std::span<const double> x, std::span<double> y);                         \
  /* y = x + beta y */                                                                             \
  void xpay(std::span<const double> x, double beta, std::span<double> y);                          \
  /* out = a * b elementwise */                                                                    \
  void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);      \
  /* out = a / b elementwise */                                                                    \
  void divide(std::span<const double> a, std::span<const double> b, std::span<double> out);        \
  double norm_inf(std::span<const double> a);                                                      \
  MinMax minmax(std::span<const double> a);                                                        \
  /* min and max of a / b */                                                                       \
  MinMax ratio_minmax(std::span<const double> a, std::span<const double> b);                       \
  /* sum (a / scale)^p */                                                                          \
  double power_sum(std::span<const double> a, double p, double scale);                             \
  /* sum exp(r (a - shift)) */                                                                     \
  double sum_exp(std::span<const double> a, double r, double shift);

namespace serial {
KSLAB_KERNEL_DECLS
}  // namespace serial

namespace parallel {
KSLAB_KERNEL_DECLS
}  // namespace parallel

#undef KSLAB_KERNEL_DECLS

}  // namespace kslab::kernels
