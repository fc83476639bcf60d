#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kslab/kernels.hpp"

namespace kslab::kernels::parallel {

namespace {

std::ptrdiff_t ssize(std::span<const double> a) { return static_cast<std::ptrdiff_t>(a.size()); }

// Fixed-size blocks reduced independently, then combined in order.
template <class Init, class BlockOp, class Combine>
auto blocked_reduce(std::size_t n, Init init, BlockOp block_op, Combine combine) {
  using T = decltype(init);
  const std::ptrdiff_t nblocks = static_cast<std::ptrdiff_t>((n + kReductionBlock - 1) / kReductionBlock);
  std::vector<T> partial(static_cast<std::size_t>(nblocks), init);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[static_cast<std::size_t>(b)] = block_op(lo, hi);
  }
  T acc = init;
  for (const T& p : partial) acc = combine(acc, p);
  return acc;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void laplacian(const Stencil& st, std::span<const double> x, std::span<double> y) {
  const std::size_t plane = static_cast<std::size_t>(st.n[1]) * st.n[2];
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < st.n[0]; ++i0) {
    std::size_t c = static_cast<std::size_t>(i0) * plane;
    for (int i1 = 0; i1 < st.n[1]; ++i1)
      for (int i2 = 0; i2 < st.n[2]; ++i2, ++c) y[c] = detail::laplacian_at(st, x.data(), i0, i1, i2);
  }
}

void shifted(const Stencil& st, std::span<const double> diag, double shift, double beta,
             std::span<const double> x, std::span<double> y) {
  const std::size_t plane = static_cast<std::size_t>(st.n[1]) * st.n[2];
  const bool has_diag = !diag.empty();
#pragma omp parallel for schedule(static)
  for (int i0 = 0; i0 < st.n[0]; ++i0) {
    std::size_t c = static_cast<std::size_t>(i0) * plane;
    for (int i1 = 0; i1 < st.n[1]; ++i1)
      for (int i2 = 0; i2 < st.n[2]; ++i2, ++c) {
        const double d = (has_diag ? diag[c] : 0.0) + shift;
        y[c] = d * x[c] - beta * detail::laplacian_at(st, x.data(), i0, i1, i2);
      }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        return s;
      },
      [](double x, double y) { return x + y; });
}

double sum(std::span<const double> a) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i];
        return s;
      },
      [](double x, double y) { return x + y; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::ptrdiff_t n = ssize(x);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  const std::ptrdiff_t n = ssize(x);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::ptrdiff_t n = ssize(a);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void divide(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::ptrdiff_t n = ssize(a);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}

double norm_inf(std::span<const double> a) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double m = 0.0;
        for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(a[i]));
        return m;
      },
      [](double x, double y) { return std::max(x, y); });
}

MinMax minmax(std::span<const double> a) {
  return blocked_reduce(
      a.size(), MinMax{kInf, -kInf},
      [&](std::size_t lo, std::size_t hi) {
        MinMax r{kInf, -kInf};
        for (std::size_t i = lo; i < hi; ++i) {
          r.min = std::min(r.min, a[i]);
          r.max = std::max(r.max, a[i]);
        }
        return r;
      },
      [](MinMax x, MinMax y) { return MinMax{std::min(x.min, y.min), std::max(x.max, y.max)}; });
}

MinMax ratio_minmax(std::span<const double> a, std::span<const double> b) {
  return blocked_reduce(
      a.size(), MinMax{kInf, -kInf},
      [&](std::size_t lo, std::size_t hi) {
        MinMax r{kInf, -kInf};
        for (std::size_t i = lo; i < hi; ++i) {
          const double q = a[i] / b[i];
          r.min = std::min(r.min, q);
          r.max = std::max(r.max, q);
        }
        return r;
      },
      [](MinMax x, MinMax y) { return MinMax{std::min(x.min, y.min), std::max(x.max, y.max)}; });
}

double power_sum(std::span<const double> a, double p, double scale) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += std::pow(std::abs(a[i]) / scale, p);
        return s;
      },
      [](double x, double y) { return x + y; });
}

double sum_exp(std::span<const double> a, double r, double shift) {
  return blocked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += std::exp(r * (a[i] - shift));
        return s;
      },
      [](double x, double y) { return x + y; });
}

}  // namespace kslab::kernels::parallel
