#include <algorithm>
#include <cmath>
#include <limits>

#include "kslab/kernels.hpp"

namespace kslab::kernels::serial {

void laplacian(const Stencil& st, std::span<const double> x, std::span<double> y) {
  for (int i0 = 0; i0 < st.n[0]; ++i0)
    for (int i1 = 0; i1 < st.n[1]; ++i1)
      for (int i2 = 0; i2 < st.n[2]; ++i2) {
        const std::size_t c = (static_cast<std::size_t>(i0) * st.n[1] + i1) * st.n[2] + i2;
        y[c] = detail::laplacian_at(st, x.data(), i0, i1, i2);
      }
}

void shifted(const Stencil& st, std::span<const double> diag, double shift, double beta,
             std::span<const double> x, std::span<double> y) {
  for (int i0 = 0; i0 < st.n[0]; ++i0)
    for (int i1 = 0; i1 < st.n[1]; ++i1)
      for (int i2 = 0; i2 < st.n[2]; ++i2) {
        const std::size_t c = (static_cast<std::size_t>(i0) * st.n[1] + i1) * st.n[2] + i2;
        const double d = (diag.empty() ? 0.0 : diag[c]) + shift;
        y[c] = d * x[c] - beta * detail::laplacian_at(st, x.data(), i0, i1, i2);
      }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void divide(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

MinMax minmax(std::span<const double> a) {
  MinMax r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double x : a) {
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  }
  return r;
}

MinMax ratio_minmax(std::span<const double> a, std::span<const double> b) {
  MinMax r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double q = a[i] / b[i];
    r.min = std::min(r.min, q);
    r.max = std::max(r.max, q);
  }
  return r;
}

double power_sum(std::span<const double> a, double p, double scale) {
  double s = 0.0;
  for (double x : a) s += std::pow(std::abs(x) / scale, p);
  return s;
}

double sum_exp(std::span<const double> a, double r, double shift) {
  double s = 0.0;
  for (double x : a) s += std::exp(r * (x - shift));
  return s;
}

}  // namespace kslab::kernels::serial
