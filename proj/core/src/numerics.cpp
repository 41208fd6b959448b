#include "bosejj/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace bosejj {

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("uniform_grid: hi must exceed lo");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + h * i;
  g.back() = hi;
  return g;
}

double grid_step(std::span<const double> grid) {
  if (grid.size() < 2) throw std::invalid_argument("grid_step: need at least 2 points");
  return (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
}

namespace {

// Index of the segment containing `at`, or -1 outside the table.
inline std::ptrdiff_t segment_of(std::span<const double> x, double at) {
  if (at < x.front() || at > x.back()) return -1;
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::ptrdiff_t j = std::distance(x.begin(), it) - 1;
  if (j >= static_cast<std::ptrdiff_t>(x.size()) - 1) j = static_cast<std::ptrdiff_t>(x.size()) - 2;
  if (j < 0) j = 0;
  return j;
}

template <class T>
T interp_linear_impl(std::span<const double> x, std::span<const T> y, double at) {
  auto j = segment_of(x, at);
  if (j < 0) return T{};
  const double x0 = x[static_cast<std::size_t>(j)];
  const double x1 = x[static_cast<std::size_t>(j) + 1];
  const double w = (x1 > x0) ? (at - x0) / (x1 - x0) : 0.0;
  return y[static_cast<std::size_t>(j)] * (1.0 - w) + y[static_cast<std::size_t>(j) + 1] * w;
}

template <class T>
T trapezoid_impl(std::span<const double> x, std::span<const T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  T acc{};
  for (std::size_t j = 0; j + 1 < x.size(); ++j)
    acc += (y[j] + y[j + 1]) * (0.5 * (x[j + 1] - x[j]));
  return acc;
}

// Exact integral of the linear segment f over [x0,x1] against 1/nu.
// f(nu) = f0 + s (nu - x0); integral = a*log(x1/x0) + s*(x1-x0) with a = f(0)
// extrapolated; the log blows up only when the table reaches 0 with f(0) != 0.
template <class T>
T segment_over_nu(double x0, double x1, T f0, T f1, bool* divergent) {
  const double h = x1 - x0;
  if (h <= 0.0) return T{};
  const T s = (f1 - f0) * (1.0 / h);
  const T a = f0 - s * x0;  // value of the linear extension at nu = 0
  if (x0 <= 0.0) {
    if (x1 <= 0.0) {
      // Segment on the negative axis: 1/nu is integrable only if it stays
      // away from 0; x1 == 0 with a != 0 diverges.
      if (x1 == 0.0) {
        if (std::abs(a) > 0.0 && divergent) *divergent = true;
        return s * h;  // principal part of the log tends to -inf; a == 0 case
      }
      return a * std::log(std::abs(x1 / x0)) + s * h;
    }
    // Segment straddles or starts at 0.
    if (std::abs(a) > 0.0) {
      if (divergent) *divergent = true;
      return s * h;
    }
    return s * h;
  }
  return a * std::log(x1 / x0) + s * h;
}

template <class T>
T integral_over_nu_impl(std::span<const double> x, std::span<const T> f, bool* divergent) {
  if (x.size() != f.size()) throw std::invalid_argument("integral_over_nu: size mismatch");
  if (divergent) *divergent = false;
  T acc{};
  for (std::size_t j = 0; j + 1 < x.size(); ++j)
    acc += segment_over_nu(x[j], x[j + 1], f[j], f[j + 1], divergent);
  return acc;
}

// Relative floor below which the nu = 0 table value is treated as estimator
// leakage rather than genuine band-bottom mass.
constexpr double kPoleNoiseFloor = 1e-3;

template <class T>
T floored_pole_impl(std::span<const double> x, std::vector<T> f, bool* divergent) {
  double peak = 0.0;
  for (const T& v : f) peak = std::max(peak, std::abs(v));
  if (!f.empty() && x.front() == 0.0 && std::abs(f.front()) <= kPoleNoiseFloor * peak)
    f.front() = T{};
  return integral_over_nu_impl<T>(x, std::span<const T>(f), divergent);
}

// PV integral of piecewise-linear f against 1/(at - nu).  Subtracting the
// interpolated f(at) over the support window leaves a linear function that
// vanishes at `at`, so every segment integral is regular; the subtracted
// constant is restored through the analytic PV of 1/(at - nu).
template <class T>
T pv_hilbert_impl(std::span<const double> x, std::span<const T> f, double at) {
  if (x.size() != f.size()) throw std::invalid_argument("pv_hilbert_at: size mismatch");
  const double lo = x.front(), hi = x.back();
  T fat{};
  const bool inside = (at >= lo && at <= hi);
  if (inside) fat = interp_linear_impl<T>(x, f, at);
  T acc{};
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const double x0 = x[j], x1 = x[j + 1];
    const double h = x1 - x0;
    if (h <= 0.0) continue;
    const T f0 = f[j] - fat, f1 = f[j + 1] - fat;
    const T s = (f1 - f0) * (1.0 / h);
    // c = value of the (subtracted) linear function at nu = at.
    const T c = f0 + s * (at - x0);
    const double A = at - x0, B = at - x1;
    // c vanishes when `at` hits a node of the containing segment, which is
    // exactly where log|A/B| blows up; skip the term then.
    double lg = 0.0;
    if (A != 0.0 && B != 0.0) lg = std::log(std::abs(A / B));
    T term = -s * h;
    if (A != 0.0 && B != 0.0) term += c * lg;
    acc += term;
  }
  if (inside && at > lo && at < hi) acc += fat * std::log((at - lo) / (hi - at));
  return acc;
}

}  // namespace

double interp_linear(std::span<const double> x, std::span<const double> y, double at) {
  return interp_linear_impl<double>(x, y, at);
}
cdouble interp_linear(std::span<const double> x, std::span<const cdouble> y, double at) {
  return interp_linear_impl<cdouble>(x, y, at);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  return trapezoid_impl<double>(x, y);
}
cdouble trapezoid(std::span<const double> x, std::span<const cdouble> y) {
  return trapezoid_impl<cdouble>(x, y);
}

double integral_over_nu(std::span<const double> x, std::span<const double> f, bool* divergent) {
  return integral_over_nu_impl<double>(x, f, divergent);
}
cdouble integral_over_nu(std::span<const double> x, std::span<const cdouble> f, bool* divergent) {
  return integral_over_nu_impl<cdouble>(x, f, divergent);
}

double floored_pole_integral(std::span<const double> x, std::vector<double> f, bool* divergent) {
  return floored_pole_impl<double>(x, std::move(f), divergent);
}
cdouble floored_pole_integral(std::span<const double> x, std::vector<cdouble> f, bool* divergent) {
  return floored_pole_impl<cdouble>(x, std::move(f), divergent);
}

double pv_hilbert_at(std::span<const double> x, std::span<const double> f, double at) {
  return pv_hilbert_impl<double>(x, f, at);
}
cdouble pv_hilbert_at(std::span<const double> x, std::span<const cdouble> f, double at) {
  return pv_hilbert_impl<cdouble>(x, f, at);
}

namespace {

template <class T>
T integral_between_impl(std::span<const double> x, std::span<const T> f, double a, double b) {
  if (x.size() != f.size()) throw std::invalid_argument("integral_between: size mismatch");
  if (b < a) std::swap(a, b);
  a = std::max(a, x.front());
  b = std::min(b, x.back());
  if (b <= a) return T{};
  T acc{};
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const double lo = std::max(a, x[j]), hi = std::min(b, x[j + 1]);
    if (hi <= lo) continue;
    acc += (interp_linear_impl<T>(x, f, lo) + interp_linear_impl<T>(x, f, hi)) * (0.5 * (hi - lo));
  }
  return acc;
}

}  // namespace

double integral_between(std::span<const double> x, std::span<const double> f, double a,
                        double b) {
  return integral_between_impl<double>(x, f, a, b);
}
cdouble integral_between(std::span<const double> x, std::span<const cdouble> f, double a,
                         double b) {
  return integral_between_impl<cdouble>(x, f, a, b);
}

cdouble resolvent_at(std::span<const double> x, std::span<const double> f, cdouble z) {
  if (x.size() != f.size()) throw std::invalid_argument("resolvent_at: size mismatch");
  if (z.imag() == 0.0) throw std::invalid_argument("resolvent_at: needs Im z != 0");
  cdouble acc{};
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const double x0 = x[j], x1 = x[j + 1];
    const double h = x1 - x0;
    if (h <= 0.0) continue;
    const double s = (f[j + 1] - f[j]) / h;
    const cdouble A = z - x0, B = z - x1;
    const cdouble c = f[j] + s * (z - x0);  // linear value continued to z
    acc += c * std::log(A / B) - s * h;
  }
  return acc;
}

double bose_q(double x) {
  if (x < 0.0) throw std::domain_error("bose_q: negative argument");
  if (x < 1e-2) {
    // 1/(e^x-1) = 1/x - 1/2 + x/12 - x^3/720 + x^5/30240 - ...
    const double x2 = x * x;
    return -0.5 + x / 12.0 - x * x2 / 720.0 + x * x2 * x2 / 30240.0;
  }
  return 1.0 / std::expm1(x) - 1.0 / x;
}

double bose_x_times_n(double x) {
  if (x < 0.0) throw std::domain_error("bose_x_times_n: negative argument");
  if (x < 1e-2) return 1.0 + x * bose_q(x);
  return x / std::expm1(x);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace bosejj
