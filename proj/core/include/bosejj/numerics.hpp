// numerics.hpp
//
// Shared numerical kernels: uniform grids, trapezoid quadrature, exact
// principal-value and 1/nu integrals of piecewise-linear tables, Bose
// occupation helpers and deterministic chunked RNG streams.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bosejj {

using cdouble = std::complex<double>;

// Uniform ascending grid, endpoints included.
std::vector<double> uniform_grid(double lo, double hi, int n);

double grid_step(std::span<const double> grid);

// Linear interpolation, zero outside the table.
double interp_linear(std::span<const double> x, std::span<const double> y, double at);
cdouble interp_linear(std::span<const double> x, std::span<const cdouble> y, double at);

double trapezoid(std::span<const double> x, std::span<const double> y);
cdouble trapezoid(std::span<const double> x, std::span<const cdouble> y);

// integral of f(nu)/nu d nu for piecewise-linear f, exact per segment.
// Segments touching nu = 0 are handled through the analytic log form; a
// nonzero value at nu = 0 means the integral diverges and sets *divergent.
double integral_over_nu(std::span<const double> x, std::span<const double> f, bool* divergent = nullptr);
cdouble integral_over_nu(std::span<const double> x, std::span<const cdouble> f, bool* divergent = nullptr);

// integral_over_nu with a leakage guard: a nu = 0 node whose value sits below
// a relative noise floor of the table peak is zeroed before the divergence
// test. Sampled densities carry O(1e-4) leakage at the band bottom that would
// otherwise flag every moment as divergent.
double floored_pole_integral(std::span<const double> x, std::vector<double> f,
                             bool* divergent = nullptr);
cdouble floored_pole_integral(std::span<const double> x, std::vector<cdouble> f,
                              bool* divergent = nullptr);

// PV integral of f(nu)/(at - nu) d nu for piecewise-linear f, exact per
// segment after subtracting f(at); valid for `at` inside or outside the table.
double pv_hilbert_at(std::span<const double> x, std::span<const double> f, double at);
cdouble pv_hilbert_at(std::span<const double> x, std::span<const cdouble> f, double at);

// integral of the piecewise-linear table over [a, b] clipped to the table,
// exact per segment.
double integral_between(std::span<const double> x, std::span<const double> f, double a,
                        double b);
cdouble integral_between(std::span<const double> x, std::span<const cdouble> f, double a,
                         double b);

// integral of f(nu)/(z - nu) d nu for piecewise-linear f and Im z != 0,
// exact per segment (complex log form).
cdouble resolvent_at(std::span<const double> x, std::span<const double> f, cdouble z);

// 1/(e^x - 1) - 1/x, bounded on [0, inf), value -1/2 at x = 0.
double bose_q(double x);

// x * n(x) with n the Bose factor 1/(e^x - 1); smooth through x = 0.
double bose_x_times_n(double x);

// Richardson extrapolation of a linearly converging sequence f(e), f(e/2):
// eliminates the O(e) term.
inline double richardson2(double f_e, double f_e2) { return 2.0 * f_e2 - f_e; }
// Two-stage Richardson over f(4e), f(2e), f(e): eliminates O(e) and O(e^2).
inline double richardson3(double f_4e, double f_2e, double f_e) {
  const double r1 = 2.0 * f_e - f_2e;
  const double r2 = 2.0 * f_2e - f_4e;
  return (4.0 * r1 - r2) / 3.0;
}

// Two-stage Richardson for even error expansions f = L + a s^2 + b s^4
// (Gaussian broadening ladders): eliminates s^2 and s^4.
inline double richardson_even3(double f_4s, double f_2s, double f_s) {
  const double r1 = (4.0 * f_s - f_2s) / 3.0;
  const double r2 = (4.0 * f_2s - f_4s) / 3.0;
  return (16.0 * r1 - r2) / 15.0;
}
inline cdouble richardson_even3(cdouble f_4s, cdouble f_2s, cdouble f_s) {
  const cdouble r1 = (4.0 * f_s - f_2s) / 3.0;
  const cdouble r2 = (4.0 * f_2s - f_4s) / 3.0;
  return (16.0 * r1 - r2) / 15.0;
}

// SplitMix64; used to derive independent chunk seeds from one master seed.
std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a 64-bit hash of a byte string (config fingerprints in reports).
std::uint64_t fnv1a64(std::string_view bytes);

// Format a double with 12 significant digits (report/CSV contract).
std::string format_sig12(double v);

}  // namespace bosejj
