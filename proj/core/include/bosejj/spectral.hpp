#pragma once

#include "bosejj/graphs.hpp"
#include "bosejj/model.hpp"
#include "bosejj/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bosejj {

// Radon-Nikodym derivative of nu -> <g, E(nu) g> on a uniform grid.  Mass is
// the trapezoid integral of the stored samples and must reproduce |g|^2.
struct SpectralDensity {
    std::vector<double> grid;
    std::vector<double> values;
    double support_lo = 0.0;
    double support_hi = 0.0;
    double total_mass = 0.0;

    double at(double nu) const { return interp_linear(grid, values, nu); }
};

// Cross derivative d<xi, E(nu) zeta>/dnu; complex valued.
struct ComplexDensity {
    std::vector<double> grid;
    std::vector<cdouble> values;

    cdouble at(double nu) const { return interp_linear(grid, values, nu); }
};

// Boundary values <g, (nu - h - i0)^{-1} g> = PV + i pi rho.
struct ResolventBoundary {
    std::vector<double> grid;
    std::vector<double> real_part;
    std::vector<double> imag_part;
    double sup_bound = 0.0;
};

struct SpectralOptions {
    int grid_points = 4097;
    long mc_samples = 8'000'000;
    double mc_sigma_frac = 0.004;  // base Gaussian width, fraction of the band
    double eps0 = 0.05;            // base Lorentzian width for patch resolvents
    int lanczos_steps = 400;
    std::uint64_t seed = 1;
    int threads = 1;
};

// Multiplication by |p|^2/2; the sphere level sets give
// rho(nu) = S_{d-1} (2 nu)^{(d-2)/2} |G(sqrt(2 nu))|^2 on [0, R^2/2].
SpectralDensity density_continuum_rd(int d, const RadialFormFactor& g,
                                     const SpectralOptions& opts = {});
ComplexDensity density_continuum_rd_cross(int d, const RadialFormFactor& xi,
                                          const RadialFormFactor& zeta,
                                          const SpectralOptions& opts = {});

// h0 = 2d - 2 sum cos(theta_j) on the torus; seeded Monte Carlo histogram
// with a Gaussian width ladder {4s,2s,s} collapsed by Richardson steps.
// Deterministic for a fixed seed independent of the thread count.
SpectralDensity density_lattice_zd(const GraphPatch& patch, const GraphExplicit& g,
                                   const SpectralOptions& opts = {});
ComplexDensity density_lattice_zd_cross(const GraphPatch& patch, const GraphExplicit& xi,
                                        const GraphExplicit& zeta,
                                        const SpectralOptions& opts = {});

// (1/pi) Im <g, (nu - h0 - i eps)^{-1} g> on the patch via Lanczos, with the
// Lorentzian ladder {4e,2e,e} extrapolated to eps = 0.
SpectralDensity density_graph_resolvent(const GraphPatch& patch, const GraphExplicit& g,
                                        const SpectralOptions& opts = {});
ComplexDensity density_graph_resolvent_cross(const GraphPatch& patch,
                                             const GraphExplicit& xi,
                                             const GraphExplicit& zeta,
                                             const SpectralOptions& opts = {});

// real_part(x) = PV integral rho(nu)/(x - nu) dnu via singularity
// subtraction; imag_part = pi rho.  Throws when halving the grid moves the
// transform by more than pv_consistency_tol (grid too coarse).
ResolventBoundary resolvent_boundary(const SpectralDensity& rho,
                                     double pv_consistency_tol = 0.05);

std::string export_density_csv(const SpectralDensity& rho);
SpectralDensity import_density_csv(const std::string& text);

// Band edge of the reservoir one-particle energy for each kind.
double lattice_band_top(int d);
double comb_band_top(int d);

}  // namespace bosejj
