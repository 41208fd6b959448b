#pragma once

#include "bosejj/numerics.hpp"
#include "bosejj/spectral.hpp"

#include <string>
#include <vector>

namespace bosejj {

// eta(z) = z - Omega - lambda^2 integral rho_g(nu)/(z - nu) dnu with rho_g
// the aggregate coupling density over all reservoirs.
struct SelfEnergySpec {
    double omega = 1.0;
    double lambda = 0.1;
    SpectralDensity rho_g;
};

// Boundary values from the upper half-plane.  eta is Herglotz, so
// Im eta_plus(x) = +lambda^2 pi rho_g(x) >= 0 and eta_minus = conj(eta_plus).
struct EtaBoundary {
    double omega = 0.0;
    double lambda = 0.0;
    SpectralDensity rho_g;
    std::vector<double> grid;
    std::vector<cdouble> eta_plus;
    double eta_zero = 0.0;      // -Omega + lambda^2 integral rho_g(nu)/nu dnu
    bool eta_zero_finite = true;
    double min_abs = 0.0;
    double argmin = 0.0;

    cdouble plus_at(double x) const;
    cdouble minus_at(double x) const { return std::conj(plus_at(x)); }
    double abs_sq_at(double x) const { return std::norm(plus_at(x)); }
};

// Quadrature evaluation off the real axis; throws when Im z = 0.
cdouble eta_at(const SelfEnergySpec& spec, cdouble z);

// Boundary table on the union of the widened coupling support, a window
// around Omega and a sliver below zero (off-support zeros of eta_plus are
// real eigenvalue candidates and must be caught).
EtaBoundary eta_boundary(const SelfEnergySpec& spec, int grid_points = 4097);

// Resonance gap: 1/eta_plus stays bounded iff |eta_plus| is bounded away
// from zero on the window.
struct EtaGapVerdict {
    bool pass = false;
    double min_abs = 0.0;
    double argmin = 0.0;
    double threshold = 0.0;
};
EtaGapVerdict check_eta_lower_bound(const EtaBoundary& eta, double threshold);

// Sup bound on the boundary resolvent of the reservoir, with an
// epsilon-refinement convergence check; a growing sup means the density is
// too singular for the bounded-resolvent hypothesis.
struct ResolventSupVerdict {
    bool bounded = false;
    double c_g = 0.0;
    double growth = 0.0;  // sup ratio between the two finest epsilons
};
ResolventSupVerdict check_resolvent_sup(const SpectralDensity& rho);

// x, Re eta_plus, Im eta_plus rows.
std::string export_eta_csv(const EtaBoundary& eta);

}  // namespace bosejj
