#include "bosejj/selfenergy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bosejj {

namespace {
constexpr double kPi = std::numbers::pi;
}

cdouble EtaBoundary::plus_at(double x) const {
    if (x >= grid.front() && x <= grid.back()) return interp_linear(grid, eta_plus, x);
    // Far outside the table the coupling term is a plain resolvent integral.
    double pv = pv_hilbert_at(rho_g.grid, rho_g.values, x);
    return cdouble{x - omega - lambda * lambda * pv, lambda * lambda * kPi * rho_g.at(x)};
}

cdouble eta_at(const SelfEnergySpec& spec, cdouble z) {
    if (std::imag(z) == 0.0)
        throw std::invalid_argument("eta evaluation needs Im z != 0; use the boundary table");
    cdouble integral = spec.rho_g.grid.empty()
                           ? cdouble{0.0, 0.0}
                           : resolvent_at(spec.rho_g.grid, spec.rho_g.values, z);
    return z - spec.omega - spec.lambda * spec.lambda * integral;
}

EtaBoundary eta_boundary(const SelfEnergySpec& spec, int grid_points) {
    EtaBoundary out;
    out.omega = spec.omega;
    out.lambda = spec.lambda;
    out.rho_g = spec.rho_g;

    double supp_lo = 0.0, supp_hi = 1.0;
    if (!spec.rho_g.grid.empty()) {
        supp_lo = spec.rho_g.support_lo;
        supp_hi = spec.rho_g.support_hi;
    }
    double span = std::max(supp_hi - supp_lo, 1.0);
    double lo = std::min({supp_lo - 0.1 * span, spec.omega - 0.25 * span, -0.05 * span});
    double hi = std::max(supp_hi + 0.1 * span, spec.omega + 0.25 * span);
    out.grid = uniform_grid(lo, hi, grid_points);

    const double l2 = spec.lambda * spec.lambda;
    out.eta_plus.resize(out.grid.size());
    out.min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < out.grid.size(); ++j) {
        double x = out.grid[j];
        double pv = spec.rho_g.grid.empty()
                        ? 0.0
                        : pv_hilbert_at(spec.rho_g.grid, spec.rho_g.values, x);
        out.eta_plus[j] = cdouble{x - spec.omega - l2 * pv, l2 * kPi * spec.rho_g.at(x)};
        double a = std::abs(out.eta_plus[j]);
        if (a < out.min_abs) {
            out.min_abs = a;
            out.argmin = x;
        }
    }

    bool divergent = false;
    double over_nu =
        spec.rho_g.grid.empty()
            ? 0.0
            : floored_pole_integral(spec.rho_g.grid, spec.rho_g.values, &divergent);
    out.eta_zero_finite = !divergent;
    out.eta_zero = divergent ? std::numeric_limits<double>::quiet_NaN()
                             : -spec.omega + l2 * over_nu;
    return out;
}

EtaGapVerdict check_eta_lower_bound(const EtaBoundary& eta, double threshold) {
    EtaGapVerdict v;
    v.threshold = threshold;
    v.min_abs = eta.min_abs;
    v.argmin = eta.argmin;
    v.pass = eta.min_abs >= threshold;
    return v;
}

ResolventSupVerdict check_resolvent_sup(const SpectralDensity& rho) {
    ResolventSupVerdict v;
    if (rho.grid.empty()) {
        v.bounded = true;
        return v;
    }
    double sup[3] = {0.0, 0.0, 0.0};
    const double eps[3] = {1e-2, 1e-3, 1e-4};
    for (int k = 0; k < 3; ++k) {
        for (double x : rho.grid) {
            cdouble r = resolvent_at(rho.grid, rho.values, cdouble{x, eps[k]});
            sup[k] = std::max(sup[k], std::abs(r));
        }
    }
    v.growth = sup[1] > 0.0 ? sup[2] / sup[1] : 1.0;
    v.bounded = v.growth < 1.15;
    v.c_g = sup[2];
    return v;
}

std::string export_eta_csv(const EtaBoundary& eta) {
    std::ostringstream os;
    os << "x,re_eta_plus,im_eta_plus\n";
    for (std::size_t j = 0; j < eta.grid.size(); ++j)
        os << format_sig12(eta.grid[j]) << ',' << format_sig12(std::real(eta.eta_plus[j]))
           << ',' << format_sig12(std::imag(eta.eta_plus[j])) << '\n';
    return os.str();
}

}  // namespace bosejj
