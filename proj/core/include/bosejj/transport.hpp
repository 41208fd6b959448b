// transport.hpp
//
// Steady-state observables: particle and energy currents, Josephson
// currents, entropy production rate, open channels and the positivity
// verdict.  Everything is a pure function of a NessEvaluator.

#pragma once

#include "bosejj/ness.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace bosejj {

// A quadrature value with the grid-halving error estimate.
struct CurrentValue {
    double value = 0.0;
    double quad_error = 0.0;  // |full grid - every-other-node grid|
};

// Channel k -> l is open where rho_k rho_l / |eta_-|^2 exceeds the threshold
// on a set of positive measure.  Row-major k -> l, diagonal included.
struct ChannelMatrix {
    std::size_t n = 0;
    double threshold = 0.0;
    std::vector<double> measure;

    double at(std::size_t k, std::size_t l) const { return measure.at(k * n + l); }
    bool is_open(std::size_t k, std::size_t l) const { return at(k, l) > 0.0; }
};

struct PositivityVerdict {
    bool hypotheses_met = false;     // some open channel joins distinct (beta, mu)
    bool strictly_positive = false;  // Ep clears ten times its error estimate
    double ep = 0.0;
    double ep_error = 0.0;
    std::string statement;
};

struct TransportReport {
    std::vector<double> J;  // particle current out of reservoir l (thermal + Josephson)
    std::vector<double> E;  // energy current
    std::vector<double> Jos;
    std::vector<double> J_error;  // quadrature estimates for the thermal parts
    std::vector<double> E_error;
    double entropy_production = 0.0;
    double entropy_production_error = 0.0;
    ChannelMatrix channels;
    PositivityVerdict verdict;
    std::string condition_summary;
};

// Thermal part 2 pi lambda^4 sum_k int |eta_-|^{-2} (N_l - N_k) rho_k rho_l
// plus the Josephson bracket.  The mu = 0 occupation pole is split off and
// integrated exactly against the piecewise-linear kernel, so equal-(beta, mu)
// pairs cancel identically.
CurrentValue charge_current(const NessEvaluator& ev, std::size_t l);

// Same integrand weighted by nu; the weight absorbs the pole and the phase
// term is absent.
CurrentValue energy_current(const NessEvaluator& ev, std::size_t l);

// pi^3 lambda^2 / eta(0) * sum_k [Theta_k(<v_k,g_k>) Theta_l(i<v_l,g_l>)
//                               - Theta_k(i<v_k,g_k>) Theta_l(<v_l,g_l>)].
// Zero without any active phase; otherwise eta(0) must be finite.
double josephson(const NessEvaluator& ev, std::size_t l);

// Ep = sum_{k,l} int pi lambda^4 |eta_-|^{-2}
//        [beta_l(nu - mu_l) - beta_k(nu - mu_k)] (N_k - N_l) rho_k rho_l dnu.
// Pointwise nonnegative integrand; independent of every phase parameter.
CurrentValue entropy_production(const NessEvaluator& ev);

// Lebesgue measure of {nu : rho_k rho_l / |eta_-|^2 > threshold} by grid
// counting, for every ordered pair.
ChannelMatrix open_channels(const NessEvaluator& ev, double threshold);

// If some open channel joins reservoirs with distinct (beta, mu), entropy
// production must be strictly positive; otherwise the hypotheses fail and
// Ep ~ 0 is allowed.
PositivityVerdict positivity_verdict(const NessEvaluator& ev,
                                     double channel_threshold = 1e-8);

TransportReport transport_report(const NessEvaluator& ev,
                                 double channel_threshold = 1e-8);

// One row per reservoir (l, J, E, Jos) followed by a scalar block.
std::string export_transport_csv(const TransportReport& rep);

}  // namespace bosejj
