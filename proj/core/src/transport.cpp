#include "bosejj/transport.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace bosejj {

namespace {

// Bounded and 1/nu parts of N(nu) = 1/(e^{beta(nu - mu)} - 1).  At mu = 0 the
// split N = q(beta nu) + 1/(beta nu) keeps equal-(beta, mu) differences exact.
struct Occupation {
    double beta;
    double mu;
    bool at_band_bottom;  // mu == 0

    double smooth(double nu) const {
        return at_band_bottom ? bose_q(beta * nu) : bose_occupation(beta, mu, nu);
    }
    double pole_coeff() const { return at_band_bottom ? 1.0 / beta : 0.0; }
    double nu_times_n(double nu) const {
        return at_band_bottom ? bose_x_times_n(beta * nu) / beta
                              : nu * bose_occupation(beta, mu, nu);
    }
    double affine(double nu) const { return beta * (nu - mu); }
};

Occupation occupation_of(const ReservoirSpec& s) { return {s.beta, s.mu, s.mu == 0.0}; }

void require_transport_usable(const NessEvaluator& ev) {
    if (ev.model().system.lambda == 0.0) return;
    const ConditionReport& c = ev.conditions();
    if (c.usable()) return;
    std::string msg = "transport refused:";
    if (!c.resolvent_sup.bounded) msg += " boundary resolvent unbounded;";
    if (!c.eta_gap.pass) msg += " resonance gap below threshold;";
    throw ConditionFailure(msg);
}

// rho_k rho_l / |eta_-|^2; bitwise symmetric in (k, l).
std::vector<double> pair_kernel(const NessEvaluator& ev, std::size_t k, std::size_t l) {
    const auto& abs2 = ev.eta_abs_sq();
    const auto& rk = ev.reservoir(k).rho_g_common;
    const auto& rl = ev.reservoir(l).rho_g_common;
    std::vector<double> kern(abs2.size());
    for (std::size_t j = 0; j < kern.size(); ++j) kern[j] = rk[j] * rl[j] / abs2[j];
    return kern;
}

std::vector<double> every_other(std::span<const double> v) {
    std::vector<double> out;
    out.reserve(v.size() / 2 + 1);
    for (std::size_t i = 0; i < v.size(); i += 2) out.push_back(v[i]);
    return out;
}

double kernel_over_nu(std::span<const double> x, std::span<const double> kern) {
    bool divergent = false;
    const double val =
        floored_pole_integral(x, std::vector<double>(kern.begin(), kern.end()), &divergent);
    if (divergent)
        throw std::domain_error(
            "current integral diverges: channel kernel does not vanish at the band "
            "bottom");
    return val;
}

// int K (N_l - N_k) dnu with the occupation poles integrated exactly.
double charge_pair(std::span<const double> x, std::span<const double> kern,
                   const Occupation& ol, const Occupation& ok) {
    std::vector<double> integ(kern.size());
    for (std::size_t j = 0; j < kern.size(); ++j)
        integ[j] = kern[j] * (ol.smooth(x[j]) - ok.smooth(x[j]));
    double val = trapezoid(x, std::span<const double>(integ));
    const double c = ol.pole_coeff() - ok.pole_coeff();
    if (c != 0.0) val += c * kernel_over_nu(x, kern);
    return val;
}

// int nu K (N_l - N_k) dnu; the nu weight absorbs the poles.
double energy_pair(std::span<const double> x, std::span<const double> kern,
                   const Occupation& ol, const Occupation& ok) {
    std::vector<double> integ(kern.size());
    for (std::size_t j = 0; j < kern.size(); ++j)
        integ[j] = kern[j] * (ol.nu_times_n(x[j]) - ok.nu_times_n(x[j]));
    return trapezoid(x, std::span<const double>(integ));
}

// int K (a_l - a_k)(N_k - N_l) dnu with a_i = beta_i (nu - mu_i); the product
// of antisymmetric factors is pointwise nonnegative.
double ep_pair(std::span<const double> x, std::span<const double> kern,
               const Occupation& ol, const Occupation& ok) {
    const double c1 = ol.beta - ok.beta;                  // nu slope of a_l - a_k
    const double c0 = ok.beta * ok.mu - ol.beta * ol.mu;  // its constant part
    const double dp = ok.pole_coeff() - ol.pole_coeff();  // pole of N_k - N_l
    std::vector<double> integ(kern.size());
    for (std::size_t j = 0; j < kern.size(); ++j) {
        const double da = ol.affine(x[j]) - ok.affine(x[j]);
        const double ds = ok.smooth(x[j]) - ol.smooth(x[j]);
        integ[j] = kern[j] * (da * ds + c1 * dp);
    }
    double val = trapezoid(x, std::span<const double>(integ));
    if (c0 != 0.0 && dp != 0.0) val += c0 * dp * kernel_over_nu(x, kern);
    return val;
}

CurrentValue thermal_current(const NessEvaluator& ev, std::size_t l, bool energy) {
    if (l >= ev.n_reservoirs()) throw std::out_of_range("reservoir index");
    const double lam = ev.model().system.lambda;
    if (lam == 0.0) return {};
    require_transport_usable(ev);
    const auto& grid = ev.grid();
    const std::vector<double> grid2 = every_other(grid);
    const Occupation ol = occupation_of(ev.reservoir(l).spec);
    double fine = 0.0, coarse = 0.0;
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        if (k == l) continue;
        const Occupation ok = occupation_of(ev.reservoir(k).spec);
        const std::vector<double> kern = pair_kernel(ev, k, l);
        const std::vector<double> kern2 = every_other(kern);
        if (energy) {
            fine += energy_pair(grid, kern, ol, ok);
            coarse += energy_pair(grid2, kern2, ol, ok);
        } else {
            fine += charge_pair(grid, kern, ol, ok);
            coarse += charge_pair(grid2, kern2, ol, ok);
        }
    }
    const double pref = 2.0 * std::numbers::pi * lam * lam * lam * lam;
    return {pref * fine, std::abs(pref * (fine - coarse))};
}

PositivityVerdict make_verdict(const NessEvaluator& ev, const ChannelMatrix& cm,
                               const CurrentValue& ep) {
    PositivityVerdict v;
    v.ep = ep.value;
    v.ep_error = ep.quad_error;
    const auto& rs = ev.model().reservoirs;
    for (std::size_t k = 0; k < cm.n && !v.hypotheses_met; ++k)
        for (std::size_t l = k + 1; l < cm.n; ++l)
            if ((cm.is_open(k, l) || cm.is_open(l, k)) &&
                (rs[k].beta != rs[l].beta || rs[k].mu != rs[l].mu)) {
                v.hypotheses_met = true;
                break;
            }
    if (!v.hypotheses_met) {
        v.statement = "hypotheses not met";
        return v;
    }
    v.strictly_positive = v.ep > 0.0 && v.ep > 10.0 * v.ep_error;
    v.statement =
        v.strictly_positive ? "strictly positive" : "not resolved above quadrature error";
    return v;
}

std::string summarize_conditions(const NessEvaluator& ev) {
    const ConditionReport& c = ev.conditions();
    std::string s;
    s += c.resolvent_sup.bounded ? "boundary resolvent bounded" : "boundary resolvent unbounded";
    s += "; resonance gap ";
    s += format_sig12(c.eta_gap.min_abs);
    s += c.eta_gap.pass ? " above " : " below ";
    s += format_sig12(c.eta_gap.threshold);
    s += c.eta_zero_finite ? "; eta(0) finite" : "; eta(0) divergent";
    return s;
}

}  // namespace

CurrentValue charge_current(const NessEvaluator& ev, std::size_t l) {
    CurrentValue v = thermal_current(ev, l, false);
    v.value += josephson(ev, l);
    return v;
}

CurrentValue energy_current(const NessEvaluator& ev, std::size_t l) {
    return thermal_current(ev, l, true);
}

double josephson(const NessEvaluator& ev, std::size_t l) {
    if (l >= ev.n_reservoirs()) throw std::out_of_range("reservoir index");
    const CoupledModel& m = ev.model();
    if (m.system.lambda == 0.0) return 0.0;
    if (!phase_active(m.reservoirs[l].phase)) return 0.0;
    const ReservoirData& rl = ev.reservoir(l);
    if (!rl.v_pairing_ok)
        throw std::runtime_error("condensate pairing unavailable for reservoir " +
                                 std::to_string(l));
    const double tl_re = theta_eval(m.reservoirs[l].phase, rl.v_dot_g);
    const double tl_im = theta_eval(m.reservoirs[l].phase, cdouble{0.0, 1.0} * rl.v_dot_g);
    double acc = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        if (k == l || !phase_active(m.reservoirs[k].phase)) continue;
        const ReservoirData& rk = ev.reservoir(k);
        if (!rk.v_pairing_ok)
            throw std::runtime_error("condensate pairing unavailable for reservoir " +
                                     std::to_string(k));
        const double tk_re = theta_eval(m.reservoirs[k].phase, rk.v_dot_g);
        const double tk_im = theta_eval(m.reservoirs[k].phase, cdouble{0.0, 1.0} * rk.v_dot_g);
        acc += tk_re * tl_im - tk_im * tl_re;
        any = true;
    }
    if (!any) return 0.0;
    const double lam = m.system.lambda;
    return std::pow(std::numbers::pi, 3) * lam * lam / ev.eta_zero() * acc;
}

CurrentValue entropy_production(const NessEvaluator& ev) {
    const double lam = ev.model().system.lambda;
    if (lam == 0.0) return {};
    require_transport_usable(ev);
    const auto& grid = ev.grid();
    const std::vector<double> grid2 = every_other(grid);
    double fine = 0.0, coarse = 0.0;
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        const Occupation ok = occupation_of(ev.reservoir(k).spec);
        for (std::size_t l = 0; l < ev.n_reservoirs(); ++l) {
            if (k == l) continue;
            const Occupation ol = occupation_of(ev.reservoir(l).spec);
            const std::vector<double> kern = pair_kernel(ev, k, l);
            const std::vector<double> kern2 = every_other(kern);
            fine += ep_pair(grid, kern, ol, ok);
            coarse += ep_pair(grid2, kern2, ol, ok);
        }
    }
    const double pref = std::numbers::pi * lam * lam * lam * lam;
    return {pref * fine, std::abs(pref * (fine - coarse))};
}

ChannelMatrix open_channels(const NessEvaluator& ev, double threshold) {
    ChannelMatrix cm;
    cm.n = ev.n_reservoirs();
    cm.threshold = threshold;
    cm.measure.assign(cm.n * cm.n, 0.0);
    const auto& grid = ev.grid();
    if (grid.size() < 2) return cm;
    const double h = grid[1] - grid[0];
    for (std::size_t k = 0; k < cm.n; ++k)
        for (std::size_t l = 0; l < cm.n; ++l) {
            const std::vector<double> kern = pair_kernel(ev, k, l);
            std::size_t count = 0;
            for (double v : kern)
                if (v > threshold) ++count;
            cm.measure[k * cm.n + l] = static_cast<double>(count) * h;
        }
    return cm;
}

PositivityVerdict positivity_verdict(const NessEvaluator& ev, double channel_threshold) {
    return make_verdict(ev, open_channels(ev, channel_threshold), entropy_production(ev));
}

TransportReport transport_report(const NessEvaluator& ev, double channel_threshold) {
    TransportReport rep;
    const std::size_t n = ev.n_reservoirs();
    rep.J.resize(n);
    rep.E.resize(n);
    rep.Jos.resize(n);
    rep.J_error.resize(n);
    rep.E_error.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        const CurrentValue th = thermal_current(ev, l, false);
        const CurrentValue en = thermal_current(ev, l, true);
        rep.Jos[l] = josephson(ev, l);
        rep.J[l] = th.value + rep.Jos[l];
        rep.J_error[l] = th.quad_error;
        rep.E[l] = en.value;
        rep.E_error[l] = en.quad_error;
    }
    const CurrentValue ep = entropy_production(ev);
    rep.entropy_production = ep.value;
    rep.entropy_production_error = ep.quad_error;
    rep.channels = open_channels(ev, channel_threshold);
    rep.verdict = make_verdict(ev, rep.channels, ep);
    rep.condition_summary = summarize_conditions(ev);
    return rep;
}

std::string export_transport_csv(const TransportReport& rep) {
    std::string s = "l,J,E,Jos\n";
    for (std::size_t l = 0; l < rep.J.size(); ++l) {
        s += std::to_string(l) + ',' + format_sig12(rep.J[l]) + ',' +
             format_sig12(rep.E[l]) + ',' + format_sig12(rep.Jos[l]) + '\n';
    }
    s += "\nkey,value\n";
    s += "entropy_production," + format_sig12(rep.entropy_production) + '\n';
    s += "entropy_production_error," + format_sig12(rep.entropy_production_error) + '\n';
    s += "verdict," + rep.verdict.statement + '\n';
    s += "conditions," + rep.condition_summary + '\n';
    for (std::size_t k = 0; k < rep.channels.n; ++k)
        for (std::size_t l = 0; l < rep.channels.n; ++l)
            if (k != l)
                s += "channel_" + std::to_string(k) + "_" + std::to_string(l) + ',' +
                     format_sig12(rep.channels.at(k, l)) + '\n';
    return s;
}

}  // namespace bosejj
