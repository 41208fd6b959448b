#include "bosejj/ness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace bosejj {

namespace {

// Chebyshev extent of a lattice form-factor support; K delta spreads one hop.
int graph_extent(const FormFactor& f) {
    int ext = 0;
    if (const auto* kd = std::get_if<KDeltaFormFactor>(&f)) {
        for (int c : kd->site) ext = std::max(ext, std::abs(c));
        return ext + 1;
    }
    if (const auto* ex = std::get_if<ExplicitFormFactor>(&f)) {
        for (const auto& [coords, amp] : ex->entries)
            for (int c : coords) ext = std::max(ext, std::abs(c));
        return ext;
    }
    throw std::invalid_argument("graph reservoir needs a lattice form factor");
}

// Base and tooth extents on the comb; the tooth coordinate is last.
std::pair<int, int> comb_extent(const FormFactor& f, int d) {
    int base = 0, tooth = 0;
    auto take = [&](const std::vector<int>& site, int pad) {
        for (int j = 0; j < d && j < static_cast<int>(site.size()); ++j)
            base = std::max(base, std::abs(site[j]) + pad);
        if (static_cast<int>(site.size()) > d)
            tooth = std::max(tooth, std::abs(site[d]) + pad);
    };
    if (const auto* kd = std::get_if<KDeltaFormFactor>(&f)) {
        take(kd->site, 1);
        return {base, tooth};
    }
    if (const auto* ex = std::get_if<ExplicitFormFactor>(&f)) {
        for (const auto& [coords, amp] : ex->entries) take(coords, 0);
        return {base, tooth};
    }
    throw std::invalid_argument("comb reservoir needs a lattice form factor");
}

ReservoirData build_reservoir(const ReservoirSpec& spec, const NessOptions& opts) {
    ReservoirData r;
    r.spec = spec;
    switch (spec.kind) {
        case ReservoirKind::ContinuumRd: {
            const auto* rad = std::get_if<RadialFormFactor>(&spec.form_factor);
            if (!rad) throw std::invalid_argument("continuum reservoir needs a radial form factor");
            r.g_radial = *rad;
            r.rho_g = density_continuum_rd(spec.dim, *rad, opts.spectral);
            r.v_dot_g = rad->value(0.0);
            r.v_pairing_ok = true;
            break;
        }
        case ReservoirKind::LatticeZd: {
            const int need = graph_extent(spec.form_factor) + opts.boundary_margin + 2;
            r.patch = make_zd_patch(spec.dim, std::max(opts.zd_patch_radius, need),
                                    opts.boundary_margin);
            r.g_site = realize_on_patch(*r.patch, spec.form_factor);
            r.rho_g = density_lattice_zd(*r.patch, r.g_site, opts.spectral);
            r.weight = pf_weight(*r.patch);
            r.v_dot_g = pf_pairing(*r.patch, *r.weight, r.g_site);
            r.v_pairing_ok = true;
            break;
        }
        case ReservoirKind::CombZdZ: {
            const auto [base, tooth] = comb_extent(spec.form_factor, spec.dim);
            r.patch = make_comb_patch(
                spec.dim, std::max(opts.comb_base_radius, base + opts.boundary_margin + 2),
                std::max(opts.comb_tooth_length, tooth + opts.boundary_margin + 2),
                opts.boundary_margin);
            r.g_site = realize_on_patch(*r.patch, spec.form_factor);
            r.rho_g = density_graph_resolvent(*r.patch, r.g_site, opts.spectral);
            r.weight = pf_weight(*r.patch);
            r.v_dot_g = pf_pairing(*r.patch, *r.weight, r.g_site);
            r.v_pairing_ok = true;
            break;
        }
        case ReservoirKind::Tabulated: {
            std::ifstream in(spec.density_csv);
            if (!in)
                throw std::invalid_argument("cannot open density table: " + spec.density_csv);
            std::ostringstream ss;
            ss << in.rdbuf();
            r.rho_g = import_density_csv(ss.str());
            r.v_pairing_ok = false;
            break;
        }
    }
    return r;
}

}  // namespace

bool probe_is_zero(const ProbeComponent& comp) {
    if (std::holds_alternative<std::monostate>(comp)) return true;
    if (const auto* g = std::get_if<GraphExplicit>(&comp)) {
        for (const auto& [v, a] : g->amp)
            if (a != cdouble{0.0, 0.0}) return false;
        return true;
    }
    const auto& rad = std::get<RadialFormFactor>(comp);
    for (double s : rad.samples)
        if (s != 0.0) return false;
    return true;
}

TestVector TestVector::zero(std::size_t n_reservoirs) {
    TestVector f;
    f.psi.resize(n_reservoirs);
    return f;
}

TestVector scale(const TestVector& f, double r) {
    TestVector out = f;
    out.c *= r;
    for (auto& comp : out.psi) {
        if (auto* g = std::get_if<GraphExplicit>(&comp)) {
            for (auto& [v, a] : g->amp) a *= r;
        } else if (auto* rad = std::get_if<RadialFormFactor>(&comp)) {
            for (double& s : rad->samples) s *= r;
        }
    }
    return out;
}

NessEvaluator::NessEvaluator(CoupledModel model, NessOptions opts)
    : model_(std::move(model)), opts_(opts) {
    // lambda = 0 is below the declared coupling range but is accepted here as
    // the decoupled diagnostic limit; every other violation is fatal.
    CoupledModel checked = model_;
    if (checked.system.lambda == 0.0) checked.system.lambda = 1.0;
    const auto violations = validate(checked);
    if (!violations.empty())
        throw std::invalid_argument("invalid model: " + violations.front());

    reservoirs_.reserve(model_.reservoirs.size());
    double hi = 0.0;
    for (const auto& spec : model_.reservoirs) {
        reservoirs_.push_back(build_reservoir(spec, opts_));
        hi = std::max(hi, reservoirs_.back().rho_g.support_hi);
    }
    if (hi <= 0.0) throw std::invalid_argument("empty aggregate coupling support");

    grid_ = uniform_grid(0.0, hi, opts_.spectral.grid_points);
    std::vector<double> total(grid_.size(), 0.0);
    for (auto& r : reservoirs_) {
        r.rho_g_common = resample_real(r.rho_g);
        for (std::size_t j = 0; j < grid_.size(); ++j) total[j] += r.rho_g_common[j];
    }
    rho_g_total_.grid = grid_;
    rho_g_total_.values = total;
    rho_g_total_.support_lo = 0.0;
    rho_g_total_.support_hi = hi;
    rho_g_total_.total_mass = trapezoid(grid_, std::span<const double>(total));

    SelfEnergySpec se;
    se.omega = model_.system.omega;
    se.lambda = model_.system.lambda;
    se.rho_g = rho_g_total_;
    eta_ = eta_boundary(se, opts_.spectral.grid_points);

    const double lam2 = se.lambda * se.lambda;
    eta_plus_grid_.resize(grid_.size());
    eta_abs_sq_.resize(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) {
        const double pv = pv_hilbert_at(grid_, std::span<const double>(total), grid_[j]);
        eta_plus_grid_[j] = {grid_[j] - se.omega - lam2 * pv,
                             lam2 * std::numbers::pi * total[j]};
        eta_abs_sq_[j] = std::norm(eta_plus_grid_[j]);
    }

    conditions_.resolvent_sup = check_resolvent_sup(rho_g_total_);
    conditions_.eta_gap = check_eta_lower_bound(eta_, opts_.eta_gap_threshold);
    conditions_.eta_zero_finite = eta_.eta_zero_finite;
}

double NessEvaluator::eta_zero() const {
    if (!eta_.eta_zero_finite)
        throw std::domain_error("eta(0) diverges: coupling density too heavy at the band bottom");
    return eta_.eta_zero;
}

void NessEvaluator::require_usable() const {
    // Decoupled limit: phi = psi, no resonance machinery is touched.
    if (model_.system.lambda == 0.0) return;
    if (conditions_.usable()) return;
    std::string msg = "steady-state evaluation refused:";
    if (!conditions_.resolvent_sup.bounded) msg += " boundary resolvent of rho_g unbounded;";
    if (!conditions_.eta_gap.pass) msg += " resonance gap fails (|eta| not bounded below);";
    throw ConditionFailure(msg);
}

void NessEvaluator::check_f_shape(const TestVector& f) const {
    if (f.psi.size() != reservoirs_.size())
        throw std::invalid_argument("test vector has " + std::to_string(f.psi.size()) +
                                    " components for " + std::to_string(reservoirs_.size()) +
                                    " reservoirs");
}

std::vector<double> NessEvaluator::resample_real(const SpectralDensity& rho) const {
    std::vector<double> out(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) out[j] = rho.at(grid_[j]);
    return out;
}

std::vector<cdouble> NessEvaluator::resample_complex(const ComplexDensity& rho) const {
    std::vector<cdouble> out(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) out[j] = rho.at(grid_[j]);
    return out;
}

ProbeComponent NessEvaluator::g_probe(std::size_t l) const {
    const ReservoirData& r = reservoirs_.at(l);
    switch (r.spec.kind) {
        case ReservoirKind::ContinuumRd:
            return *r.g_radial;
        case ReservoirKind::LatticeZd:
        case ReservoirKind::CombZdZ:
            return r.g_site;
        case ReservoirKind::Tabulated:
            break;
    }
    throw std::invalid_argument("tabulated reservoir has no explicit form-factor vector");
}

ProbeComponent NessEvaluator::realize_probe(std::size_t l, const FormFactor& f) const {
    const ReservoirData& r = reservoirs_.at(l);
    switch (r.spec.kind) {
        case ReservoirKind::ContinuumRd: {
            const auto* rad = std::get_if<RadialFormFactor>(&f);
            if (!rad)
                throw std::invalid_argument("continuum reservoir takes radial probes");
            return *rad;
        }
        case ReservoirKind::LatticeZd:
        case ReservoirKind::CombZdZ:
            return realize_on_patch(*r.patch, f);
        case ReservoirKind::Tabulated:
            break;
    }
    throw std::invalid_argument("tabulated reservoir has no probe representation");
}

std::vector<cdouble> NessEvaluator::cross_density(std::size_t l, const ProbeComponent& xi,
                                                  const ProbeComponent& zeta) const {
    const ReservoirData& r = reservoirs_.at(l);
    if (probe_is_zero(xi) || probe_is_zero(zeta))
        return std::vector<cdouble>(grid_.size());
    switch (r.spec.kind) {
        case ReservoirKind::ContinuumRd: {
            const auto* a = std::get_if<RadialFormFactor>(&xi);
            const auto* b = std::get_if<RadialFormFactor>(&zeta);
            if (!a || !b)
                throw std::invalid_argument(
                    "cross density unavailable: continuum reservoir takes radial probes");
            return resample_complex(density_continuum_rd_cross(r.spec.dim, *a, *b, opts_.spectral));
        }
        case ReservoirKind::LatticeZd: {
            const auto* a = std::get_if<GraphExplicit>(&xi);
            const auto* b = std::get_if<GraphExplicit>(&zeta);
            if (!a || !b)
                throw std::invalid_argument(
                    "cross density unavailable: lattice reservoir takes vertex probes");
            return resample_complex(density_lattice_zd_cross(*r.patch, *a, *b, opts_.spectral));
        }
        case ReservoirKind::CombZdZ: {
            const auto* a = std::get_if<GraphExplicit>(&xi);
            const auto* b = std::get_if<GraphExplicit>(&zeta);
            if (!a || !b)
                throw std::invalid_argument(
                    "cross density unavailable: comb reservoir takes vertex probes");
            return resample_complex(
                density_graph_resolvent_cross(*r.patch, *a, *b, opts_.spectral));
        }
        case ReservoirKind::Tabulated:
            break;
    }
    throw std::invalid_argument("cross density unavailable: tabulated reservoir");
}

std::vector<double> NessEvaluator::diag_density(std::size_t l, const ProbeComponent& comp) const {
    const ReservoirData& r = reservoirs_.at(l);
    if (probe_is_zero(comp)) return std::vector<double>(grid_.size(), 0.0);
    switch (r.spec.kind) {
        case ReservoirKind::ContinuumRd: {
            const auto* a = std::get_if<RadialFormFactor>(&comp);
            if (!a) throw std::invalid_argument("continuum reservoir takes radial probes");
            return resample_real(density_continuum_rd(r.spec.dim, *a, opts_.spectral));
        }
        case ReservoirKind::LatticeZd: {
            const auto* a = std::get_if<GraphExplicit>(&comp);
            if (!a) throw std::invalid_argument("lattice reservoir takes vertex probes");
            return resample_real(density_lattice_zd(*r.patch, *a, opts_.spectral));
        }
        case ReservoirKind::CombZdZ: {
            const auto* a = std::get_if<GraphExplicit>(&comp);
            if (!a) throw std::invalid_argument("comb reservoir takes vertex probes");
            return resample_real(density_graph_resolvent(*r.patch, *a, opts_.spectral));
        }
        case ReservoirKind::Tabulated:
            break;
    }
    throw std::invalid_argument("diagonal density unavailable: tabulated reservoir");
}

cdouble NessEvaluator::v_pairing(std::size_t l, const ProbeComponent& comp) const {
    if (probe_is_zero(comp)) return {};
    const ReservoirData& r = reservoirs_.at(l);
    switch (r.spec.kind) {
        case ReservoirKind::ContinuumRd: {
            const auto* rad = std::get_if<RadialFormFactor>(&comp);
            if (!rad) throw std::invalid_argument("continuum reservoir takes radial probes");
            return rad->value(0.0);
        }
        case ReservoirKind::LatticeZd:
        case ReservoirKind::CombZdZ: {
            const auto* ge = std::get_if<GraphExplicit>(&comp);
            if (!ge) throw std::invalid_argument("graph reservoir takes vertex probes");
            return pf_pairing(*r.patch, *r.weight, *ge);
        }
        case ReservoirKind::Tabulated:
            break;
    }
    throw std::invalid_argument("no PF weight for a tabulated reservoir");
}

FFunctionData NessEvaluator::f_table(const TestVector& f) const {
    check_f_shape(f);
    const std::size_t n = grid_.size();
    FFunctionData out;
    out.cross_per_reservoir.resize(reservoirs_.size());
    out.cross.assign(n, cdouble{});
    for (std::size_t l = 0; l < reservoirs_.size(); ++l) {
        if (probe_is_zero(f.psi[l])) {
            out.cross_per_reservoir[l].assign(n, cdouble{});
            continue;
        }
        out.cross_per_reservoir[l] = cross_density(l, g_probe(l), f.psi[l]);
        for (std::size_t j = 0; j < n; ++j) out.cross[j] += out.cross_per_reservoir[l][j];
    }

    bool divergent = false;
    for (std::size_t l = 0; l < reservoirs_.size(); ++l)
        out.g_hinv_psi += floored_pole_integral(std::span<const double>(grid_),
                                                out.cross_per_reservoir[l], &divergent);
    out.infrared_divergent = divergent;

    const double lam = model_.system.lambda;
    out.f_values.resize(n);
    out.m_values.assign(n, cdouble{});
    for (std::size_t j = 0; j < n; ++j) {
        const cdouble boundary =
            pv_hilbert_at(std::span<const double>(grid_),
                          std::span<const cdouble>(out.cross), grid_[j]) +
            cdouble{0.0, std::numbers::pi} * out.cross[j];
        out.f_values[j] = f.c + lam * boundary;
        if (lam != 0.0)
            out.m_values[j] = lam * out.f_values[j] / std::conj(eta_plus_grid_[j]);
    }
    return out;
}

cdouble NessEvaluator::f_function(const TestVector& f, double nu) const {
    const FFunctionData data = f_table(f);
    return interp_linear(grid_, std::span<const cdouble>(data.f_values), nu);
}

std::pair<cdouble, bool> NessEvaluator::phi_pairing(const FFunctionData& data,
                                                    const TestVector& f, std::size_t l) const {
    const ReservoirData& r = reservoirs_.at(l);
    if (!r.v_pairing_ok) return {cdouble{}, false};
    cdouble p = v_pairing(l, f.psi[l]);
    const double lam = model_.system.lambda;
    if (lam != 0.0) {
        if (!eta_.eta_zero_finite || eta_.eta_zero == 0.0 || data.infrared_divergent)
            return {p, false};
        p += (lam * f.c + lam * lam * data.g_hinv_psi) * (r.v_dot_g / eta_.eta_zero);
    }
    return {p, true};
}

PhiComponent NessEvaluator::phi_from(const FFunctionData& data, const TestVector& f,
                                     std::size_t l) const {
    const ReservoirData& r = reservoirs_.at(l);
    const std::size_t n = grid_.size();
    const std::vector<double> rho_psi = diag_density(l, f.psi[l]);
    const std::vector<cdouble>& cross = data.cross_per_reservoir[l];

    PhiComponent out;
    out.rho_phi.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const cdouble m = data.m_values[j];
        // rho_psi + 2 Re[m rho_{psi g}] + |m|^2 rho_g with rho_{psi g} = conj(rho_{g psi}).
        const double v = rho_psi[j] + 2.0 * std::real(m * std::conj(cross[j])) +
                         std::norm(m) * r.rho_g_common[j];
        out.rho_phi[j] = std::max(v, 0.0);
    }
    out.norm_sq = trapezoid(grid_, std::span<const double>(out.rho_phi));

    const double beta = r.spec.beta, mu = r.spec.mu;
    std::vector<double> w(n);
    if (mu < 0.0) {
        for (std::size_t j = 0; j < n; ++j)
            w[j] = (bose_occupation(beta, mu, grid_[j]) + 0.5) * out.rho_phi[j];
        out.covariance_term = trapezoid(grid_, std::span<const double>(w));
    } else {
        // N(nu) + 1/2 = (q(beta nu) + 1/2) + 1/(beta nu); the pole part is an
        // exact 1/nu moment of the table.
        for (std::size_t j = 0; j < n; ++j)
            w[j] = (bose_q(beta * grid_[j]) + 0.5) * out.rho_phi[j];
        bool divergent = false;
        const double pole =
            floored_pole_integral(std::span<const double>(grid_), out.rho_phi, &divergent);
        if (divergent)
            throw std::domain_error(
                "occupation integral diverges: distorted density of reservoir " +
                std::to_string(l) + " does not vanish at the band bottom");
        out.covariance_term = trapezoid(grid_, std::span<const double>(w)) + pole / beta;
    }

    const auto [pairing, valid] = phi_pairing(data, f, l);
    out.v_pairing = pairing;
    out.v_pairing_valid = valid;
    return out;
}

PhiComponent NessEvaluator::phi(const TestVector& f, std::size_t l) const {
    require_usable();
    check_f_shape(f);
    if (l >= reservoirs_.size()) throw std::out_of_range("reservoir index");
    return phi_from(f_table(f), f, l);
}

double NessEvaluator::ness_covariance(const TestVector& f) const {
    require_usable();
    check_f_shape(f);
    const FFunctionData data = f_table(f);
    double s = 0.0;
    for (std::size_t l = 0; l < reservoirs_.size(); ++l)
        s += phi_from(data, f, l).covariance_term;
    return s;
}

double NessEvaluator::ness_linear(const TestVector& f) const {
    require_usable();
    check_f_shape(f);
    bool any = false;
    for (const auto& r : reservoirs_) any = any || phase_active(r.spec.phase);
    if (!any) return 0.0;

    const FFunctionData data = f_table(f);
    double acc = 0.0;
    for (std::size_t l = 0; l < reservoirs_.size(); ++l) {
        const ReservoirData& r = reservoirs_[l];
        if (!phase_active(r.spec.phase)) continue;
        const auto [pairing, valid] = phi_pairing(data, f, l);
        if (!valid)
            throw std::runtime_error("condensate pairing unavailable for reservoir " +
                                     std::to_string(l));
        acc += theta_eval(r.spec.phase, pairing);
    }
    return acc;
}

double NessEvaluator::field_expectation(const TestVector& f) const {
    return std::pow(std::numbers::pi, 1.5) * ness_linear(f);
}

cdouble NessEvaluator::weyl_expectation(const TestVector& f) const {
    const double s = ness_covariance(f);
    const double lambda_f = ness_linear(f);
    return std::exp(cdouble{-0.5 * s, lambda_f});
}

}  // namespace bosejj
