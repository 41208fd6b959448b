#include "bosejj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace bosejj {

int TruncatedModel::index_of(std::size_t k, int j) const {
    if (k >= offsets.size()) throw std::out_of_range("reservoir index");
    if (j < 0 || j >= modes_per_reservoir[k]) throw std::out_of_range("mode index");
    return 1 + static_cast<int>(offsets[k]) + j;
}

double TruncatedModel::recurrence_time() const {
    return delta_nu_min > 0.0 ? 2.0 * std::numbers::pi / delta_nu_min : 0.0;
}

TruncatedModel build_truncation(const NessEvaluator& ev, int modes_per_reservoir) {
    if (modes_per_reservoir < 2)
        throw std::invalid_argument("need at least two modes per reservoir");
    TruncatedModel tm;
    tm.omega = ev.model().system.omega;
    tm.lambda = ev.model().system.lambda;
    tm.delta_nu_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        const ReservoirData& r = ev.reservoir(k);
        const double hi = r.rho_g.support_hi;
        if (!(hi > 0.0) || r.rho_g.values.empty())
            throw std::invalid_argument("reservoir " + std::to_string(k) + " has no density");
        const int m = modes_per_reservoir;
        const double d = hi / m;
        tm.offsets.push_back(tm.modes.size());
        tm.modes_per_reservoir.push_back(m);
        tm.beta_mu.emplace_back(r.spec.beta, r.spec.mu);
        const std::size_t first = tm.modes.size();
        double mass = 0.0;
        for (int j = 0; j < m; ++j) {
            const double nu = (j + 0.5) * d;
            const double w2 = std::max(r.rho_g.at(nu), 0.0) * d;
            tm.modes.push_back({k, j, nu, std::sqrt(w2)});
            mass += w2;
        }
        if (!(mass > 0.0))
            throw std::invalid_argument("reservoir " + std::to_string(k) +
                                        " density vanishes on every cell");
        // The discrete measure carries exactly the table mass.
        const double scale = std::sqrt(r.rho_g.total_mass / mass);
        for (std::size_t i = first; i < tm.modes.size(); ++i) tm.modes[i].w *= scale;
        tm.delta_nu_min = std::min(tm.delta_nu_min, d);
    }
    tm.size = 1 + static_cast<int>(tm.modes.size());
    return tm;
}

std::vector<double> dense_matrix(const TruncatedModel& tm) {
    const std::size_t n = static_cast<std::size_t>(tm.size);
    std::vector<double> h(n * n, 0.0);
    h[0] = tm.omega;
    for (std::size_t i = 0; i < tm.modes.size(); ++i) {
        const std::size_t row = i + 1;
        h[row * n + row] = tm.modes[i].nu;
        h[row] = tm.lambda * tm.modes[i].w;
        h[row * n] = tm.lambda * tm.modes[i].w;
    }
    return h;
}

double truncation_w1_gap(const NessEvaluator& ev, const TruncatedModel& tm, std::size_t k) {
    const ReservoirData& r = ev.reservoir(k);
    const auto& grid = r.rho_g.grid;
    const auto& vals = r.rho_g.values;

    // cumulative table mass at the grid nodes
    std::vector<double> cum(grid.size(), 0.0);
    for (std::size_t j = 1; j < grid.size(); ++j)
        cum[j] = cum[j - 1] + 0.5 * (vals[j] + vals[j - 1]) * (grid[j] - grid[j - 1]);
    auto cdf_rho = [&](double x) {
        if (x <= grid.front()) return 0.0;
        if (x >= grid.back()) return cum.back();
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t j = static_cast<std::size_t>(std::distance(grid.begin(), it)) - 1;
        const double fx = interp_linear(grid, vals, x);
        return cum[j] + 0.5 * (vals[j] + fx) * (x - grid[j]);
    };

    std::vector<double> nus, masses;
    for (std::size_t i = tm.offsets[k];
         i < tm.modes.size() && tm.modes[i].reservoir == k; ++i) {
        nus.push_back(tm.modes[i].nu);
        masses.push_back(masses.empty() ? tm.modes[i].w * tm.modes[i].w
                                        : masses.back() + tm.modes[i].w * tm.modes[i].w);
    }
    auto cdf_disc = [&](double x) {
        const auto it = std::upper_bound(nus.begin(), nus.end(), x);
        if (it == nus.begin()) return 0.0;
        return masses[static_cast<std::size_t>(std::distance(nus.begin(), it)) - 1];
    };

    std::vector<double> pts(grid.begin(), grid.end());
    pts.insert(pts.end(), nus.begin(), nus.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    double w1 = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double a = pts[j], b = pts[j + 1], m = 0.5 * (a + b);
        const double fa = std::abs(cdf_rho(a) - cdf_disc(m));
        const double fm = std::abs(cdf_rho(m) - cdf_disc(m));
        const double fb = std::abs(cdf_rho(b) - cdf_disc(m));
        w1 += (fa + 4.0 * fm + fb) / 6.0 * (b - a);
    }
    return w1;
}

TruncatedProbe project_probe(const NessEvaluator& ev, const TruncatedModel& tm,
                             const TestVector& f) {
    if (f.psi.size() != ev.n_reservoirs())
        throw std::invalid_argument("probe has wrong component count");
    TruncatedProbe out;
    out.c = f.c;
    out.coupled.assign(tm.modes.size(), cdouble{});
    out.perp_sq.assign(tm.modes.size(), 0.0);
    const auto& grid = ev.grid();
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        if (probe_is_zero(f.psi[k])) continue;
        const std::vector<cdouble> cross = ev.cross_density(k, ev.g_probe(k), f.psi[k]);
        const std::vector<double> diag = ev.diag_density(k, f.psi[k]);
        const double d = ev.reservoir(k).rho_g.support_hi / tm.modes_per_reservoir[k];
        for (int j = 0; j < tm.modes_per_reservoir[k]; ++j) {
            const std::size_t g = tm.offsets[k] + static_cast<std::size_t>(j);
            const double a = j * d, b = (j + 1) * d;
            const cdouble cm = integral_between(grid, std::span<const cdouble>(cross), a, b);
            const double dm =
                std::max(integral_between(grid, std::span<const double>(diag), a, b), 0.0);
            const double w = tm.modes[g].w;
            const cdouble amp = (w > 1e-12) ? cm / w : cdouble{};
            // Cauchy-Schwarz on the cell bounds |amp|^2 by the cell mass;
            // estimator noise can overshoot, the remainder is clamped.
            out.coupled[g] = amp;
            out.perp_sq[g] = std::max(dm - std::norm(amp), 0.0);
        }
    }
    out.norm_sq = std::norm(out.c);
    for (std::size_t i = 0; i < out.coupled.size(); ++i)
        out.norm_sq += std::norm(out.coupled[i]) + out.perp_sq[i];
    return out;
}

ProbePairing project_pairing(const NessEvaluator& ev, const TruncatedModel& tm,
                             const TestVector& xi, const TestVector& f,
                             const TruncatedProbe& f_proj) {
    if (xi.psi.size() != ev.n_reservoirs() || f.psi.size() != ev.n_reservoirs())
        throw std::invalid_argument("probe has wrong component count");
    if (f_proj.coupled.size() != tm.modes.size())
        throw std::invalid_argument("projected probe does not match the truncation");
    ProbePairing out;
    out.coupled.assign(tm.modes.size(), cdouble{});
    out.free_cross.assign(tm.modes.size(), cdouble{});
    const auto& grid = ev.grid();
    for (std::size_t k = 0; k < ev.n_reservoirs(); ++k) {
        if (probe_is_zero(xi.psi[k])) continue;
        const std::vector<cdouble> cross_gxi = ev.cross_density(k, ev.g_probe(k), xi.psi[k]);
        std::vector<cdouble> cross_xipsi;
        if (!probe_is_zero(f.psi[k]))
            cross_xipsi = ev.cross_density(k, xi.psi[k], f.psi[k]);
        const double d = ev.reservoir(k).rho_g.support_hi / tm.modes_per_reservoir[k];
        for (int j = 0; j < tm.modes_per_reservoir[k]; ++j) {
            const std::size_t g = tm.offsets[k] + static_cast<std::size_t>(j);
            const double a = j * d, b = (j + 1) * d;
            const double w = tm.modes[g].w;
            const cdouble axi =
                (w > 1e-12)
                    ? integral_between(grid, std::span<const cdouble>(cross_gxi), a, b) / w
                    : cdouble{};
            cdouble cell{};
            if (!cross_xipsi.empty())
                cell = integral_between(grid, std::span<const cdouble>(cross_xipsi), a, b);
            out.coupled[g] = axi;
            out.free_cross[g] = cell - std::conj(axi) * f_proj.coupled[g];
        }
    }
    return out;
}

TruncatedEvolver::TruncatedEvolver(const TruncatedModel& tm)
    : omega_(tm.omega), lambda_(tm.lambda), modes_(tm.modes) {
    std::vector<int> order(modes_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return modes_[a].nu < modes_[b].nu; });

    // Exactly equal energies share one group; the coupling concentrates on
    // the w-weighted representative and the complement evolves freely.
    for (std::size_t i = 0; i < order.size();) {
        Group g;
        g.nu = modes_[static_cast<std::size_t>(order[i])].nu;
        double wsum2 = 0.0;
        std::size_t j = i;
        while (j < order.size() && modes_[static_cast<std::size_t>(order[j])].nu == g.nu) {
            const auto& m = modes_[static_cast<std::size_t>(order[j])];
            g.members.push_back(order[j]);
            wsum2 += m.w * m.w;
            ++j;
        }
        g.W = std::sqrt(wsum2);
        g.frac.resize(g.members.size(), 0.0);
        for (std::size_t s = 0; s < g.members.size(); ++s)
            if (g.W > 0.0)
                g.frac[s] = modes_[static_cast<std::size_t>(g.members[s])].w / g.W;
        groups_.push_back(std::move(g));
        i = j;
    }

    for (auto& g : groups_) {
        if (lambda_ != 0.0 && g.W > 0.0) {
            g.pole = static_cast<int>(eps_.size());
            eps_.push_back(g.nu);
            lamw_.push_back(lambda_ * g.W);
            lamw2_.push_back(lambda_ * lambda_ * g.W * g.W);
        }
    }

    const std::size_t K = eps_.size();
    eigs_.resize(K + 1);
    norm_.resize(K + 1);
    if (K == 0) {
        eigs_[0] = omega_;
        norm_[0] = 1.0;
        return;
    }

    double wnorm = 0.0;
    for (double v : lamw2_) wnorm += v;
    wnorm = std::sqrt(wnorm);

    // One root per pole gap plus one below and one above (the secular
    // function is increasing on every gap).
    double lo = std::min(omega_, eps_.front()) - wnorm - 1e-6;
    while (secular(lo) >= 0.0) lo -= std::max(1.0, std::abs(lo));
    eigs_[0] = bisect(lo, eps_.front());
    for (std::size_t a = 0; a + 1 < K; ++a) eigs_[a + 1] = bisect(eps_[a], eps_[a + 1]);
    double hi = std::max(omega_, eps_.back()) + wnorm + 1e-6;
    while (secular(hi) <= 0.0) hi += std::max(1.0, std::abs(hi));
    eigs_[K] = bisect(eps_.back(), hi);

    for (std::size_t r = 0; r <= K; ++r) {
        double s = 1.0;
        for (std::size_t a = 0; a < K; ++a) {
            const double d = eigs_[r] - eps_[a];
            s += lamw2_[a] / (d * d);
        }
        norm_[r] = 1.0 / std::sqrt(s);
    }
}

double TruncatedEvolver::secular(double x) const {
    double s = x - omega_;
    for (std::size_t a = 0; a < eps_.size(); ++a) s -= lamw2_[a] / (x - eps_[a]);
    return s;
}

double TruncatedEvolver::bisect(double lo, double hi) const {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (secular(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double TruncatedEvolver::secular_residual() const {
    // Newton-step size at each root; |s| alone is ill-conditioned near poles.
    double worst = 0.0;
    for (double e : eigs_) {
        double sp = 1.0;
        for (std::size_t a = 0; a < eps_.size(); ++a) {
            const double d = e - eps_[a];
            sp += lamw2_[a] / (d * d);
        }
        worst = std::max(worst, std::abs(secular(e)) / sp);
    }
    return worst;
}

EvolutionResult TruncatedEvolver::evolve(const TruncatedProbe& f, double t,
                                         std::span<const ProbePairing> pairings) const {
    if (f.coupled.size() != modes_.size() || f.perp_sq.size() != modes_.size())
        throw std::invalid_argument("probe does not match the truncation");
    const std::size_t K = eps_.size();

    std::vector<cdouble> A(groups_.size());
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        const Group& g = groups_[gi];
        cdouble acc{};
        for (std::size_t s = 0; s < g.members.size(); ++s)
            acc += g.frac[s] * f.coupled[static_cast<std::size_t>(g.members[s])];
        A[gi] = acc;
    }

    std::vector<cdouble> apole(K);
    for (std::size_t gi = 0; gi < groups_.size(); ++gi)
        if (groups_[gi].pole >= 0) apole[static_cast<std::size_t>(groups_[gi].pole)] = A[gi];

    std::vector<cdouble> y(K + 1);
    for (std::size_t r = 0; r <= K; ++r) {
        cdouble acc = f.c;
        for (std::size_t a = 0; a < K; ++a)
            acc += lamw_[a] * apole[a] / (eigs_[r] - eps_[a]);
        y[r] = norm_[r] * acc;
    }

    cdouble ct{};
    std::vector<cdouble> apole_t(K, cdouble{});
    for (std::size_t r = 0; r <= K; ++r) {
        const cdouble ph = std::exp(cdouble{0.0, t * eigs_[r]}) * y[r] * norm_[r];
        ct += ph;
        for (std::size_t a = 0; a < K; ++a)
            apole_t[a] += ph * lamw_[a] / (eigs_[r] - eps_[a]);
    }

    EvolutionResult out;
    out.t = t;
    out.c_of_t = ct;
    out.coupled.assign(modes_.size(), cdouble{});
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        const Group& g = groups_[gi];
        const cdouble phase = std::exp(cdouble{0.0, t * g.nu});
        const cdouble ag_t =
            g.pole >= 0 ? apole_t[static_cast<std::size_t>(g.pole)] : phase * A[gi];
        for (std::size_t s = 0; s < g.members.size(); ++s) {
            const std::size_t i = static_cast<std::size_t>(g.members[s]);
            const cdouble resid = f.coupled[i] - g.frac[s] * A[gi];
            out.coupled[i] = g.frac[s] * ag_t + phase * resid;
        }
    }

    double n0 = std::norm(f.c), nt = std::norm(ct);
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        n0 += std::norm(f.coupled[i]) + f.perp_sq[i];
        nt += std::norm(out.coupled[i]) + f.perp_sq[i];
    }
    out.norm_error = std::abs(std::sqrt(nt) - std::sqrt(n0));

    out.overlaps.reserve(pairings.size());
    for (const ProbePairing& p : pairings) {
        if (p.coupled.size() != modes_.size())
            throw std::invalid_argument("pairing does not match the truncation");
        cdouble acc{};
        for (std::size_t i = 0; i < modes_.size(); ++i)
            acc += std::conj(p.coupled[i]) * out.coupled[i] +
                   std::exp(cdouble{0.0, t * modes_[i].nu}) * p.free_cross[i];
        out.overlaps.push_back(acc);
    }
    return out;
}

EvolutionResult evolve_matrix(const TruncatedModel& tm, const TruncatedProbe& f, double t) {
    return TruncatedEvolver(tm).evolve(f, t);
}

double quench_covariance(const TruncatedModel& tm, const TruncatedEvolver& evolver,
                         const TruncatedProbe& f, double t) {
    const EvolutionResult r = evolver.evolve(f, t);
    double s = 0.0;
    for (std::size_t i = 0; i < tm.modes.size(); ++i) {
        const TruncatedMode& m = tm.modes[i];
        const auto [beta, mu] = tm.beta_mu[m.reservoir];
        const double occ = bose_occupation(beta, mu, m.nu);
        if (!std::isfinite(occ)) throw std::domain_error("mode at the Bose pole");
        s += (occ + 0.5) * (std::norm(r.coupled[i]) + f.perp_sq[i]);
    }
    return s;
}

std::vector<AnalyticEvolution> evolve_analytic_series(const NessEvaluator& ev,
                                                      const TestVector& f,
                                                      std::span<const double> times,
                                                      std::span<const TestVector> probes) {
    if (ev.model().system.lambda == 0.0)
        throw std::invalid_argument(
            "decoupled model: boundary-value evolution needs the resonance gap");
    if (!ev.conditions().usable())
        throw ConditionFailure("boundary-value evolution refused: conditions fail");

    const auto& grid = ev.grid();
    const std::size_t n = grid.size();
    const double lam = ev.model().system.lambda;
    const FFunctionData data = ev.f_table(f);
    const auto& etap = ev.eta_plus_grid();

    // d<g, E phi(f)> = rho_{g psi} + m rho_g.
    std::vector<cdouble> rho_gphi(n), ck(n);
    for (std::size_t j = 0; j < n; ++j) {
        rho_gphi[j] = data.cross[j] + data.m_values[j] * ev.rho_g_total().values[j];
        ck[j] = lam * rho_gphi[j] / etap[j];
    }

    std::vector<std::vector<cdouble>> ptabs;
    ptabs.reserve(probes.size());
    for (const TestVector& xi : probes) {
        if (xi.psi.size() != ev.n_reservoirs())
            throw std::invalid_argument("probe has wrong component count");
        std::vector<cdouble> free_tab(n, cdouble{}), rho_xig(n, cdouble{});
        for (std::size_t l = 0; l < ev.n_reservoirs(); ++l) {
            if (probe_is_zero(xi.psi[l])) continue;
            const auto cg = ev.cross_density(l, xi.psi[l], ev.g_probe(l));
            for (std::size_t j = 0; j < n; ++j) rho_xig[j] += cg[j];
            if (!probe_is_zero(f.psi[l])) {
                const auto cp = ev.cross_density(l, xi.psi[l], f.psi[l]);
                for (std::size_t j = 0; j < n; ++j) free_tab[j] += cp[j];
            }
        }
        std::vector<cdouble> tab(n);
        for (std::size_t j = 0; j < n; ++j) {
            free_tab[j] += data.m_values[j] * rho_xig[j];
            // <xi, (h00 - nu - i0)^{-1} g> from the cross table boundary values
            const cdouble bv =
                -pv_hilbert_at(grid, std::span<const cdouble>(rho_xig), grid[j]) +
                cdouble{0.0, std::numbers::pi} * rho_xig[j];
            tab[j] = free_tab[j] - lam * lam / etap[j] * bv * rho_gphi[j];
        }
        ptabs.push_back(std::move(tab));
    }

    std::vector<AnalyticEvolution> out;
    out.reserve(times.size());
    std::vector<cdouble> phase(n), integ(n);
    for (double t : times) {
        AnalyticEvolution e;
        e.t = t;
        for (std::size_t j = 0; j < n; ++j) phase[j] = std::exp(cdouble{0.0, t * grid[j]});
        for (std::size_t j = 0; j < n; ++j) integ[j] = phase[j] * ck[j];
        e.c_of_t = trapezoid(grid, std::span<const cdouble>(integ));
        for (const auto& tab : ptabs) {
            for (std::size_t j = 0; j < n; ++j) integ[j] = phase[j] * tab[j];
            e.overlaps.push_back(trapezoid(grid, std::span<const cdouble>(integ)));
        }
        out.push_back(std::move(e));
    }
    return out;
}

AnalyticEvolution evolve_analytic(const NessEvaluator& ev, const TestVector& f, double t,
                                  std::span<const TestVector> probes) {
    const double times[1] = {t};
    return evolve_analytic_series(ev, f, times, probes).front();
}

ContourCheck contour_identity_check(const NessEvaluator& ev, double t, double eps0) {
    ContourCheck out;
    out.t = t;
    const double lam = ev.model().system.lambda;
    if (lam == 0.0) {
        // z - Omega has no branch cut: both sides vanish identically.
        out.degenerate = true;
        return out;
    }
    if (eps0 <= 0.0) throw std::invalid_argument("broadening must be positive");

    SelfEnergySpec spec;
    spec.omega = ev.model().system.omega;
    spec.lambda = lam;
    spec.rho_g = ev.rho_g_total();

    const auto& xg = ev.eta().grid;
    auto line_integral = [&](double eps) {
        std::vector<cdouble> integ(xg.size());
        for (std::size_t i = 0; i < xg.size(); ++i) {
            const double x = xg[i];
            const cdouble lower = std::exp(cdouble{t * eps, t * x}) / eta_at(spec, {x, -eps});
            const cdouble upper = std::exp(cdouble{-t * eps, t * x}) / eta_at(spec, {x, eps});
            integ[i] = lower - upper;
        }
        return trapezoid(xg, std::span<const cdouble>(integ)) /
               cdouble{0.0, 2.0 * std::numbers::pi};
    };
    out.lhs_coarse = line_integral(eps0);
    out.lhs_fine = line_integral(eps0 / 10.0);
    // The broadening error is linear in eps on the ladder {eps, eps/10}.
    out.lhs = (10.0 * out.lhs_fine - out.lhs_coarse) / 9.0;

    const auto& grid = ev.grid();
    std::vector<cdouble> integ(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        integ[j] = std::exp(cdouble{0.0, t * grid[j]}) * ev.rho_g_total().values[j] /
                   ev.eta_abs_sq()[j];
    out.rhs = lam * lam * trapezoid(grid, std::span<const cdouble>(integ));

    out.residual_coarse = std::abs(out.lhs_coarse - out.rhs);
    out.residual_fine = std::abs(out.lhs_fine - out.rhs);
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

std::string export_time_series_csv(std::span<const double> t, std::span<const cdouble> c,
                                   std::span<const double> covariance) {
    if (c.size() != t.size())
        throw std::invalid_argument("time series columns differ in length");
    if (!covariance.empty() && covariance.size() != t.size())
        throw std::invalid_argument("time series columns differ in length");
    std::string s = "t,re_c,im_c,abs_c,covariance\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        s += format_sig12(t[i]) + ',' + format_sig12(c[i].real()) + ',' +
             format_sig12(c[i].imag()) + ',' + format_sig12(std::abs(c[i])) + ',' +
             format_sig12(covariance.empty() ? 0.0 : covariance[i]) + '\n';
    }
    return s;
}

}  // namespace bosejj
