#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bosejj/ness.hpp>
#include <bosejj/numerics.hpp>
#include <bosejj/oracle.hpp>

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace bosejj;

namespace {

std::string semi_csv_path() {
    static std::string p = testsupport::write_temp_file(
        "oracle_semi", testsupport::semicircle_csv(1.0, 3.0, 1.0, 2001));
    return p;
}

std::string tent_csv_path() {
    static std::string p = testsupport::write_temp_file(
        "oracle_tent", testsupport::tent_csv(0.5, 3.5, 0.8, 1401));
    return p;
}

CoupledModel tab_model(double omega, double lambda, const std::vector<std::string>& csvs,
                       double mu) {
    CoupledModel m;
    m.system.omega = omega;
    m.system.lambda = lambda;
    for (const auto& p : csvs) {
        ReservoirSpec r;
        r.kind = ReservoirKind::Tabulated;
        r.beta = 1.0;
        r.mu = mu;
        r.density_csv = p;
        m.reservoirs.push_back(r);
    }
    return m;
}

NessOptions grid_opts(int points) {
    NessOptions no;
    no.spectral.grid_points = points;
    return no;
}

// one semicircle band [1, 3], resonance centered: gap 0.18
const NessEvaluator& tab_main() {
    static NessEvaluator ev(tab_model(2.0, 0.3, {semi_csv_path()}, 0.0), grid_opts(2049));
    return ev;
}

const NessEvaluator& tab_decoupled() {
    static NessEvaluator ev(tab_model(2.0, 0.0, {semi_csv_path()}, 0.0), grid_opts(1025));
    return ev;
}

// two reservoirs with incommensurate cell widths: no exact mode collisions
const NessEvaluator& tab_two_band() {
    static NessEvaluator ev(tab_model(2.0, 0.25, {semi_csv_path(), tent_csv_path()}, -0.1),
                            grid_opts(1025));
    return ev;
}

// identical reservoirs: every cell energy appears twice, exactly
const NessEvaluator& tab_twin() {
    static NessEvaluator ev(tab_model(2.0, 0.25, {semi_csv_path(), semi_csv_path()}, -0.1),
                            grid_opts(1025));
    return ev;
}

// continuum reservoir with a healthy resonance gap (0.31) and eta(0) < 0
const NessEvaluator& cont_main() {
    static NessEvaluator ev = [] {
        RadialFormFactor g;
        g.support_radius = 3.0;
        g.samples.resize(601);
        for (int j = 0; j < 601; ++j) {
            double p = 3.0 * j / 600.0;
            g.samples[static_cast<std::size_t>(j)] = std::exp(-p * p / 4.0);
        }
        CoupledModel m;
        m.system.omega = 2.0;
        m.system.lambda = 0.2;
        ReservoirSpec r;
        r.kind = ReservoirKind::ContinuumRd;
        r.dim = 3;
        r.beta = 1.2;
        r.mu = -0.2;
        r.form_factor = g;
        m.reservoirs.push_back(r);
        return NessEvaluator(std::move(m), grid_opts(2049));
    }();
    return ev;
}

TestVector system_excitation(std::size_t n) {
    TestVector f = TestVector::zero(n);
    f.c = {1.0, 0.0};
    return f;
}

TruncatedProbe random_probe(const TruncatedModel& tm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TruncatedProbe p;
    p.c = {u(rng), u(rng)};
    p.coupled.resize(tm.modes.size());
    p.perp_sq.assign(tm.modes.size(), 0.0);
    for (auto& a : p.coupled) a = {u(rng), u(rng)};
    p.norm_sq = std::norm(p.c);
    for (const auto& a : p.coupled) p.norm_sq += std::norm(a);
    return p;
}

// e^{itH} through the dense eigensystem; referee for the secular solver
std::vector<cdouble> dense_evolve(const std::vector<double>& h, int n,
                                  const TruncatedProbe& p, double t) {
    auto eig = testsupport::jacobi_eig(h, n);
    std::vector<cdouble> x(static_cast<std::size_t>(n));
    x[0] = p.c;
    for (int i = 0; i + 1 < n; ++i) x[static_cast<std::size_t>(i) + 1] = p.coupled[static_cast<std::size_t>(i)];
    std::vector<cdouble> y(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        cdouble acc{};
        for (int v = 0; v < n; ++v) acc += eig.vectors[std::size_t(v) * n + r] * x[std::size_t(v)];
        y[static_cast<std::size_t>(r)] = acc * std::exp(cdouble{0.0, t * eig.values[std::size_t(r)]});
    }
    for (int v = 0; v < n; ++v) {
        cdouble acc{};
        for (int r = 0; r < n; ++r) acc += eig.vectors[std::size_t(v) * n + r] * y[std::size_t(r)];
        out[static_cast<std::size_t>(v)] = acc;
    }
    return out;
}

double evolve_gap(const EvolutionResult& a, const std::vector<cdouble>& dense) {
    double w = std::abs(a.c_of_t - dense[0]);
    for (std::size_t i = 0; i < a.coupled.size(); ++i)
        w = std::max(w, std::abs(a.coupled[i] - dense[i + 1]));
    return w;
}

}  // namespace

TEST_CASE("truncation structure") {
    const auto& ev = tab_two_band();
    auto tm = build_truncation(ev, 10);

    CHECK(tm.size == 21);
    CHECK(tm.offsets == std::vector<std::size_t>{0, 10});
    CHECK(tm.modes_per_reservoir == std::vector<int>{10, 10});
    CHECK(tm.index_of(0, 0) == 1);
    CHECK(tm.index_of(1, 3) == 14);
    CHECK_THROWS_AS(tm.index_of(2, 0), std::out_of_range);
    CHECK_THROWS_AS(tm.index_of(1, 10), std::out_of_range);
    CHECK(tm.delta_nu_min == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(tm.recurrence_time() == doctest::Approx(2.0 * std::numbers::pi / 0.3));

    // midpoint energies, zero weight below the band, exact mass accounting
    for (int j = 0; j < 10; ++j)
        CHECK(tm.modes[static_cast<std::size_t>(j)].nu ==
              doctest::Approx((j + 0.5) * 0.3).epsilon(1e-12));
    CHECK(tm.modes[0].w == 0.0);
    CHECK(tm.modes[4].w > 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
        double mass = 0.0;
        for (const auto& md : tm.modes)
            if (md.reservoir == k) mass += md.w * md.w;
        CHECK(mass == doctest::Approx(ev.reservoir(k).rho_g.total_mass).epsilon(1e-10));
    }

    CHECK_THROWS_AS(build_truncation(ev, 1), std::invalid_argument);
    CHECK_THROWS_AS(project_probe(ev, tm, TestVector::zero(3)), std::invalid_argument);
}

TEST_CASE("dense assembly and the secular eigensystem") {
    const auto& ev = tab_two_band();
    auto tm = build_truncation(ev, 10);
    auto h = dense_matrix(tm);
    const int n = tm.size;

    CHECK(h[0] == tm.omega);
    for (int i = 0; i + 1 < n; ++i) {
        const auto& md = tm.modes[static_cast<std::size_t>(i)];
        CHECK(h[std::size_t(i + 1) * n + std::size_t(i + 1)] == md.nu);
        CHECK(h[std::size_t(i + 1)] == tm.lambda * md.w);
        CHECK(h[std::size_t(i + 1) * n] == tm.lambda * md.w);
    }

    TruncatedEvolver evo(tm);
    CHECK(evo.secular_residual() <= 1e-12);

    // secular roots plus the decoupled cell energies exhaust the dense spectrum
    auto eig = testsupport::jacobi_eig(h, n);
    std::vector<double> expect(evo.eigenvalues().begin(), evo.eigenvalues().end());
    for (const auto& md : tm.modes)
        if (md.w == 0.0) expect.push_back(md.nu);
    std::sort(expect.begin(), expect.end());
    REQUIRE(expect.size() == static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < expect.size(); ++r)
        CHECK(std::abs(expect[r] - eig.values[r]) <= 1e-10 * (1.0 + std::abs(expect[r])));
}

TEST_CASE("matrix evolution against dense diagonalization") {
    SUBCASE("distinct mode energies") {
        auto tm = build_truncation(tab_two_band(), 10);
        TruncatedEvolver evo(tm);
        auto h = dense_matrix(tm);
        auto p = random_probe(tm, 5);
        for (double t : {0.7, 3.1}) {
            auto mr = evo.evolve(p, t);
            CHECK(evolve_gap(mr, dense_evolve(h, tm.size, p, t)) <= 1e-11);
            CHECK(mr.norm_error <= 1e-12);
        }
    }

    SUBCASE("exactly degenerate mode energies") {
        auto tm = build_truncation(tab_twin(), 12);
        TruncatedEvolver evo(tm);
        // 8 coupled cells per band overlap exactly; one secular root per
        // distinct coupled energy plus one
        CHECK(tm.size == 25);
        CHECK(evo.eigenvalues().size() == 9);
        auto h = dense_matrix(tm);
        auto p = random_probe(tm, 6);
        for (double t : {0.7, 3.1}) {
            auto mr = evo.evolve(p, t);
            CHECK(evolve_gap(mr, dense_evolve(h, tm.size, p, t)) <= 1e-11);
            CHECK(mr.norm_error <= 1e-12);
        }
    }

    SUBCASE("identity at t = 0 and unitarity") {
        auto tm = build_truncation(tab_main(), 64);
        TruncatedEvolver evo(tm);
        auto p = random_probe(tm, 7);
        auto r0 = evo.evolve(p, 0.0);
        CHECK(std::abs(r0.c_of_t - p.c) <= 1e-12);
        for (std::size_t i = 0; i < p.coupled.size(); ++i)
            CHECK(std::abs(r0.coupled[i] - p.coupled[i]) <= 1e-12);
        CHECK(r0.norm_error <= 1e-12);
        CHECK(evo.evolve(p, 10.0 / tm.omega).norm_error <= 1e-10);
    }

    SUBCASE("decoupled limit is a pure phase") {
        auto tm = build_truncation(tab_decoupled(), 32);
        auto p = random_probe(tm, 8);
        for (double t : {0.9, 4.2}) {
            auto r = evolve_matrix(tm, p, t);
            CHECK(std::abs(r.c_of_t - p.c * std::exp(cdouble{0.0, 2.0 * t})) <= 1e-12);
            CHECK(r.norm_error <= 1e-12);
        }
    }

    SUBCASE("probe from another truncation is rejected") {
        auto tm = build_truncation(tab_two_band(), 10);
        auto other = build_truncation(tab_two_band(), 12);
        TruncatedEvolver evo(tm);
        CHECK_THROWS_AS(evo.evolve(random_probe(other, 9), 1.0), std::invalid_argument);
    }
}

TEST_CASE("reservoir projection telescopes") {
    const auto& ev = cont_main();
    const double mass = ev.rho_g_total().total_mass;
    TestVector fg = TestVector::zero(1);
    fg.psi[0] = ev.g_probe(0);

    auto tm = build_truncation(ev, 1024);
    auto fp = project_probe(ev, tm, fg);
    CHECK(fp.c == cdouble{0.0, 0.0});
    CHECK(fp.norm_sq == doctest::Approx(mass).epsilon(1e-4));
    double perp_sum = 0.0;
    for (double v : fp.perp_sq) {
        CHECK(v >= 0.0);
        perp_sum += v;
    }
    // psi = g leaves no orthogonal remainder beyond cell-quadrature noise
    CHECK(perp_sum <= 1e-3);

    // cell amplitudes and free cross terms reassemble <g, psi> exactly at t = 0
    auto pairing = project_pairing(ev, tm, fg, fg, fp);
    TruncatedEvolver evo(tm);
    std::vector<ProbePairing> prs{pairing};
    auto r0 = evo.evolve(fp, 0.0, prs);
    REQUIRE(r0.overlaps.size() == 1);
    CHECK(std::abs(r0.overlaps[0] - cdouble{mass, 0.0}) <= 1e-9 * mass);

    auto rt = evo.evolve(fp, 1.5, prs);
    CHECK(std::abs(rt.overlaps[0]) <= mass * (1.0 + 1e-9));
}

TEST_CASE("analytic evolution against the matrix oracle") {
    const auto& ev = cont_main();
    TestVector fg = TestVector::zero(1);
    fg.psi[0] = ev.g_probe(0);
    std::vector<TestVector> probes{fg};

    auto tm = build_truncation(ev, 1024);
    TruncatedEvolver evo(tm);

    SUBCASE("reservoir-supported initial vector") {
        auto fp = project_probe(ev, tm, fg);
        auto pairing = project_pairing(ev, tm, fg, fg, fp);
        std::vector<ProbePairing> prs{pairing};

        // <delta_S, f> = 0: the boundary-value quadrature must cancel
        auto a0 = evolve_analytic(ev, fg, 0.0, probes);
        CHECK(std::abs(a0.c_of_t) <= 1e-4);
        CHECK(std::abs(a0.overlaps[0] - cdouble{ev.rho_g_total().total_mass, 0.0}) <= 5e-3);

        for (double t : {0.5, 1.5, 4.0}) {
            auto an = evolve_analytic(ev, fg, t, probes);
            auto mr = evo.evolve(fp, t, prs);
            CHECK(std::abs(an.c_of_t - mr.c_of_t) <= 1e-3);
            CHECK(std::abs(an.overlaps[0] - mr.overlaps[0]) <= 5e-3);
        }
    }

    SUBCASE("mixed initial vector") {
        TestVector fm = fg;
        fm.c = {0.5, 0.1};
        auto fp = project_probe(ev, tm, fm);
        auto pairing = project_pairing(ev, tm, fg, fm, fp);
        std::vector<ProbePairing> prs{pairing};
        for (double t : {0.5, 1.5, 4.0}) {
            auto an = evolve_analytic(ev, fm, t, probes);
            auto mr = evo.evolve(fp, t, prs);
            CHECK(std::abs(an.c_of_t - mr.c_of_t) <= 1e-3);
            CHECK(std::abs(an.overlaps[0] - mr.overlaps[0]) <= 5e-3);
        }
    }

    SUBCASE("decoupled model is refused") {
        CHECK_THROWS_AS(
            evolve_analytic(tab_decoupled(), system_excitation(1), 1.0),
            std::invalid_argument);
    }

    SUBCASE("failing spectral conditions are refused") {
        // inverse square-root band edges: boundary resolvent unbounded
        std::ostringstream os;
        os << "nu,rho\n";
        auto grid = uniform_grid(0.0, 4.0, 1025);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double x = std::clamp(grid[j], grid[1], grid[grid.size() - 2]);
            os << format_sig12(grid[j]) << ','
               << format_sig12(1.0 / (std::numbers::pi * std::sqrt(x * (4.0 - x)))) << '\n';
        }
        auto path = testsupport::write_temp_file("oracle_edge", os.str());
        NessEvaluator bad(tab_model(2.0, 0.3, {path}, -0.1), grid_opts(1025));
        CHECK_FALSE(bad.conditions().usable());
        CHECK_THROWS_AS(evolve_analytic(bad, system_excitation(1), 1.0), ConditionFailure);
    }
}

TEST_CASE("pure system excitation decays through the coupling window") {
    const auto& ev = tab_main();
    TestVector f0 = system_excitation(1);

    auto tm = build_truncation(ev, 2048);
    TruncatedEvolver evo(tm);
    auto fp = project_probe(ev, tm, f0);

    std::vector<double> times;
    for (int k = 0; k <= 12; ++k) times.push_back(k);
    CHECK(times.back() <= 0.1 * tm.recurrence_time());
    auto series = evolve_analytic_series(ev, f0, times);

    CHECK(std::abs(series[0].c_of_t - cdouble{1.0, 0.0}) <= 1e-3);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        auto mr = evo.evolve(fp, times[i]);
        worst = std::max(worst, std::abs(mr.c_of_t - series[i].c_of_t));
    }
    CHECK(worst <= 1e-2);

    // resonance width 0.18: the excitation leaks into the band
    CHECK(std::abs(series.back().c_of_t) < 0.2);
    CHECK(std::abs(series.back().c_of_t) < std::abs(series[1].c_of_t));
}

TEST_CASE("quench covariance plateaus at the steady-state prediction") {
    const auto& ev = tab_main();
    TestVector f0 = system_excitation(1);
    const double S = ev.ness_covariance(f0);
    CHECK(S > 0.0);

    auto plateau = [&](int M) {
        auto tm = build_truncation(ev, M);
        TruncatedEvolver evo(tm);
        auto fp = project_probe(ev, tm, f0);
        CHECK(quench_covariance(tm, evo, fp, 0.0) <= 1e-12);
        double acc = 0.0;
        int n = 0;
        for (double t = 40.0; t <= 60.0; t += 5.0) {
            CHECK(t <= 0.25 * tm.recurrence_time());
            acc += quench_covariance(tm, evo, fp, t);
            ++n;
        }
        return acc / n;
    };

    double q128 = plateau(128), q512 = plateau(512), q2048 = plateau(2048);
    CHECK(std::abs(q2048 - S) <= 0.05 * S);
    CHECK(std::abs(q512 - S) < std::abs(q128 - S));
    CHECK(std::abs(q2048 - S) < std::abs(q512 - S));
}

TEST_CASE("branch-cut identity") {
    SUBCASE("centered resonance") {
        for (double t : {0.0, 2.0}) {
            auto cc = contour_identity_check(tab_main(), t);
            CHECK_FALSE(cc.degenerate);
            CHECK(cc.residual_fine < cc.residual_coarse);
            CHECK(cc.residual <= 1e-5);
        }
        // t = 0 sum rule: no off-support zeros of eta, so the weight is 1
        auto cc = contour_identity_check(tab_main(), 0.0);
        CHECK(cc.rhs.real() == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(std::abs(cc.rhs.imag()) <= 1e-10);
    }

    SUBCASE("two more coupling settings") {
        for (auto [om, lam] : {std::pair{1.7, 0.25}, {2.4, 0.35}}) {
            NessEvaluator ev(tab_model(om, lam, {semi_csv_path()}, -0.1), grid_opts(1025));
            REQUIRE(ev.conditions().usable());
            auto cc = contour_identity_check(ev, 0.7);
            CHECK(cc.residual_fine < cc.residual_coarse);
            CHECK(cc.residual <= 1e-4);
        }
    }

    SUBCASE("decoupled model short-circuits") {
        auto cc = contour_identity_check(tab_decoupled(), 1.0);
        CHECK(cc.degenerate);
        CHECK(cc.lhs == cdouble{0.0, 0.0});
        CHECK(cc.rhs == cdouble{0.0, 0.0});
        CHECK(cc.residual == 0.0);
    }

    SUBCASE("broadening must be positive") {
        CHECK_THROWS_AS(contour_identity_check(tab_main(), 0.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("time series CSV") {
    std::vector<double> t{0.0, 0.5};
    std::vector<cdouble> c{{1.0, 0.0}, {0.3, -0.4}};
    std::vector<double> cov{0.0, 0.25};

    auto text = export_time_series_csv(t, c, cov);
    std::istringstream is(text);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,re_c,im_c,abs_c,covariance");
    REQUIRE(std::getline(is, line));
    CHECK(line == "0,1,0,1,0");
    REQUIRE(std::getline(is, line));
    CHECK(line == "0.5,0.3,-0.4,0.5,0.25");
    CHECK_FALSE(std::getline(is, line));

    // covariance column may be omitted, mismatched lengths may not
    auto no_cov = export_time_series_csv(t, c, {});
    CHECK(no_cov.find("0.5,0.3,-0.4,0.5,0\n") != std::string::npos);
    CHECK_THROWS_AS(export_time_series_csv(t, std::vector<cdouble>{c[0]}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(export_time_series_csv(t, c, std::vector<double>{1.0}),
                    std::invalid_argument);
}
