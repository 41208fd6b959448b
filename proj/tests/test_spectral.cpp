#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bosejj/graphs.hpp>
#include <bosejj/spectral.hpp>

#include "support.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

using namespace bosejj;

namespace {

SpectralDensity table_density(std::vector<double> grid, std::vector<double> values) {
    SpectralDensity rho;
    rho.grid = std::move(grid);
    rho.values = std::move(values);
    rho.support_lo = rho.grid.front();
    rho.support_hi = rho.grid.back();
    rho.total_mass = trapezoid(rho.grid, rho.values);
    return rho;
}

}  // namespace

TEST_CASE("continuum density in d = 3") {
    RadialFormFactor g;
    g.support_radius = 2.0;
    g.samples.resize(4001);
    for (int j = 0; j < 4001; ++j) {
        double p = 2.0 * j / 4000.0;
        g.samples[j] = std::exp(-2.0 * p * p);
    }
    SpectralOptions opts;
    // the sqrt(nu) band bottom costs h^{3/2} in the mass quadrature, so the
    // 1e-6 normalization check needs this much grid
    opts.grid_points = 131073;
    auto rho = density_continuum_rd(3, g, opts);

    CHECK(rho.at(0.0) == 0.0);
    CHECK(rho.support_hi <= 2.0 + 1e-9);  // R^2 / 2
    CHECK(std::abs(rho.total_mass - g.norm_sq(3)) <= 1e-6 * g.norm_sq(3));
    for (double v : rho.values) CHECK(v >= 0.0);

    CHECK_THROWS_AS(density_continuum_rd(2, g, opts), std::invalid_argument);

    // independent Monte Carlo estimate: uniform over the bounding box,
    // Gaussian-broadened level set at fixed nu targets
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double sigma = 0.02;
    const long samples = 2'000'000;
    const double vol = 64.0;  // box [-2, 2]^3
    std::vector<double> targets = {0.3, 0.8, 1.5};
    std::vector<double> acc(targets.size(), 0.0), acc2(targets.size(), 0.0);
    for (long s = 0; s < samples; ++s) {
        double x = u(rng), y = u(rng), z = u(rng);
        double p = std::sqrt(x * x + y * y + z * z);
        double w = 0.0;
        if (p <= 2.0) {
            double gv = std::exp(-2.0 * p * p);
            w = gv * gv;
        }
        double kin = 0.5 * p * p;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            double dv = (targets[t] - kin) / sigma;
            double val = w * std::exp(-0.5 * dv * dv) /
                         (sigma * std::sqrt(2.0 * std::numbers::pi));
            acc[t] += val;
            acc2[t] += val * val;
        }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        double mean = acc[t] / samples;
        double var = acc2[t] / samples - mean * mean;
        double estimate = vol * mean;
        double stderr3 = 3.0 * vol * std::sqrt(var / samples);
        CAPTURE(targets[t]);
        CHECK(std::abs(rho.at(targets[t]) - estimate) <= stderr3 + 2e-4);
    }
}

TEST_CASE("lattice density in d = 3") {
    auto patch = make_zd_patch(3, 12);
    auto g = realize_on_patch(patch, FormFactor{KDeltaFormFactor{{0, 0, 0}}});
    SpectralOptions opts;
    opts.grid_points = 2049;
    opts.mc_samples = 1'000'000;
    opts.seed = 17;
    auto rho = density_lattice_zd(patch, g, opts);

    // one unit amplitude per neighbor: squared norm 2d
    CHECK(std::abs(rho.total_mass - 6.0) <= 1e-3 * 6.0);
    CHECK(lattice_band_top(3) == doctest::Approx(12.0));
    CHECK(rho.at(12.5) == 0.0);
    CHECK(rho.at(-0.5) == 0.0);
    for (double v : rho.values) CHECK(v >= 0.0);

    // deterministic for a fixed seed, bit for bit
    auto rho2 = density_lattice_zd(patch, g, opts);
    REQUIRE(rho2.values.size() == rho.values.size());
    CHECK(std::memcmp(rho2.values.data(), rho.values.data(),
                      rho.values.size() * sizeof(double)) == 0);

    // mid-band value against exact diagonalization of a periodic 20^3 box:
    // levels 2 sum(1 - cos theta_j), weights |g_hat|^2 = 4 (sum sin theta_j)^2.
    // The box spectrum is a finite comb of degenerate levels, so both sides
    // are compared under the same Gaussian broadening.
    const int L = 20;
    const double two_pi = 2.0 * std::numbers::pi;
    const double sigma = 0.25;
    double box = 0.0;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            for (int c = 0; c < L; ++c) {
                double t1 = two_pi * a / L, t2 = two_pi * b / L, t3 = two_pi * c / L;
                double level = 2.0 * (3.0 - std::cos(t1) - std::cos(t2) - std::cos(t3));
                double sins = std::sin(t1) + std::sin(t2) + std::sin(t3);
                double dv = (6.0 - level) / sigma;
                box += 4.0 * sins * sins * std::exp(-0.5 * dv * dv) /
                       (sigma * std::sqrt(2.0 * std::numbers::pi));
            }
    box /= static_cast<double>(L) * L * L;
    std::vector<double> smeared(rho.grid.size());
    for (std::size_t j = 0; j < rho.grid.size(); ++j) {
        double dv = (6.0 - rho.grid[j]) / sigma;
        smeared[j] = rho.values[j] * std::exp(-0.5 * dv * dv) /
                     (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    double impl = trapezoid(rho.grid, smeared);
    CHECK(std::abs(impl - box) <= 0.05 * box);
}

TEST_CASE("comb density from the broadened patch resolvent") {
    auto comb = make_comb_patch(3, 4, 30);
    auto phi = coordinate_sum_phi(comb);
    auto g = k_apply(comb, phi, delta_at(comb, {0, 0, 0, 5}));
    SpectralOptions opts;
    opts.grid_points = 2049;
    auto rho = density_graph_resolvent(comb, g, opts);

    CHECK(std::abs(rho.total_mass - 2.0) <= 0.01 * 2.0);
    CHECK(comb_band_top(3) == doctest::Approx(4.0 * std::sqrt(10.0)));
    CHECK(rho.at(-1.0) == 0.0);
    for (double v : rho.values) CHECK(v >= 0.0);

    // support too close to the boundary margin is rejected
    auto small = make_comb_patch(3, 4, 6);
    GraphExplicit gs;
    gs.amp[*small.find(std::vector<int>{0, 0, 0, 6})] = 1.0;  // tooth tip, depth 0
    SpectralOptions so;
    so.grid_points = 513;
    CHECK_THROWS_AS(density_graph_resolvent(small, gs, so), std::invalid_argument);

    // independent kernel-polynomial estimate on the identical patch with
    // Jackson damping. The finite patch carries discrete tooth modes about
    // 0.1 apart, so both estimates are compared under one Gaussian blur wide
    // enough to quotient out how each estimator splits that comb of levels.
    const double spr = 2.0 * std::sqrt(10.0);
    const int n = comb.n;
    const int moments = 600;
    std::vector<cdouble> t0(n, 0.0), t1v(n, 0.0), tmp(n, 0.0);
    for (const auto& [v, a] : g.amp) t0[v] = a;
    // y = (spr - A)/spr - 1 = -A/spr maps the band [0, 2 spr] onto [-1, 1]
    auto apply_y = [&](const std::vector<cdouble>& in, std::vector<cdouble>& out) {
        a_matvec(comb, in, out);
        for (int v = 0; v < n; ++v) out[v] = -out[v] / spr;
    };
    std::vector<double> mu(moments, 0.0);
    for (int v = 0; v < n; ++v) mu[0] += std::norm(t0[v]);
    apply_y(t0, t1v);
    for (int v = 0; v < n; ++v) mu[1] += std::real(std::conj(t0[v]) * t1v[v]);
    for (int m = 2; m < moments; ++m) {
        apply_y(t1v, tmp);
        for (int v = 0; v < n; ++v) {
            cdouble next = 2.0 * tmp[v] - t0[v];
            t0[v] = t1v[v];
            t1v[v] = next;
        }
        double acc = 0.0;
        for (const auto& [v, a] : g.amp) acc += std::real(std::conj(a) * t1v[v]);
        mu[m] = acc;
    }
    auto jackson = [&](int m) {
        double M = moments + 1.0;
        return ((M - m) * std::cos(std::numbers::pi * m / M) +
                std::sin(std::numbers::pi * m / M) / std::tan(std::numbers::pi / M)) /
               M;
    };
    std::vector<double> kpm(rho.grid.size(), 0.0);
    for (std::size_t j = 0; j < rho.grid.size(); ++j) {
        double y = (rho.grid[j] - spr) / spr;
        if (std::abs(y) >= 0.999) continue;
        double acc = mu[0] * jackson(0);
        double tkm = 1.0, tk = y;
        for (int m = 1; m < moments; ++m) {
            acc += 2.0 * mu[m] * jackson(m) * tk;
            double tn = 2.0 * y * tk - tkm;
            tkm = tk;
            tk = tn;
        }
        kpm[j] = acc / (std::numbers::pi * std::sqrt(1.0 - y * y) * spr);
    }
    const double blur = 0.2;
    const double h = rho.grid[1] - rho.grid[0];
    auto blurred_at = [&](const std::vector<double>& f, std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            double dv = (rho.grid[i] - rho.grid[j]) / blur;
            acc += f[j] * std::exp(-0.5 * dv * dv);
        }
        return acc * h / (blur * std::sqrt(2.0 * std::numbers::pi));
    };
    double l1 = 0.0;
    for (std::size_t i = 0; i < rho.grid.size(); i += 4)
        l1 += std::abs(blurred_at(rho.values, i) - blurred_at(kpm, i)) * 4.0 * h;
    CHECK(l1 <= 0.05 * rho.total_mass);
}

TEST_CASE("boundary resolvent tables") {
    // symmetric bump: the principal value vanishes at the center
    auto grid = uniform_grid(0.0, 4.0, 4097);
    std::vector<double> bump(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double u = grid[j] - 2.0;
        bump[j] = std::exp(-8.0 * u * u);
    }
    auto rho = table_density(grid, bump);
    auto rb = resolvent_boundary(rho);
    std::size_t mid = grid.size() / 2;
    CHECK(grid[mid] == doctest::Approx(2.0));
    CHECK(std::abs(rb.real_part[mid]) < 1e-10);
    // imag part is pi rho by definition, exact on the shared grid
    for (std::size_t j = 0; j < grid.size(); j += 97)
        CHECK(rb.imag_part[j] == doctest::Approx(std::numbers::pi * rho.values[j]).epsilon(1e-14));
    CHECK(rb.sup_bound > 0.0);

    // zero density: both parts vanish
    auto zero = table_density(uniform_grid(0.0, 2.0, 1025), std::vector<double>(1025, 0.0));
    auto rz = resolvent_boundary(zero);
    for (double v : rz.real_part) CHECK(v == 0.0);
    for (double v : rz.imag_part) CHECK(v == 0.0);

    // semicircle: closed-form transform is linear inside the band
    auto sgrid = uniform_grid(0.0, 4.0, 32769);
    std::vector<double> semi(sgrid.size());
    for (std::size_t j = 0; j < sgrid.size(); ++j) {
        double u = sgrid[j] - 2.0;
        semi[j] = std::sqrt(std::max(0.0, 4.0 - u * u));
    }
    auto rs = resolvent_boundary(table_density(sgrid, semi));
    for (double x : {0.9, 1.7, 2.0, 2.5, 3.3}) {
        std::size_t j = static_cast<std::size_t>(std::lround(x / 4.0 * 32768.0));
        CHECK(std::abs(rs.real_part[j] - std::numbers::pi * (sgrid[j] - 2.0)) < 1e-4);
    }

    // coarse grids fail the quadrature self-consistency check
    auto coarse_grid = uniform_grid(0.0, 4.0, 17);
    std::vector<double> spike(coarse_grid.size());
    for (std::size_t j = 0; j < coarse_grid.size(); ++j) {
        double u = coarse_grid[j] - 2.0;
        spike[j] = std::exp(-40.0 * u * u);
    }
    CHECK_THROWS_AS(resolvent_boundary(table_density(coarse_grid, spike)),
                    std::runtime_error);
}

TEST_CASE("density tables round-trip through CSV") {
    auto rho = table_density(uniform_grid(0.5, 2.5, 33),
                             std::vector<double>(33, 0.25));
    auto text = export_density_csv(rho);
    CHECK(text.substr(0, 7) == "nu,rho\n");
    auto back = import_density_csv(text);
    REQUIRE(back.grid.size() == rho.grid.size());
    for (std::size_t j = 0; j < rho.grid.size(); ++j) {
        CHECK(back.grid[j] == doctest::Approx(rho.grid[j]).epsilon(1e-11));
        CHECK(back.values[j] == doctest::Approx(rho.values[j]).epsilon(1e-11));
    }
    CHECK(back.total_mass == doctest::Approx(rho.total_mass).epsilon(1e-10));

    CHECK_THROWS_AS(import_density_csv("nu,rho\n1.0,0.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(import_density_csv("nu,rho\n1.0,0.5\n0.5,0.2\n"), std::invalid_argument);
    CHECK_THROWS_AS(import_density_csv("nu,rho\n1.0,-0.5\n2.0,0.2\n"), std::invalid_argument);
    CHECK_THROWS_AS(import_density_csv("nu,rho\n-1.0,0.5\n2.0,0.2\n"), std::invalid_argument);
}
